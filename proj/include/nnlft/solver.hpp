#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nnlft/factor_model.hpp"
#include "nnlft/loss.hpp"
#include "nnlft/metrics.hpp"
#include "nnlft/sparse_tensor.hpp"

namespace nnlft {

inline constexpr double kDefaultLambda = 0.0009765625;  // 2^-10
inline constexpr std::size_t kDefaultMaxIters = 1000;
inline constexpr double kDefaultTol = 1e-5;
inline constexpr double kDefaultDenomGuard = 1e-12;

struct TrainConfig {
  std::size_t rank = kDefaultRank;
  double lambda = kDefaultLambda;
  LossKind loss = LossKind::hybrid();
  std::size_t max_iters = kDefaultMaxIters;
  double tol = kDefaultTol;
  std::uint64_t seed = 0;
  double init_scale = kDefaultInitScale;
  double denom_guard = kDefaultDenomGuard;
  Execution exec = Execution::Parallel;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double train_objective = 0.0;
  double val_rmse = 0.0;  // NaN when the validation set is empty
  double val_mae = 0.0;
};

struct TrainReport {
  std::vector<IterationRecord> history;
  bool converged = false;
  std::size_t iterations_run = 0;
  double initial_objective = 0.0;
  std::string model_fingerprint;
};

/// Content hash of the factor values, hex encoded.
std::string model_fingerprint(const FactorModel& m);

/**
 * Analytic partial derivative of objective(m, train, lambda, kind) with
 * respect to factor(mode)(row, col). Each observed entry in the row's slice
 * contributes through its own residual branch. Throws std::out_of_range.
 */
double gradient(const FactorModel& m, const SparseTensor3& train, double lambda,
                const LossKind& kind, Mode mode, std::size_t row, std::size_t col);

inline double grad_s(const FactorModel& m, const SparseTensor3& train, double lambda,
                     std::size_t i, std::size_t r) {
  return gradient(m, train, lambda, LossKind::hybrid(), Mode::Sensor, i, r);
}

/**
 * One multiplicative pass over a single factor matrix under the hybrid loss.
 *
 * Predictions are refreshed from the current factors at the start of the
 * pass. For every row and column, each entry of the row's slice adds to a
 * numerator and a denominator according to its own residual branch:
 *
 *   delta < -1 :  2y dt         /  (dt + 2yhat dt + 2 lambda x)
 *   |delta|<=1 :  4y dt         /  (4yhat dt + 2 lambda x)
 *   delta > 1  :  (dt + 2y dt)  /  (2yhat dt + 2 lambda x)
 *
 * where dt is the product of the other two factor rows at that column and x
 * the factor being updated. The factor is then scaled by num / (den + guard).
 * Rows are independent; the Parallel path distributes them over threads and
 * is bit-identical to Serial.
 */
void update_mode(FactorModel& m, const SparseTensor3& train, double lambda, Mode mode,
                 double denom_guard = kDefaultDenomGuard, Execution exec = Execution::Parallel);

/// Baseline passes. L2: num = y dt, den = yhat dt + lambda x. Cauchy: the
/// same with y and yhat weighted by 1 / (1 + (delta/gamma)^2).
void update_mode_baseline(FactorModel& m, const SparseTensor3& train, double lambda, Mode mode,
                          const LossKind& kind, double denom_guard = kDefaultDenomGuard,
                          Execution exec = Execution::Parallel);

/// Dispatches on `kind` to update_mode or update_mode_baseline.
void update_mode_for(FactorModel& m, const SparseTensor3& train, double lambda, Mode mode,
                     const LossKind& kind, double denom_guard = kDefaultDenomGuard,
                     Execution exec = Execution::Parallel);

/// Sensor pass, then day pass, then time pass.
void full_iteration(FactorModel& m, const SparseTensor3& train, const TrainConfig& cfg);

/// Runs from a caller-supplied starting model instead of init_factors.
std::pair<FactorModel, TrainReport> train_from(FactorModel initial, const DatasetSplit& split,
                                               const TrainConfig& cfg);

/**
 * Initializes factors from cfg.seed and iterates until the training
 * objective changes by less than cfg.tol between consecutive iterations, or
 * cfg.max_iters is reached. Validation metrics are recorded every iteration
 * but never used for stopping.
 */
std::pair<FactorModel, TrainReport> train(const SparseTensor3& t, const DatasetSplit& split,
                                          const TrainConfig& cfg);

/// Header `iter,train_objective,val_rmse,val_mae`, one row per iteration.
void write_history_csv(std::ostream& out, const TrainReport& report);

}  // namespace nnlft
