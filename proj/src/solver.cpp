#include "nnlft/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "text_util.hpp"

namespace nnlft {

namespace {

struct OtherModes {
  Mode first;
  Mode second;
};

constexpr OtherModes other_modes(Mode mode) {
  switch (mode) {
    case Mode::Sensor: return {Mode::Day, Mode::Time};
    case Mode::Day: return {Mode::Sensor, Mode::Time};
    case Mode::Time: return {Mode::Sensor, Mode::Day};
  }
  return {Mode::Day, Mode::Time};
}

// Per-entry multipliers: the entry adds num * dt to the numerator and
// den * dt + reg * x to the denominator of every column.
struct BranchTerms {
  double num;
  double den;
  double reg;
};

inline BranchTerms hybrid_terms(double y, double yhat, double lambda) {
  const double delta = y - yhat;
  if (delta < -1.0) return {2.0 * y, 1.0 + 2.0 * yhat, 2.0 * lambda};
  if (delta <= 1.0) return {4.0 * y, 4.0 * yhat, 2.0 * lambda};
  return {1.0 + 2.0 * y, 2.0 * yhat, 2.0 * lambda};
}

inline BranchTerms baseline_terms(double y, double yhat, double lambda, const LossKind& kind) {
  if (kind.tag == LossTag::Cauchy) {
    const double z = (y - yhat) / kind.cauchy_gamma;
    const double w = 1.0 / (1.0 + z * z);
    return {w * y, w * yhat, lambda};
  }
  return {y, yhat, lambda};
}

std::vector<double> predictions(const FactorModel& m, const SparseTensor3& train, Execution exec) {
  const auto data = train.entries();
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  std::vector<double> yhat(data.size());
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
  for (std::ptrdiff_t p = 0; p < n; ++p) yhat[p] = predict_unchecked(m, data[p].index);
  return yhat;
}

template <typename TermsFn>
void multiplicative_pass(FactorModel& m, const SparseTensor3& train, Mode mode, double guard,
                         Execution exec, TermsFn&& terms) {
  if (train.dims() != m.dims()) throw std::invalid_argument("training set dims do not match model");
  if (!(guard > 0.0)) throw std::invalid_argument("denominator guard must be positive");

  const std::vector<double> yhat = predictions(m, train, exec);
  const auto data = train.entries();
  const auto [first, second] = other_modes(mode);
  const FactorMatrix& left = m.factor(first);
  const FactorMatrix& right = m.factor(second);
  FactorMatrix& target = m.factor(mode);
  const std::size_t rank = m.rank();
  const auto rows = static_cast<std::ptrdiff_t>(target.rows());

#pragma omp parallel if (exec == Execution::Parallel)
  {
    std::vector<double> num(rank);
    std::vector<double> den(rank);
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t row = 0; row < rows; ++row) {
      const auto slice = train.slice_positions(mode, static_cast<std::size_t>(row));
      if (slice.empty()) continue;
      std::fill(num.begin(), num.end(), 0.0);
      std::fill(den.begin(), den.end(), 0.0);
      const auto x = target.row(static_cast<std::size_t>(row));
      for (std::size_t p : slice) {
        const Entry& e = data[p];
        const BranchTerms bt = terms(e.value, yhat[p]);
        const double* a = left.row(e.index.along(first)).data();
        const double* b = right.row(e.index.along(second)).data();
        for (std::size_t r = 0; r < rank; ++r) {
          const double dt = a[r] * b[r];
          num[r] += bt.num * dt;
          den[r] += bt.den * dt + bt.reg * x[r];
        }
      }
      for (std::size_t r = 0; r < rank; ++r) x[r] *= num[r] / (den[r] + guard);
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (rank < 1) throw std::invalid_argument("rank must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be > 0");
  if (!(denom_guard > 0.0)) throw std::invalid_argument("denom_guard must be > 0");
  if (loss.tag == LossTag::Cauchy && !(loss.cauchy_gamma > 0.0)) {
    throw std::invalid_argument("cauchy gamma must be > 0");
  }
}

std::string model_fingerprint(const FactorModel& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Mode mode : kAllModes) {
    const auto data = m.factor(mode).data();
    h = detail::fnv1a64(data.data(), data.size_bytes(), h);
  }
  return detail::to_hex(h);
}

double gradient(const FactorModel& m, const SparseTensor3& train, double lambda,
                const LossKind& kind, Mode mode, std::size_t row, std::size_t col) {
  if (train.dims() != m.dims()) throw std::invalid_argument("training set dims do not match model");
  if (col >= m.rank()) throw std::out_of_range("gradient column out of range");
  const auto slice = train.slice_positions(mode, row);
  const auto [first, second] = other_modes(mode);
  const double x = m.factor(mode)(row, col);
  double g = 0.0;
  for (std::size_t p : slice) {
    const Entry& e = train[p];
    const double dt =
        m.factor(first)(e.index.along(first), col) * m.factor(second)(e.index.along(second), col);
    const double delta = residual(e.value, predict_unchecked(m, e.index));
    double dloss = 0.0;  // derivative of the per-entry loss w.r.t. the factor
    switch (kind.tag) {
      case LossTag::HybridSL1L2:
        if (delta < -1.0) {
          dloss = dt - 2.0 * delta * dt;
        } else if (delta <= 1.0) {
          dloss = -4.0 * delta * dt;
        } else {
          dloss = -dt - 2.0 * delta * dt;
        }
        break;
      case LossTag::L2:
        dloss = -2.0 * delta * dt;
        break;
      case LossTag::Cauchy: {
        const double z = delta / kind.cauchy_gamma;
        dloss = -2.0 * delta * dt / (1.0 + z * z);
        break;
      }
    }
    g += dloss + 2.0 * lambda * x;
  }
  return g;
}

void update_mode(FactorModel& m, const SparseTensor3& train, double lambda, Mode mode,
                 double denom_guard, Execution exec) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  multiplicative_pass(m, train, mode, denom_guard, exec, [lambda](double y, double yhat) {
    return hybrid_terms(y, yhat, lambda);
  });
}

void update_mode_baseline(FactorModel& m, const SparseTensor3& train, double lambda, Mode mode,
                          const LossKind& kind, double denom_guard, Execution exec) {
  if (kind.tag == LossTag::HybridSL1L2) {
    throw std::invalid_argument("update_mode_baseline expects the l2 or cauchy loss");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  multiplicative_pass(m, train, mode, denom_guard, exec, [lambda, &kind](double y, double yhat) {
    return baseline_terms(y, yhat, lambda, kind);
  });
}

void update_mode_for(FactorModel& m, const SparseTensor3& train, double lambda, Mode mode,
                     const LossKind& kind, double denom_guard, Execution exec) {
  if (kind.tag == LossTag::HybridSL1L2) {
    update_mode(m, train, lambda, mode, denom_guard, exec);
  } else {
    update_mode_baseline(m, train, lambda, mode, kind, denom_guard, exec);
  }
}

void full_iteration(FactorModel& m, const SparseTensor3& train, const TrainConfig& cfg) {
  for (Mode mode : kAllModes) {
    update_mode_for(m, train, cfg.lambda, mode, cfg.loss, cfg.denom_guard, cfg.exec);
  }
}

std::pair<FactorModel, TrainReport> train_from(FactorModel model, const DatasetSplit& split,
                                               const TrainConfig& cfg) {
  cfg.validate();
  if (split.train.empty()) throw std::invalid_argument("training set is empty");
  if (split.train.dims() != model.dims() || split.validation.dims() != model.dims() ||
      split.test.dims() != model.dims()) {
    throw std::invalid_argument("split dims do not match model dims");
  }
  if (model.rank() != cfg.rank) throw std::invalid_argument("model rank does not match config");

  TrainReport report;
  double previous = objective(model, split.train, cfg.lambda, cfg.loss, cfg.exec);
  report.initial_objective = previous;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    full_iteration(model, split.train, cfg);
    const double current = objective(model, split.train, cfg.lambda, cfg.loss, cfg.exec);
    IterationRecord rec{it, current, nan, nan};
    if (!split.validation.empty()) {
      const MetricReport val = evaluate(model, split.validation, cfg.exec);
      rec.val_rmse = val.rmse;
      rec.val_mae = val.mae;
    }
    report.history.push_back(rec);
    if (std::abs(current - previous) < cfg.tol) {
      report.converged = true;
      break;
    }
    previous = current;
  }
  report.iterations_run = report.history.size();
  report.model_fingerprint = model_fingerprint(model);
  return {std::move(model), std::move(report)};
}

std::pair<FactorModel, TrainReport> train(const SparseTensor3& t, const DatasetSplit& split,
                                          const TrainConfig& cfg) {
  cfg.validate();
  if (split.train.dims() != t.dims()) throw std::invalid_argument("split does not match tensor dims");
  if (split.train.size() + split.validation.size() + split.test.size() != t.size()) {
    throw std::invalid_argument("split sizes do not add up to the tensor's entry count");
  }
  if (split.train.empty()) throw std::invalid_argument("training set is empty");
  return train_from(init_factors(t.dims(), cfg.rank, cfg.seed, cfg.init_scale), split, cfg);
}

void write_history_csv(std::ostream& out, const TrainReport& report) {
  out << "iter,train_objective,val_rmse,val_mae\n";
  for (const IterationRecord& rec : report.history) {
    out << rec.iteration << ',' << detail::format_double(rec.train_objective) << ','
        << detail::format_double(rec.val_rmse) << ',' << detail::format_double(rec.val_mae)
        << '\n';
  }
}

}  // namespace nnlft
