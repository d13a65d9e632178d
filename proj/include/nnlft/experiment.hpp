#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nnlft/factor_model.hpp"
#include "nnlft/loss.hpp"
#include "nnlft/metrics.hpp"
#include "nnlft/solver.hpp"
#include "nnlft/sparse_tensor.hpp"

namespace nnlft {

/// 2^0, 2^-1, ..., 2^-20.
std::vector<double> default_sweep_grid();

struct ExperimentConfig {
  std::string data_path;
  std::optional<Dims> dims;
  SplitRatios ratios;
  std::size_t rank = kDefaultRank;
  LossKind loss = LossKind::hybrid();
  double lambda = kDefaultLambda;
  bool sweep = false;
  std::vector<double> sweep_grid = default_sweep_grid();
  std::uint64_t seed = 0;
  std::size_t max_iters = kDefaultMaxIters;
  double tol = kDefaultTol;
  double init_scale = kDefaultInitScale;
  Execution exec = Execution::Parallel;
  std::size_t repeats = 1;  // compare only: training seeds seed .. seed+repeats-1
  std::filesystem::path output_dir = ".";

  TrainConfig train_config() const;
};

Dims parse_dims(const std::string& text);
std::string format_dims(const Dims& dims);

/// A split loaded from `<data>.train/.val/.test` when those exist, otherwise
/// produced from the single COO file at `data_path` with cfg.ratios and cfg.seed.
struct LoadedSplit {
  DatasetSplit split;
  std::string digest;  // FNV-1a over the input file bytes
  bool from_files = false;
};

LoadedSplit load_experiment_split(const ExperimentConfig& cfg);

/// Digest of a file's bytes, hex encoded.
std::string file_digest(const std::filesystem::path& path);

struct SplitSummary {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::filesystem::path prefix;  // files are prefix + ".train" etc.
};

SplitSummary run_split(const ExperimentConfig& cfg);

struct TrainOutcome {
  FactorModel model;
  TrainReport report;
  MetricReport test;
};

/// Writes factors.txt, history.csv, metrics.csv (test set) and manifest.txt.
TrainOutcome run_train(const ExperimentConfig& cfg);

struct SweepRecord {
  double lambda = 0.0;
  double val_rmse = 0.0;
  double val_mae = 0.0;
  std::size_t iterations_run = 0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  double best_lambda = 0.0;
};

/// Minimum validation RMSE; ties go to the smaller lambda.
double select_best_lambda(const std::vector<SweepRecord>& records);

/// Writes sweep.csv and manifest.txt.
SweepResult run_sweep(const ExperimentConfig& cfg);

struct ComparisonRow {
  std::string model;  // M1, M2 or M4
  LossKind loss;
  double test_rmse = 0.0;
  double test_mae = 0.0;
  std::size_t runs = 0;
};

/// Trains the hybrid (M1), L2 (M2) and Cauchy (M4) losses on one split.
/// Writes comparison.csv and manifest.txt.
std::vector<ComparisonRow> run_compare(const ExperimentConfig& cfg);

/// Predicts every `i,j,k` target line (a trailing value column is ignored)
/// and writes `#dims` plus `i,j,k,value` records. Returns the record count.
std::size_t run_impute(const std::filesystem::path& checkpoint, const std::filesystem::path& targets,
                       const std::filesystem::path& output);

/// Test metrics of a checkpoint on a COO holdout file; writes metrics.csv.
MetricReport run_evaluate(const std::filesystem::path& checkpoint,
                          const std::filesystem::path& holdout,
                          const std::filesystem::path& output_dir);

/// `key = value` lines readable back as a config file.
void write_manifest(const std::filesystem::path& path, const std::string& command,
                    const ExperimentConfig& cfg, const std::string& digest,
                    const std::vector<std::pair<std::string, std::string>>& extra = {});

}  // namespace nnlft
