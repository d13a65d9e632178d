#include "nnlft/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "text_util.hpp"

namespace nnlft {

namespace fs = std::filesystem;

std::vector<double> default_sweep_grid() {
  std::vector<double> grid;
  for (int e = 0; e >= -20; --e) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig tc;
  tc.rank = rank;
  tc.lambda = lambda;
  tc.loss = loss;
  tc.max_iters = max_iters;
  tc.tol = tol;
  tc.seed = seed;
  tc.init_scale = init_scale;
  tc.exec = exec;
  tc.validate();
  return tc;
}

Dims parse_dims(const std::string& text) {
  auto f = detail::split_fields(text);
  if (f.size() != 3) throw std::invalid_argument("dims must look like I,J,K");
  Dims d{};
  for (int m = 0; m < 3; ++m) {
    auto v = detail::parse_index(f[m]);
    if (!v || *v == 0) throw std::invalid_argument("dims must be positive integers");
    d[m] = *v;
  }
  return d;
}

std::string format_dims(const Dims& d) {
  return std::to_string(d[0]) + "," + std::to_string(d[1]) + "," + std::to_string(d[2]);
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return detail::to_hex(detail::fnv1a64(bytes.data(), bytes.size()));
}

namespace {

fs::path with_suffix(const std::string& prefix, const char* suffix) {
  return fs::path(prefix + suffix);
}

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

LoadedSplit load_experiment_split(const ExperimentConfig& cfg) {
  if (cfg.data_path.empty()) throw std::invalid_argument("no dataset given (--data)");
  const fs::path train = with_suffix(cfg.data_path, ".train");
  const fs::path val = with_suffix(cfg.data_path, ".val");
  const fs::path test = with_suffix(cfg.data_path, ".test");

  LoadedSplit out;
  if (fs::exists(train) && fs::exists(val) && fs::exists(test)) {
    auto tr = load_coo_file(train.string(), cfg.dims);
    auto va = load_coo_file(val.string(), cfg.dims);
    auto te = load_coo_file(test.string(), cfg.dims);
    if (tr.dims() != va.dims() || tr.dims() != te.dims()) {
      throw std::runtime_error("split files disagree on dims; pass --dims or add #dims headers");
    }
    out.split = DatasetSplit{std::move(tr), std::move(va), std::move(te)};
    out.digest = detail::to_hex(detail::fnv1a64(
        (file_digest(train) + file_digest(val) + file_digest(test)).data(), 48));
    out.from_files = true;
    return out;
  }
  if (!fs::is_regular_file(cfg.data_path)) {
    throw std::runtime_error("dataset not found: " + cfg.data_path +
                             " (neither a COO file nor a .train/.val/.test prefix)");
  }
  const SparseTensor3 full = load_coo_file(cfg.data_path, cfg.dims);
  out.split = split(full, cfg.ratios, cfg.seed);
  out.digest = file_digest(cfg.data_path);
  return out;
}

SplitSummary run_split(const ExperimentConfig& cfg) {
  if (cfg.data_path.empty()) throw std::invalid_argument("no dataset given (--data)");
  const SparseTensor3 full = load_coo_file(cfg.data_path, cfg.dims);
  const DatasetSplit parts = split(full, cfg.ratios, cfg.seed);
  ensure_output_dir(cfg.output_dir);
  const fs::path prefix = cfg.output_dir / fs::path(cfg.data_path).stem();
  write_coo_file(prefix.string() + ".train", parts.train);
  write_coo_file(prefix.string() + ".val", parts.validation);
  write_coo_file(prefix.string() + ".test", parts.test);
  write_manifest(cfg.output_dir / "manifest.txt", "split", cfg, file_digest(cfg.data_path),
                 {{"split_prefix", prefix.string()}});
  return {parts.train.size(), parts.validation.size(), parts.test.size(), prefix};
}

TrainOutcome run_train(const ExperimentConfig& cfg) {
  const TrainConfig tc = cfg.train_config();
  LoadedSplit loaded = load_experiment_split(cfg);
  auto [model, report] = train_from(
      init_factors(loaded.split.train.dims(), tc.rank, tc.seed, tc.init_scale), loaded.split, tc);
  if (loaded.split.test.empty()) throw std::runtime_error("test set is empty");
  const MetricReport test = evaluate(model, loaded.split.test, tc.exec);

  ensure_output_dir(cfg.output_dir);
  save_checkpoint_file((cfg.output_dir / "factors.txt").string(), model);
  {
    auto out = open_output(cfg.output_dir / "history.csv");
    write_history_csv(out, report);
  }
  {
    auto out = open_output(cfg.output_dir / "metrics.csv");
    write_metrics_csv(out, test);
  }
  write_manifest(cfg.output_dir / "manifest.txt", "train", cfg, loaded.digest,
                 {{"iterations_run", std::to_string(report.iterations_run)},
                  {"converged", report.converged ? "true" : "false"},
                  {"model_fingerprint", report.model_fingerprint}});
  return {std::move(model), std::move(report), test};
}

double select_best_lambda(const std::vector<SweepRecord>& records) {
  if (records.empty()) throw std::invalid_argument("empty sweep");
  const SweepRecord* best = &records.front();
  for (const SweepRecord& rec : records) {
    if (rec.val_rmse < best->val_rmse ||
        (rec.val_rmse == best->val_rmse && rec.lambda < best->lambda)) {
      best = &rec;
    }
  }
  return best->lambda;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep_grid.empty()) throw std::invalid_argument("sweep grid is empty");
  for (double l : cfg.sweep_grid) {
    if (!(l > 0.0)) throw std::invalid_argument("sweep grid values must be positive");
  }
  LoadedSplit loaded = load_experiment_split(cfg);
  if (loaded.split.validation.empty()) throw std::runtime_error("validation set is empty");

  SweepResult result;
  for (double lambda : cfg.sweep_grid) {
    ExperimentConfig run = cfg;
    run.lambda = lambda;
    const TrainConfig tc = run.train_config();
    auto [model, report] = train_from(
        init_factors(loaded.split.train.dims(), tc.rank, tc.seed, tc.init_scale), loaded.split, tc);
    const MetricReport val = evaluate(model, loaded.split.validation, tc.exec);
    result.records.push_back({lambda, val.rmse, val.mae, report.iterations_run});
  }
  result.best_lambda = select_best_lambda(result.records);

  ensure_output_dir(cfg.output_dir);
  {
    auto out = open_output(cfg.output_dir / "sweep.csv");
    out << "lambda,val_rmse,val_mae,iterations_run\n";
    for (const SweepRecord& rec : result.records) {
      out << detail::format_double(rec.lambda) << ',' << detail::format_double(rec.val_rmse) << ','
          << detail::format_double(rec.val_mae) << ',' << rec.iterations_run << '\n';
    }
  }
  write_manifest(cfg.output_dir / "manifest.txt", "sweep", cfg, loaded.digest,
                 {{"best_lambda", detail::format_double(result.best_lambda)}});
  return result;
}

std::vector<ComparisonRow> run_compare(const ExperimentConfig& cfg) {
  if (cfg.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  LoadedSplit loaded = load_experiment_split(cfg);
  if (loaded.split.test.empty()) throw std::runtime_error("test set is empty");

  const double gamma = cfg.loss.tag == LossTag::Cauchy ? cfg.loss.cauchy_gamma : 1.0;
  const std::vector<ComparisonRow> plan = {
      {"M1", LossKind::hybrid()}, {"M2", LossKind::l2()}, {"M4", LossKind::cauchy(gamma)}};

  std::vector<ComparisonRow> rows;
  for (ComparisonRow row : plan) {
    for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
      ExperimentConfig run = cfg;
      run.loss = row.loss;
      run.seed = cfg.seed + rep;
      const TrainConfig tc = run.train_config();
      auto [model, report] = train_from(
          init_factors(loaded.split.train.dims(), tc.rank, tc.seed, tc.init_scale), loaded.split,
          tc);
      const MetricReport test = evaluate(model, loaded.split.test, tc.exec);
      row.test_rmse += test.rmse;
      row.test_mae += test.mae;
    }
    row.runs = cfg.repeats;
    row.test_rmse /= static_cast<double>(cfg.repeats);
    row.test_mae /= static_cast<double>(cfg.repeats);
    rows.push_back(row);
  }

  ensure_output_dir(cfg.output_dir);
  {
    auto out = open_output(cfg.output_dir / "comparison.csv");
    out << "model,loss,test_rmse,test_mae,runs\n";
    for (const ComparisonRow& row : rows) {
      out << row.model << ',' << loss_tag_name(row.loss.tag) << ','
          << detail::format_double(row.test_rmse) << ',' << detail::format_double(row.test_mae)
          << ',' << row.runs << '\n';
    }
  }
  write_manifest(cfg.output_dir / "manifest.txt", "compare", cfg, loaded.digest);
  return rows;
}

std::size_t run_impute(const fs::path& checkpoint, const fs::path& targets, const fs::path& output) {
  const FactorModel model = load_checkpoint_file(checkpoint.string());
  std::ifstream in(targets);
  if (!in) throw std::runtime_error("cannot open " + targets.string());

  std::vector<EntryIndex> wanted;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto f = detail::split_fields(view);
    if (f.size() != 3 && f.size() != 4) throw ParseError(lineno, "expected i,j,k");
    auto i = detail::parse_index(f[0]);
    auto j = detail::parse_index(f[1]);
    auto k = detail::parse_index(f[2]);
    if (!i || !j || !k) throw ParseError(lineno, "malformed index");
    const Dims& d = model.dims();
    if (*i >= d[0] || *j >= d[1] || *k >= d[2]) throw ParseError(lineno, "target outside model dims");
    wanted.push_back({*i, *j, *k});
  }

  const auto values = impute(model, wanted);
  if (output.has_parent_path()) ensure_output_dir(output.parent_path());
  auto out = open_output(output);
  out << "#dims," << format_dims(model.dims()) << '\n';
  for (const auto& [idx, value] : values) {
    out << idx.i << ',' << idx.j << ',' << idx.k << ',' << detail::format_double(value) << '\n';
  }
  return values.size();
}

MetricReport run_evaluate(const fs::path& checkpoint, const fs::path& holdout,
                          const fs::path& output_dir) {
  const FactorModel model = load_checkpoint_file(checkpoint.string());
  const SparseTensor3 data = load_coo_file(holdout.string(), model.dims());
  const MetricReport report = evaluate(model, data);
  ensure_output_dir(output_dir);
  auto out = open_output(output_dir / "metrics.csv");
  write_metrics_csv(out, report);
  return report;
}

void write_manifest(const fs::path& path, const std::string& command, const ExperimentConfig& cfg,
                    const std::string& digest,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  auto out = open_output(path);
  out << "# " << command << " run\n";
  out << "data = " << cfg.data_path << '\n';
  if (cfg.dims) out << "dims = " << format_dims(*cfg.dims) << '\n';
  out << "ratios = " << format_ratios(cfg.ratios) << '\n';
  out << "rank = " << cfg.rank << '\n';
  out << "loss = " << loss_tag_name(cfg.loss.tag) << '\n';
  out << "gamma = " << detail::format_double(cfg.loss.cauchy_gamma) << '\n';
  if (cfg.sweep) {
    out << "lambda = sweep\n";
    out << "grid = ";
    for (std::size_t n = 0; n < cfg.sweep_grid.size(); ++n) {
      out << (n ? "," : "") << detail::format_double(cfg.sweep_grid[n]);
    }
    out << '\n';
  } else {
    out << "lambda = " << detail::format_double(cfg.lambda) << '\n';
  }
  out << "seed = " << cfg.seed << '\n';
  out << "max-iters = " << cfg.max_iters << '\n';
  out << "tol = " << detail::format_double(cfg.tol) << '\n';
  out << "init-scale = " << detail::format_double(cfg.init_scale) << '\n';
  out << "serial = " << (cfg.exec == Execution::Serial ? "true" : "false") << '\n';
  out << "seeds = " << cfg.repeats << '\n';
  out << "input_digest = " << digest << '\n';
  for (const auto& [key, value] : extra) out << key << " = " << value << '\n';
}

}  // namespace nnlft
