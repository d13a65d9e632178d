// Command-line driver: split, train, sweep, impute, evaluate, compare.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nnlft/experiment.hpp"

namespace {

struct CliOptions {
  std::string data;
  std::vector<std::size_t> dims;
  std::string ratios = "10:20:70";
  std::size_t rank = nnlft::kDefaultRank;
  std::string loss = "hybrid";
  std::string lambda = "0.0009765625";
  std::vector<double> grid;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_iters = nnlft::kDefaultMaxIters;
  double tol = nnlft::kDefaultTol;
  double init_scale = nnlft::kDefaultInitScale;
  bool serial = false;
  std::size_t seeds = 1;
  std::string out = ".";
  std::string checkpoint;
  std::string targets;
};

nnlft::ExperimentConfig to_config(const CliOptions& o) {
  nnlft::ExperimentConfig cfg;
  cfg.data_path = o.data;
  if (!o.dims.empty()) {
    if (o.dims[0] == 0 || o.dims[1] == 0 || o.dims[2] == 0)
      throw std::invalid_argument("dims must be positive integers");
    cfg.dims = nnlft::Dims{o.dims[0], o.dims[1], o.dims[2]};
  }
  cfg.ratios = nnlft::parse_ratios(o.ratios);
  cfg.rank = o.rank;
  const nnlft::LossTag tag = nnlft::parse_loss_tag(o.loss);
  cfg.loss = tag == nnlft::LossTag::Cauchy ? nnlft::LossKind::cauchy(o.gamma)
                                           : nnlft::LossKind{tag, o.gamma};
  if (!(o.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (o.lambda == "sweep") {
    cfg.sweep = true;
  } else {
    std::size_t used = 0;
    cfg.lambda = std::stod(o.lambda, &used);
    if (used != o.lambda.size()) throw std::invalid_argument("malformed lambda: " + o.lambda);
    if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  }
  if (!o.grid.empty()) cfg.sweep_grid = o.grid;
  cfg.seed = o.seed;
  cfg.max_iters = o.max_iters;
  cfg.tol = o.tol;
  cfg.init_scale = o.init_scale;
  cfg.exec = o.serial ? nnlft::Execution::Serial : nnlft::Execution::Parallel;
  cfg.repeats = o.seeds;
  cfg.output_dir = o.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonnegative latent factorization of sparse sensor-day-time tensors"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
  app.allow_config_extras(true);

  CliOptions o;
  app.add_option("--data", o.data, "COO file, or prefix of .train/.val/.test split files");
  app.add_option("--dims", o.dims, "Tensor dims I,J,K (default: #dims header or inferred)")
      ->expected(3)
      ->delimiter(',');
  app.add_option("--ratios", o.ratios, "Split percentages train:val:test")->capture_default_str();
  app.add_option("--rank", o.rank, "Latent rank R")->capture_default_str();
  app.add_option("--loss", o.loss, "Loss kind")
      ->check(CLI::IsMember({"hybrid", "l2", "cauchy"}))
      ->capture_default_str();
  app.add_option("--lambda", o.lambda, "Regularization weight, or 'sweep'")->capture_default_str();
  app.add_option("--grid", o.grid, "Sweep grid (default 2^0 .. 2^-20)")->delimiter(',');
  app.add_option("--gamma", o.gamma, "Cauchy scale")->capture_default_str();
  app.add_option("--seed", o.seed, "Split and initialization seed")->capture_default_str();
  app.add_option("--max-iters", o.max_iters, "Iteration cap")->capture_default_str();
  app.add_option("--tol", o.tol, "Convergence tolerance on the training objective")
      ->capture_default_str();
  app.add_option("--init-scale", o.init_scale, "Initial factors uniform on (0, scale]")
      ->capture_default_str();
  app.add_flag("--serial", o.serial, "Single-threaded, bit-reproducible execution");
  app.add_option("--seeds", o.seeds, "compare: number of training seeds to average")
      ->capture_default_str();
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--checkpoint", o.checkpoint, "Factor checkpoint (default <out>/factors.txt)");
  app.add_option("--targets", o.targets, "impute: file of i,j,k targets");

  auto* split_cmd = app.add_subcommand("split", "Partition a COO file into train/val/test files");
  auto* train_cmd = app.add_subcommand("train", "Train with a fixed lambda");
  auto* sweep_cmd = app.add_subcommand("sweep", "Train over a lambda grid, select on validation RMSE");
  auto* impute_cmd = app.add_subcommand("impute", "Predict values for target indices");
  auto* eval_cmd = app.add_subcommand("evaluate", "RMSE/MAE of a checkpoint on a COO holdout");
  auto* compare_cmd = app.add_subcommand("compare", "Tabulate test metrics for M1/M2/M4 losses");
  for (auto* sub : {split_cmd, train_cmd, sweep_cmd, impute_cmd, eval_cmd, compare_cmd}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    nnlft::ExperimentConfig cfg = to_config(o);
    const std::filesystem::path checkpoint =
        o.checkpoint.empty() ? cfg.output_dir / "factors.txt" : std::filesystem::path(o.checkpoint);

    if (split_cmd->parsed()) {
      const auto s = nnlft::run_split(cfg);
      std::cout << "train " << s.train << "\nval " << s.validation << "\ntest " << s.test << '\n';
      std::cout << "wrote " << s.prefix.string() << ".{train,val,test}\n";
    } else if (train_cmd->parsed()) {
      if (cfg.sweep) throw std::invalid_argument("train needs a numeric --lambda; use sweep");
      const auto res = nnlft::run_train(cfg);
      std::cout << "iterations " << res.report.iterations_run
                << (res.report.converged ? " (converged)" : " (iteration cap)") << '\n';
      std::cout << "test rmse " << res.test.rmse << "\ntest mae " << res.test.mae << '\n';
    } else if (sweep_cmd->parsed()) {
      cfg.sweep = true;
      const auto res = nnlft::run_sweep(cfg);
      for (const auto& rec : res.records) {
        std::cout << "lambda " << rec.lambda << " val_rmse " << rec.val_rmse << '\n';
      }
      std::cout << "best_lambda " << res.best_lambda << '\n';
    } else if (impute_cmd->parsed()) {
      if (o.targets.empty()) throw std::invalid_argument("impute needs --targets");
      const auto n = nnlft::run_impute(checkpoint, o.targets, cfg.output_dir / "imputed.coo");
      std::cout << "imputed " << n << " entries\n";
    } else if (eval_cmd->parsed()) {
      if (cfg.data_path.empty()) throw std::invalid_argument("evaluate needs --data");
      const auto m = nnlft::run_evaluate(checkpoint, cfg.data_path, cfg.output_dir);
      std::cout << "rmse " << m.rmse << "\nmae " << m.mae << "\ncount " << m.count << '\n';
    } else if (compare_cmd->parsed()) {
      if (cfg.sweep) throw std::invalid_argument("compare needs a numeric --lambda");
      for (const auto& row : nnlft::run_compare(cfg)) {
        std::cout << row.model << ' ' << nnlft::loss_tag_name(row.loss.tag) << " rmse "
                  << row.test_rmse << " mae " << row.test_mae << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
