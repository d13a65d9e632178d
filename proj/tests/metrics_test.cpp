#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nnlft/metrics.hpp"
#include "test_support.hpp"

using namespace nnlft;

namespace {

// Rank-1 model over a 1 x 1 x n tensor whose predictions equal `preds`.
FactorModel model_predicting(const std::vector<double>& preds) {
  FactorModel m({1, 1, preds.size()}, 1);
  m.factor(Mode::Sensor)(0, 0) = 1.0;
  m.factor(Mode::Day)(0, 0) = 1.0;
  for (std::size_t k = 0; k < preds.size(); ++k) m.factor(Mode::Time)(k, 0) = preds[k];
  return m;
}

SparseTensor3 truths(const std::vector<double>& values) {
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < values.size(); ++k) entries.push_back({{0, 0, k}, values[k]});
  return SparseTensor3({1, 1, values.size()}, entries);
}

}  // namespace

TEST(Evaluate, HandValues) {
  const MetricReport perfect = evaluate(model_predicting({1, 2, 3}), truths({1, 2, 3}));
  EXPECT_EQ(perfect.rmse, 0.0);
  EXPECT_EQ(perfect.mae, 0.0);
  EXPECT_EQ(perfect.count, 3u);

  const MetricReport unit = evaluate(model_predicting({1, 1}), truths({0, 2}));
  EXPECT_EQ(unit.rmse, 1.0);
  EXPECT_EQ(unit.mae, 1.0);

  const MetricReport skew = evaluate(model_predicting({0, 0}), truths({0, 3}));
  EXPECT_EQ(skew.mae, 1.5);
  EXPECT_DOUBLE_EQ(skew.rmse, std::sqrt(4.5));
  EXPECT_NEAR(skew.rmse, 2.1213, 1e-4);
}

TEST(Evaluate, EmptyHoldoutIsAnError) {
  EXPECT_THROW(evaluate(model_predicting({1}), SparseTensor3({1, 1, 1}, {})), std::invalid_argument);
}

TEST(Evaluate, RandomizedAgainstReference) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 80.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(1 + trial * 3), y(p.size());
    for (std::size_t n = 0; n < p.size(); ++n) {
      p[n] = u(rng);
      y[n] = u(rng);
    }
    const FactorModel m = model_predicting(p);
    const SparseTensor3 t = truths(y);
    const MetricReport got = evaluate(m, t, Execution::Serial);
    const MetricReport par = evaluate(m, t, Execution::Parallel);
    const MetricReport ref = reference::evaluate(m, t);
    EXPECT_LE(fixtures::relative_error(got.rmse, ref.rmse), 1e-12);
    EXPECT_LE(fixtures::relative_error(got.mae, ref.mae), 1e-12);
    EXPECT_LE(fixtures::relative_error(got.rmse, par.rmse), 1e-9);
    EXPECT_LE(got.mae, got.rmse);
  }
}

TEST(Evaluate, ScaleEquivariant) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> p(50), y(50);
  for (std::size_t n = 0; n < 50; ++n) {
    p[n] = u(rng);
    y[n] = u(rng);
  }
  const MetricReport base = evaluate(model_predicting(p), truths(y));
  for (double c : {0.5, 3.0, 1024.0}) {
    std::vector<double> pc(p), yc(y);
    for (auto& v : pc) v *= c;
    for (auto& v : yc) v *= c;
    const MetricReport scaled = evaluate(model_predicting(pc), truths(yc));
    EXPECT_NEAR(scaled.rmse, c * base.rmse, 1e-12 * c * base.rmse);
    EXPECT_NEAR(scaled.mae, c * base.mae, 1e-12 * c * base.mae);
  }
}

TEST(Evaluate, CsvRows) {
  std::ostringstream out;
  write_metrics_csv(out, {1.5, 0.25, 4});
  EXPECT_EQ(out.str(), "metric,value\nrmse,1.5\nmae,0.25\ncount,4\n");
}
