#include "nnlft/metrics.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "text_util.hpp"

namespace nnlft {

MetricReport evaluate(const FactorModel& m, const SparseTensor3& holdout, Execution exec) {
  if (holdout.empty()) throw std::invalid_argument("cannot evaluate on an empty holdout set");
  if (holdout.dims() != m.dims()) throw std::invalid_argument("holdout dims do not match model");
  const auto data = holdout.entries();
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  double sq = 0.0;
  double abs = 0.0;
  if (exec == Execution::Parallel) {
#pragma omp parallel for reduction(+ : sq, abs) schedule(static)
    for (std::ptrdiff_t p = 0; p < n; ++p) {
      const double delta = residual(data[p].value, predict_unchecked(m, data[p].index));
      sq += delta * delta;
      abs += std::abs(delta);
    }
  } else {
    for (std::ptrdiff_t p = 0; p < n; ++p) {
      const double delta = residual(data[p].value, predict_unchecked(m, data[p].index));
      sq += delta * delta;
      abs += std::abs(delta);
    }
  }
  const double count = static_cast<double>(data.size());
  return MetricReport{std::sqrt(sq / count), abs / count, data.size()};
}

void write_metrics_csv(std::ostream& out, const MetricReport& report) {
  out << "metric,value\n";
  out << "rmse," << detail::format_double(report.rmse) << '\n';
  out << "mae," << detail::format_double(report.mae) << '\n';
  out << "count," << report.count << '\n';
}

}  // namespace nnlft
