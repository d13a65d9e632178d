#pragma once

#include <cstddef>
#include <iosfwd>

#include "nnlft/factor_model.hpp"
#include "nnlft/loss.hpp"
#include "nnlft/sparse_tensor.hpp"

namespace nnlft {

struct MetricReport {
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t count = 0;
};

/// RMSE and MAE of the model's predictions over a held-out entry set.
/// Throws std::invalid_argument on an empty holdout.
MetricReport evaluate(const FactorModel& m, const SparseTensor3& holdout,
                      Execution exec = Execution::Parallel);

/// `metric,value` rows: rmse, mae, count.
void write_metrics_csv(std::ostream& out, const MetricReport& report);

}  // namespace nnlft
