#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nnlft/factor_model.hpp"
#include "nnlft/loss.hpp"
#include "nnlft/reference.hpp"
#include "nnlft/sparse_tensor.hpp"

namespace nnlft::fixtures {

/// Random model with every element uniform on (lo, hi].
inline FactorModel random_model(Dims dims, std::size_t rank, std::mt19937_64& rng, double lo = 0.0,
                                double hi = 1.0) {
  FactorModel m(dims, rank);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Mode mode : kAllModes) {
    for (double& v : m.factor(mode).data()) v = lo + (hi - lo) * (1.0 - u(rng));
  }
  return m;
}

/// Observes each cell independently with probability `density`; values
/// uniform on [lo, hi).
inline SparseTensor3 random_tensor(Dims dims, double density, std::mt19937_64& rng,
                                   double lo = 0.0, double hi = 5.0) {
  std::bernoulli_distribution keep(density);
  std::uniform_real_distribution<double> val(lo, hi);
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < dims[0]; ++i)
    for (std::size_t j = 0; j < dims[1]; ++j)
      for (std::size_t k = 0; k < dims[2]; ++k)
        if (keep(rng)) entries.push_back({{i, j, k}, val(rng)});
  return SparseTensor3(dims, std::move(entries));
}

/// Cells with probability `density`, valued exactly by `truth`.
inline SparseTensor3 sample_model(const FactorModel& truth, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(density);
  const Dims& dims = truth.dims();
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < dims[0]; ++i)
    for (std::size_t j = 0; j < dims[1]; ++j)
      for (std::size_t k = 0; k < dims[2]; ++k)
        if (keep(rng)) entries.push_back({{i, j, k}, predict(truth, {i, j, k})});
  return SparseTensor3(dims, std::move(entries));
}

/// Central finite difference of the reference objective in one factor element.
inline double finite_difference(const FactorModel& m, const SparseTensor3& data, double lambda,
                                const LossKind& kind, Mode mode, std::size_t row, std::size_t col,
                                double step = 1e-6) {
  FactorModel plus = m;
  FactorModel minus = m;
  plus.factor(mode)(row, col) += step;
  minus.factor(mode)(row, col) -= step;
  return (reference::objective(plus, data, lambda, kind) -
          reference::objective(minus, data, lambda, kind)) /
         (2.0 * step);
}

/// Smallest distance of any residual magnitude from the hybrid branch point 1.
inline double branch_margin(const FactorModel& m, const SparseTensor3& data) {
  double margin = INFINITY;
  for (const Entry& e : data.entries()) {
    margin = std::min(margin, std::abs(std::abs(e.value - predict(m, e.index)) - 1.0));
  }
  return margin;
}

inline double relative_error(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Largest relative element-wise difference between two models.
inline double max_relative_diff(const FactorModel& a, const FactorModel& b) {
  double worst = 0.0;
  for (Mode mode : kAllModes) {
    const auto x = a.factor(mode).data();
    const auto y = b.factor(mode).data();
    for (std::size_t n = 0; n < x.size(); ++n) {
      if (x[n] == y[n]) continue;
      worst = std::max(worst, relative_error(x[n], y[n]));
    }
  }
  return worst;
}

}  // namespace nnlft::fixtures
