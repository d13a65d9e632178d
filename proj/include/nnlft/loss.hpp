#pragma once

#include <cmath>
#include <string>

#include "nnlft/factor_model.hpp"
#include "nnlft/sparse_tensor.hpp"

namespace nnlft {

/// Serial kernels sum in stored order and are bit-reproducible. Parallel
/// kernels use OpenMP; reductions may differ from serial in the last bits.
enum class Execution { Serial, Parallel };

enum class LossTag { HybridSL1L2, L2, Cauchy };

struct LossKind {
  LossTag tag = LossTag::HybridSL1L2;
  double cauchy_gamma = 1.0;

  static LossKind hybrid() { return {LossTag::HybridSL1L2, 1.0}; }
  static LossKind l2() { return {LossTag::L2, 1.0}; }
  static LossKind cauchy(double gamma = 1.0);
};

/// "hybrid", "l2" or "cauchy".
LossTag parse_loss_tag(const std::string& name);
const char* loss_tag_name(LossTag tag);

/// Smooth L1: delta^2 inside [-1, 1], |delta| outside.
inline double sl1_element(double delta) {
  const double a = std::abs(delta);
  return a <= 1.0 ? delta * delta : a;
}

/// SL1 plus squared residual, written piecewise: 2 delta^2 for |delta| <= 1,
/// |delta| + delta^2 beyond.
inline double hybrid_element(double delta) {
  const double a = std::abs(delta);
  return a <= 1.0 ? 2.0 * delta * delta : a + delta * delta;
}

/// gamma^2 log(1 + (delta/gamma)^2). Tends to delta^2 as gamma grows.
inline double cauchy_element(double delta, double gamma) {
  const double z = delta / gamma;
  return gamma * gamma * std::log1p(z * z);
}

inline double loss_element(double delta, const LossKind& kind) {
  switch (kind.tag) {
    case LossTag::HybridSL1L2: return hybrid_element(delta);
    case LossTag::L2: return delta * delta;
    case LossTag::Cauchy: return cauchy_element(delta, kind.cauchy_gamma);
  }
  return 0.0;
}

/// Unscaled Tikhonov term for one entry: sum over r of S(i,r)^2 + D(j,r)^2 + T(k,r)^2.
double regularizer(const FactorModel& m, const EntryIndex& entry);

/// Sum over entries of loss_element(y - yhat) + lambda * regularizer(entry).
/// The regularizer is charged once per observed entry.
double objective(const FactorModel& m, const SparseTensor3& entries, double lambda,
                 const LossKind& kind, Execution exec = Execution::Parallel);

}  // namespace nnlft
