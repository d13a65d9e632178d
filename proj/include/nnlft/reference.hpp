#pragma once

// Serial reference implementations, written for clarity rather than speed.
// They loop over every observed entry and apply the update and loss formulas
// term by term. Linked by the tests and the benchmark only.

#include "nnlft/factor_model.hpp"
#include "nnlft/loss.hpp"
#include "nnlft/metrics.hpp"
#include "nnlft/sparse_tensor.hpp"

namespace nnlft::reference {

/// Literal per-entry multiplicative update of one factor matrix. Scans all
/// training entries for every (row, column) pair; residuals are taken from
/// the factors as they stand on entry.
void update_mode(FactorModel& m, const SparseTensor3& train, double lambda, Mode mode,
                 const LossKind& kind, double denom_guard);

double objective(const FactorModel& m, const SparseTensor3& entries, double lambda,
                 const LossKind& kind);

/// Two passes: predictions first, then squared and absolute errors.
MetricReport evaluate(const FactorModel& m, const SparseTensor3& holdout);

}  // namespace nnlft::reference
