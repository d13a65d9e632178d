#include "nnlft/loss.hpp"

#include <stdexcept>

namespace nnlft {

LossKind LossKind::cauchy(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("cauchy gamma must be positive");
  }
  return {LossTag::Cauchy, gamma};
}

LossTag parse_loss_tag(const std::string& name) {
  if (name == "hybrid") return LossTag::HybridSL1L2;
  if (name == "l2") return LossTag::L2;
  if (name == "cauchy") return LossTag::Cauchy;
  throw std::invalid_argument("unknown loss kind: " + name);
}

const char* loss_tag_name(LossTag tag) {
  switch (tag) {
    case LossTag::HybridSL1L2: return "hybrid";
    case LossTag::L2: return "l2";
    case LossTag::Cauchy: return "cauchy";
  }
  return "?";
}

namespace {

inline double regularizer_unchecked(const FactorModel& m, const EntryIndex& e) {
  const double* s = m.sensors().row(e.i).data();
  const double* d = m.days().row(e.j).data();
  const double* t = m.times().row(e.k).data();
  double sum = 0.0;
  for (std::size_t r = 0; r < m.rank(); ++r) sum += s[r] * s[r] + d[r] * d[r] + t[r] * t[r];
  return sum;
}

inline double entry_term(const FactorModel& m, const Entry& e, double lambda,
                         const LossKind& kind) {
  const double delta = residual(e.value, predict_unchecked(m, e.index));
  double term = loss_element(delta, kind);
  if (lambda != 0.0) term += lambda * regularizer_unchecked(m, e.index);
  return term;
}

}  // namespace

double regularizer(const FactorModel& m, const EntryIndex& entry) {
  const Dims& d = m.dims();
  if (entry.i >= d[0] || entry.j >= d[1] || entry.k >= d[2]) {
    throw std::out_of_range("regularizer index outside model dims");
  }
  return regularizer_unchecked(m, entry);
}

double objective(const FactorModel& m, const SparseTensor3& entries, double lambda,
                 const LossKind& kind, Execution exec) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (entries.dims() != m.dims()) throw std::invalid_argument("entry set dims do not match model");
  const auto data = entries.entries();
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  double total = 0.0;
  if (exec == Execution::Parallel) {
#pragma omp parallel for reduction(+ : total) schedule(static)
    for (std::ptrdiff_t p = 0; p < n; ++p) total += entry_term(m, data[p], lambda, kind);
  } else {
    for (std::ptrdiff_t p = 0; p < n; ++p) total += entry_term(m, data[p], lambda, kind);
  }
  return total;
}

}  // namespace nnlft
