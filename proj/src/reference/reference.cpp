#include "nnlft/reference.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace nnlft::reference {

namespace {

double prediction(const FactorModel& m, const EntryIndex& idx) {
  double sum = 0.0;
  for (std::size_t r = 0; r < m.rank(); ++r) {
    sum += m.sensors()(idx.i, r) * m.days()(idx.j, r) * m.times()(idx.k, r);
  }
  return sum;
}

// Product of the two factors not being updated, at column r.
double other_product(const FactorModel& m, Mode mode, const EntryIndex& idx, std::size_t r) {
  const double s = m.sensors()(idx.i, r);
  const double d = m.days()(idx.j, r);
  const double t = m.times()(idx.k, r);
  switch (mode) {
    case Mode::Sensor: return d * t;
    case Mode::Day: return s * t;
    case Mode::Time: return s * d;
  }
  return 0.0;
}

}  // namespace

void update_mode(FactorModel& m, const SparseTensor3& train, double lambda, Mode mode,
                 const LossKind& kind, double denom_guard) {
  const FactorModel before = m;
  std::vector<double> yhat;
  for (const Entry& e : train.entries()) yhat.push_back(prediction(before, e.index));

  FactorMatrix& target = m.factor(mode);
  const FactorMatrix& old = before.factor(mode);
  for (std::size_t row = 0; row < target.rows(); ++row) {
    for (std::size_t r = 0; r < m.rank(); ++r) {
      const double x = old(row, r);
      double numerator = 0.0;
      double denominator = 0.0;
      bool touched = false;
      for (std::size_t p = 0; p < train.size(); ++p) {
        const Entry& e = train[p];
        if (e.index.along(mode) != row) continue;
        touched = true;
        const double y = e.value;
        const double yh = yhat[p];
        const double dt = other_product(before, mode, e.index, r);
        const double delta = y - yh;
        switch (kind.tag) {
          case LossTag::HybridSL1L2:
            if (delta < -1.0) {
              numerator += 2.0 * y * dt;
              denominator += dt + 2.0 * yh * dt + 2.0 * lambda * x;
            } else if (std::abs(delta) <= 1.0) {
              numerator += 4.0 * y * dt;
              denominator += 4.0 * yh * dt + 2.0 * lambda * x;
            } else {
              numerator += dt + 2.0 * y * dt;
              denominator += 2.0 * yh * dt + 2.0 * lambda * x;
            }
            break;
          case LossTag::L2:
            numerator += y * dt;
            denominator += yh * dt + lambda * x;
            break;
          case LossTag::Cauchy: {
            const double g2 = kind.cauchy_gamma * kind.cauchy_gamma;
            const double w = g2 / (g2 + delta * delta);
            numerator += w * y * dt;
            denominator += w * yh * dt + lambda * x;
            break;
          }
        }
      }
      if (touched) target(row, r) = x * numerator / (denominator + denom_guard);
    }
  }
}

double objective(const FactorModel& m, const SparseTensor3& entries, double lambda,
                 const LossKind& kind) {
  double total = 0.0;
  for (const Entry& e : entries.entries()) {
    const double delta = e.value - prediction(m, e.index);
    double loss = 0.0;
    switch (kind.tag) {
      case LossTag::HybridSL1L2:
        loss = std::abs(delta) <= 1.0 ? 2.0 * delta * delta : std::abs(delta) + delta * delta;
        break;
      case LossTag::L2:
        loss = delta * delta;
        break;
      case LossTag::Cauchy: {
        const double g = kind.cauchy_gamma;
        loss = g * g * std::log(1.0 + (delta / g) * (delta / g));
        break;
      }
    }
    double reg = 0.0;
    for (std::size_t r = 0; r < m.rank(); ++r) {
      reg += std::pow(m.sensors()(e.index.i, r), 2) + std::pow(m.days()(e.index.j, r), 2) +
             std::pow(m.times()(e.index.k, r), 2);
    }
    total += loss + lambda * reg;
  }
  return total;
}

MetricReport evaluate(const FactorModel& m, const SparseTensor3& holdout) {
  if (holdout.empty()) throw std::invalid_argument("empty holdout");
  std::vector<double> predicted;
  for (const Entry& e : holdout.entries()) predicted.push_back(prediction(m, e.index));
  double sq = 0.0;
  for (std::size_t p = 0; p < holdout.size(); ++p) {
    sq += (holdout[p].value - predicted[p]) * (holdout[p].value - predicted[p]);
  }
  double abs = 0.0;
  for (std::size_t p = 0; p < holdout.size(); ++p) abs += std::abs(holdout[p].value - predicted[p]);
  const double n = static_cast<double>(holdout.size());
  return {std::sqrt(sq / n), abs / n, holdout.size()};
}

}  // namespace nnlft::reference
