#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nnlft/sparse_tensor.hpp"

namespace nnlft {

inline constexpr std::size_t kDefaultRank = 20;
inline constexpr double kDefaultInitScale = 0.1;

/// Dense row-major rows x rank matrix of latent factors.
class FactorMatrix {
 public:
  FactorMatrix() = default;
  FactorMatrix(std::size_t rows, std::size_t rank, double fill = 0.0)
      : rows_(rows), rank_(rank), data_(rows * rank, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t rank() const { return rank_; }

  double operator()(std::size_t row, std::size_t col) const { return data_[row * rank_ + col]; }
  double& operator()(std::size_t row, std::size_t col) { return data_[row * rank_ + col]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * rank_, rank_);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * rank_, rank_); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  friend bool operator==(const FactorMatrix&, const FactorMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t rank_ = 0;
  std::vector<double> data_;
};

/**
 * Nonnegative CP model: sensor factors S (|I| x R), day factors D (|J| x R)
 * and time factors T (|K| x R). The completed tensor is never stored; each
 * element is the sum over r of S(i,r) D(j,r) T(k,r).
 */
class FactorModel {
 public:
  FactorModel() = default;
  FactorModel(Dims dims, std::size_t rank);

  std::size_t rank() const { return rank_; }
  const Dims& dims() const { return dims_; }

  const FactorMatrix& factor(Mode mode) const { return factors_[static_cast<int>(mode)]; }
  FactorMatrix& factor(Mode mode) { return factors_[static_cast<int>(mode)]; }

  const FactorMatrix& sensors() const { return factor(Mode::Sensor); }
  const FactorMatrix& days() const { return factor(Mode::Day); }
  const FactorMatrix& times() const { return factor(Mode::Time); }

  /// Every element finite and >= 0.
  bool is_nonnegative() const;

  friend bool operator==(const FactorModel&, const FactorModel&) = default;

 private:
  Dims dims_{0, 0, 0};
  std::size_t rank_ = 0;
  std::array<FactorMatrix, 3> factors_;
};

/// Every element drawn i.i.d. uniform on (0, scale]. Deterministic in `seed`.
FactorModel init_factors(Dims dims, std::size_t rank, std::uint64_t seed,
                         double scale = kDefaultInitScale);

/// Sum over columns 0..R-1 in ascending order, without bounds checks.
inline double predict_unchecked(const FactorModel& m, const EntryIndex& idx) {
  const double* s = m.sensors().row(idx.i).data();
  const double* d = m.days().row(idx.j).data();
  const double* t = m.times().row(idx.k).data();
  double sum = 0.0;
  for (std::size_t r = 0; r < m.rank(); ++r) sum += s[r] * d[r] * t[r];
  return sum;
}

/// Throws std::out_of_range when `idx` lies outside the model dims.
double predict(const FactorModel& m, const EntryIndex& idx);

inline double residual(double y, double yhat) { return y - yhat; }

std::vector<std::pair<EntryIndex, double>> impute(const FactorModel& m,
                                                  std::span<const EntryIndex> targets);

// Checkpoint text format: "#factors,I,J,K,R", then "#S", "#D", "#T" sections
// with one comma-separated row per line. Values round-trip bit-exactly.
void save_checkpoint(std::ostream& out, const FactorModel& m);
void save_checkpoint_file(const std::string& path, const FactorModel& m);
FactorModel load_checkpoint(std::istream& in);
FactorModel load_checkpoint_file(const std::string& path);

}  // namespace nnlft
