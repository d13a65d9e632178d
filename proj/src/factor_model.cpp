#include "nnlft/factor_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include "text_util.hpp"

namespace nnlft {

FactorModel::FactorModel(Dims dims, std::size_t rank) : dims_(dims), rank_(rank) {
  if (rank == 0) throw std::invalid_argument("rank must be >= 1");
  for (Mode mode : kAllModes) {
    factors_[static_cast<int>(mode)] = FactorMatrix(dims_[static_cast<int>(mode)], rank);
  }
}

bool FactorModel::is_nonnegative() const {
  for (const auto& f : factors_) {
    for (double v : f.data()) {
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
    }
  }
  return true;
}

FactorModel init_factors(Dims dims, std::size_t rank, std::uint64_t seed, double scale) {
  if (rank < 1) throw std::invalid_argument("rank must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("init scale must be positive");
  }
  FactorModel m(dims, rank);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Mode mode : kAllModes) {
    // 1 - u maps [0, 1) onto (0, 1].
    for (double& v : m.factor(mode).data()) v = scale * (1.0 - unit(rng));
  }
  return m;
}

double predict(const FactorModel& m, const EntryIndex& idx) {
  const Dims& d = m.dims();
  if (idx.i >= d[0] || idx.j >= d[1] || idx.k >= d[2]) {
    throw std::out_of_range("prediction index outside model dims");
  }
  return predict_unchecked(m, idx);
}

std::vector<std::pair<EntryIndex, double>> impute(const FactorModel& m,
                                                  std::span<const EntryIndex> targets) {
  std::vector<std::pair<EntryIndex, double>> out;
  out.reserve(targets.size());
  for (const EntryIndex& idx : targets) out.emplace_back(idx, predict(m, idx));
  return out;
}

void save_checkpoint(std::ostream& out, const FactorModel& m) {
  const Dims& d = m.dims();
  out << "#factors," << d[0] << ',' << d[1] << ',' << d[2] << ',' << m.rank() << '\n';
  const char* tags[3] = {"#S", "#D", "#T"};
  for (Mode mode : kAllModes) {
    out << tags[static_cast<int>(mode)] << '\n';
    const FactorMatrix& f = m.factor(mode);
    for (std::size_t r = 0; r < f.rows(); ++r) {
      auto row = f.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << ',';
        out << detail::format_double(row[c]);
      }
      out << '\n';
    }
  }
}

void save_checkpoint_file(const std::string& path, const FactorModel& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_checkpoint(out, m);
  if (!out) throw std::runtime_error("write failed: " + path);
}

FactorModel load_checkpoint(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::string_view {
    while (std::getline(in, line)) {
      ++lineno;
      auto v = detail::trim(line);
      if (!v.empty()) return v;
    }
    throw ParseError(lineno, "unexpected end of checkpoint");
  };

  auto header = detail::split_fields(next());
  if (header.size() != 5 || header[0] != "#factors") {
    throw ParseError(lineno, "expected #factors,I,J,K,R header");
  }
  std::size_t vals[4];
  for (int n = 0; n < 4; ++n) {
    auto v = detail::parse_index(header[n + 1]);
    if (!v || *v == 0) throw ParseError(lineno, "malformed #factors header");
    vals[n] = *v;
  }
  FactorModel m({vals[0], vals[1], vals[2]}, vals[3]);
  const char* tags[3] = {"#S", "#D", "#T"};
  for (Mode mode : kAllModes) {
    if (next() != tags[static_cast<int>(mode)]) {
      throw ParseError(lineno, std::string("expected ") + tags[static_cast<int>(mode)]);
    }
    FactorMatrix& f = m.factor(mode);
    for (std::size_t r = 0; r < f.rows(); ++r) {
      auto fields = detail::split_fields(next());
      if (fields.size() != m.rank()) throw ParseError(lineno, "wrong number of columns");
      for (std::size_t c = 0; c < fields.size(); ++c) {
        auto v = detail::parse_double(fields[c]);
        if (!v || !std::isfinite(*v) || *v < 0.0) {
          throw ParseError(lineno, "factor values must be finite and nonnegative");
        }
        f(r, c) = *v;
      }
    }
  }
  return m;
}

FactorModel load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace nnlft
