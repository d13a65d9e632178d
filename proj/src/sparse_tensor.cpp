#include "nnlft/sparse_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "text_util.hpp"

namespace nnlft {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::Sensor: return "sensor";
    case Mode::Day: return "day";
    case Mode::Time: return "time";
  }
  return "?";
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

SparseTensor3::SparseTensor3(Dims dims, std::vector<Entry> entries)
    : dims_(dims), entries_(std::move(entries)) {
  for (std::size_t d : dims_) {
    if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
  }
  for (const Entry& e : entries_) {
    if (e.index.i >= dims_[0] || e.index.j >= dims_[1] || e.index.k >= dims_[2]) {
      throw std::invalid_argument("entry index out of range");
    }
    if (!std::isfinite(e.value) || e.value < 0.0) {
      throw std::invalid_argument("entry values must be finite and nonnegative");
    }
  }
  std::vector<EntryIndex> keys(entries_.size());
  std::transform(entries_.begin(), entries_.end(), keys.begin(),
                 [](const Entry& e) { return e.index; });
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
    throw std::invalid_argument("duplicate entry index");
  }
  build_index();
}

void SparseTensor3::build_index() {
  for (Mode mode : kAllModes) {
    auto& idx = index_[static_cast<int>(mode)];
    const std::size_t n = dim(mode);
    idx.offsets.assign(n + 1, 0);
    for (const Entry& e : entries_) ++idx.offsets[e.index.along(mode) + 1];
    std::partial_sum(idx.offsets.begin(), idx.offsets.end(), idx.offsets.begin());
    idx.positions.resize(entries_.size());
    std::vector<std::size_t> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
    for (std::size_t p = 0; p < entries_.size(); ++p) {
      idx.positions[cursor[entries_[p].index.along(mode)]++] = p;
    }
  }
}

std::span<const std::size_t> SparseTensor3::slice_positions(Mode mode, std::size_t index) const {
  if (index >= dim(mode)) {
    throw std::out_of_range(std::string("slice index out of range for mode ") + mode_name(mode));
  }
  const auto& idx = index_[static_cast<int>(mode)];
  return std::span<const std::size_t>(idx.positions)
      .subspan(idx.offsets[index], idx.offsets[index + 1] - idx.offsets[index]);
}

double SparseTensor3::mean_value() const {
  if (entries_.empty()) return 0.0;
  double sum = 0.0;
  for (const Entry& e : entries_) sum += e.value;
  return sum / static_cast<double>(entries_.size());
}

std::vector<Entry> mode_slice(const SparseTensor3& t, Mode mode, std::size_t index) {
  std::vector<Entry> out;
  for (std::size_t p : t.slice_positions(mode, index)) out.push_back(t[p]);
  return out;
}

SparseTensor3 load_coo(std::istream& in, std::optional<Dims> dims) {
  std::vector<Entry> entries;
  std::vector<std::size_t> lines;
  std::optional<Dims> header_dims;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (view.starts_with("#dims")) {
        auto f = detail::split_fields(view);
        if (f.size() != 4) throw ParseError(lineno, "malformed #dims header");
        Dims d{};
        for (int m = 0; m < 3; ++m) {
          auto v = detail::parse_index(f[m + 1]);
          if (!v || *v == 0) throw ParseError(lineno, "malformed #dims header");
          d[m] = *v;
        }
        header_dims = d;
      }
      continue;
    }
    auto f = detail::split_fields(view);
    if (f.size() != 4) throw ParseError(lineno, "expected i,j,k,value");
    auto i = detail::parse_index(f[0]);
    auto j = detail::parse_index(f[1]);
    auto k = detail::parse_index(f[2]);
    auto v = detail::parse_double(f[3]);
    if (!i || !j || !k) throw ParseError(lineno, "malformed index");
    if (!v || !std::isfinite(*v)) throw ParseError(lineno, "malformed value");
    if (*v < 0.0) throw ParseError(lineno, "negative value");
    entries.push_back({{*i, *j, *k}, *v});
    lines.push_back(lineno);
  }

  Dims resolved{1, 1, 1};
  if (dims) {
    resolved = *dims;
  } else if (header_dims) {
    resolved = *header_dims;
  } else {
    resolved = {0, 0, 0};
    for (const Entry& e : entries) {
      resolved[0] = std::max(resolved[0], e.index.i + 1);
      resolved[1] = std::max(resolved[1], e.index.j + 1);
      resolved[2] = std::max(resolved[2], e.index.k + 1);
    }
    for (auto& d : resolved) d = std::max<std::size_t>(d, 1);
  }

  // Report range and duplicate failures against the offending line.
  std::vector<std::pair<EntryIndex, std::size_t>> seen;
  seen.reserve(entries.size());
  for (std::size_t n = 0; n < entries.size(); ++n) {
    const EntryIndex& idx = entries[n].index;
    if (idx.i >= resolved[0] || idx.j >= resolved[1] || idx.k >= resolved[2]) {
      throw ParseError(lines[n], "index exceeds declared dims");
    }
    seen.emplace_back(idx, lines[n]);
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t n = 1; n < seen.size(); ++n) {
    if (seen[n].first == seen[n - 1].first) {
      throw ParseError(seen[n].second, "duplicate index triple (first seen at line " +
                                           std::to_string(seen[n - 1].second) + ")");
    }
  }
  return SparseTensor3(resolved, std::move(entries));
}

SparseTensor3 load_coo_file(const std::string& path, std::optional<Dims> dims) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_coo(in, dims);
}

void write_coo(std::ostream& out, const SparseTensor3& t) {
  const Dims& d = t.dims();
  out << "#dims," << d[0] << ',' << d[1] << ',' << d[2] << '\n';
  for (const Entry& e : t.entries()) {
    out << e.index.i << ',' << e.index.j << ',' << e.index.k << ','
        << detail::format_double(e.value) << '\n';
  }
}

void write_coo_file(const std::string& path, const SparseTensor3& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_coo(out, t);
  if (!out) throw std::runtime_error("write failed: " + path);
}

SplitRatios parse_ratios(const std::string& text) {
  auto f = detail::split_fields(text, ':');
  if (f.size() != 3) throw std::invalid_argument("ratios must look like a:b:c");
  SplitRatios r;
  double* slots[3] = {&r.train, &r.validation, &r.test};
  for (int n = 0; n < 3; ++n) {
    auto v = detail::parse_double(f[n]);
    if (!v) throw std::invalid_argument("malformed ratio: " + std::string(f[n]));
    *slots[n] = *v;
  }
  return r;
}

std::string format_ratios(const SplitRatios& r) {
  return detail::format_double(r.train) + ":" + detail::format_double(r.validation) + ":" +
         detail::format_double(r.test);
}

DatasetSplit split(const SparseTensor3& t, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.validation > 0.0 && ratios.test > 0.0)) {
    throw std::invalid_argument("split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 100.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 100");
  }
  const std::size_t n = t.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.train / 100.0));
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.validation / 100.0));

  auto take = [&](std::size_t begin, std::size_t end) {
    std::vector<Entry> part;
    part.reserve(end - begin);
    for (std::size_t p = begin; p < end; ++p) part.push_back(t[order[p]]);
    return SparseTensor3(t.dims(), std::move(part));
  };
  return DatasetSplit{take(0, n_train), take(n_train, n_train + n_val), take(n_train + n_val, n)};
}

}  // namespace nnlft
