#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnlft {

/// The three tensor modes, in storage order: sensor (i), day (j), time-slot (k).
enum class Mode : int { Sensor = 0, Day = 1, Time = 2 };

inline constexpr std::array<Mode, 3> kAllModes{Mode::Sensor, Mode::Day, Mode::Time};

const char* mode_name(Mode mode);

using Dims = std::array<std::size_t, 3>;

struct EntryIndex {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;

  std::size_t along(Mode mode) const {
    switch (mode) {
      case Mode::Sensor: return i;
      case Mode::Day: return j;
      case Mode::Time: return k;
    }
    return i;
  }

  friend bool operator==(const EntryIndex&, const EntryIndex&) = default;
  friend auto operator<=>(const EntryIndex&, const EntryIndex&) = default;
};

struct Entry {
  EntryIndex index;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Raised by the COO reader; carries the 1-based line number of the offending record.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/**
 * Third-order sparse tensor of observed, nonnegative entries.
 *
 * Entries are kept in insertion order. For every mode a CSR-style index maps
 * each coordinate along that mode to the positions of the entries sharing it,
 * so per-row passes of the solver touch only their own slice.
 * Immutable after construction.
 */
class SparseTensor3 {
 public:
  SparseTensor3() = default;

  /// Throws std::invalid_argument on a zero dimension, a negative or non-finite
  /// value, an out-of-range index, or a duplicate index triple.
  SparseTensor3(Dims dims, std::vector<Entry> entries);

  const Dims& dims() const { return dims_; }
  std::size_t dim(Mode mode) const { return dims_[static_cast<int>(mode)]; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::span<const Entry> entries() const { return entries_; }
  const Entry& operator[](std::size_t pos) const { return entries_[pos]; }

  /// Positions (into entries()) of the entries whose coordinate along `mode`
  /// equals `index`, in stored order. Throws std::out_of_range.
  std::span<const std::size_t> slice_positions(Mode mode, std::size_t index) const;

  double mean_value() const;

 private:
  struct ModeIndex {
    std::vector<std::size_t> offsets;    // dim + 1
    std::vector<std::size_t> positions;  // size()
  };

  void build_index();

  Dims dims_{1, 1, 1};
  std::vector<Entry> entries_;
  std::array<ModeIndex, 3> index_;
};

/// Entries of `t` whose coordinate along `mode` equals `index`, in stored order.
std::vector<Entry> mode_slice(const SparseTensor3& t, Mode mode, std::size_t index);

/// Reads the `i,j,k,value` COO text format. When `dims` is empty the
/// dimensions come from a `#dims,I,J,K` header line if present, otherwise
/// they are inferred as max index + 1 along each mode.
SparseTensor3 load_coo(std::istream& in, std::optional<Dims> dims = std::nullopt);
SparseTensor3 load_coo_file(const std::string& path, std::optional<Dims> dims = std::nullopt);

/// Writes the `#dims` header followed by one record per entry. Values use the
/// shortest representation that reads back to the same double.
void write_coo(std::ostream& out, const SparseTensor3& t);
void write_coo_file(const std::string& path, const SparseTensor3& t);

struct SplitRatios {
  double train = 10.0;
  double validation = 20.0;
  double test = 70.0;
};

/// Parses "a:b:c" (percentages). Does not validate the sum.
SplitRatios parse_ratios(const std::string& text);
std::string format_ratios(const SplitRatios& ratios);

/// Train (Omega), validation (Psi) and test (Phi) partitions of one tensor.
/// All three share the source dimensions.
struct DatasetSplit {
  SparseTensor3 train;
  SparseTensor3 validation;
  SparseTensor3 test;
};

/**
 * Shuffles the entries with a permutation seeded by `seed`, then cuts
 * contiguously: floor(train% x n) entries to train, floor(val% x n) to
 * validation, the remainder to test.
 */
DatasetSplit split(const SparseTensor3& t, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace nnlft
