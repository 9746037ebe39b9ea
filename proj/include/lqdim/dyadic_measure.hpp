#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "lqdim/ifs_model.hpp"

namespace lqdim {

/// Integer coordinates of a half-open dyadic cell [i 2^-L, (i+1) 2^-L) (x [j 2^-L, ...)).
struct CellIndex {
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend bool operator==(CellIndex, CellIndex) = default;
  friend auto operator<=>(CellIndex, CellIndex) = default;
};

struct CellIndexHash {
  std::size_t operator()(CellIndex c) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(c.i) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(c.j) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Neumaier-compensated running sum; keeps long sums of similar terms exact
/// to a few ulps.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

/// floor(x * 2^level), exact for finite doubles.
std::int64_t dyadic_floor(double x, int level);

/// Sparse mass histogram over the dyadic grid of one level, in 1 or 2 dimensions.
/// Cells are kept sorted by index; every stored mass is strictly positive.
class DyadicMeasure {
 public:
  struct Cell {
    CellIndex index;
    double mass = 0.0;
  };

  DyadicMeasure(int dim, int level, std::vector<Cell> cells);

  static DyadicMeasure point_mass(int dim, int level, Point2 at = {});

  int dim() const { return dim_; }
  int level() const { return level_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  double total_mass() const { return total_; }

  /// Left endpoint and center of a cell along one axis.
  double cell_width() const;
  double center(std::int64_t index) const;

  /// Aggregates masses onto the parent cells at `coarser_level` (<= level()).
  DyadicMeasure rebin(int coarser_level) const;

  void write_csv(std::ostream& out) const;
  static DyadicMeasure read_csv(std::istream& in);

 private:
  int dim_;
  int level_;
  std::vector<Cell> cells_;
  double total_;
};

/// Collects point masses into dyadic cells of a fixed level.
class CellAccumulator {
 public:
  CellAccumulator(int dim, int level) : dim_(dim), level_(level) {}

  void deposit(Point2 p, double mass);
  void deposit(CellIndex c, double mass) { cells_[c] += mass; }
  /// Adds another accumulator of the same grid.
  void merge(const CellAccumulator& other);
  DyadicMeasure finish() const;

  int level() const { return level_; }

 private:
  int dim_;
  int level_;
  std::unordered_map<CellIndex, double, CellIndexHash> cells_;
};

}  // namespace lqdim
