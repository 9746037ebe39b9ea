#include "lqdim/dyadic_measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "lqdim/error.hpp"

namespace lqdim {

std::int64_t dyadic_floor(double x, int level) {
  const double scaled = std::floor(std::ldexp(x, level));
  if (!(std::abs(scaled) < 9.0e18)) throw InvalidInput("coordinate out of range for dyadic level");
  return static_cast<std::int64_t>(scaled);
}

DyadicMeasure::DyadicMeasure(int dim, int level, std::vector<Cell> cells)
    : dim_(dim), level_(level), cells_(std::move(cells)), total_(0.0) {
  if (dim_ != 1 && dim_ != 2) throw InvalidInput("measure dimension must be 1 or 2");
  if (level_ < -60 || level_ > 60) throw InvalidInput("dyadic level out of range");
  std::sort(cells_.begin(), cells_.end(),
            [](const Cell& a, const Cell& b) { return a.index < b.index; });
  std::vector<Cell> merged;
  merged.reserve(cells_.size());
  for (const auto& c : cells_) {
    if (!(c.mass >= 0.0)) throw InvalidInput("cell masses must be nonnegative");
    if (dim_ == 1 && c.index.j != 0) throw InvalidInput("1-D cells must have j = 0");
    if (!merged.empty() && merged.back().index == c.index) {
      merged.back().mass += c.mass;
    } else {
      merged.push_back(c);
    }
  }
  std::erase_if(merged, [](const Cell& c) { return c.mass <= 0.0; });
  cells_ = std::move(merged);
  CompensatedSum total;
  for (const auto& c : cells_) total.add(c.mass);
  total_ = total.value();
}

DyadicMeasure DyadicMeasure::point_mass(int dim, int level, Point2 at) {
  CellIndex c{dyadic_floor(at.x, level), dim == 2 ? dyadic_floor(at.y, level) : 0};
  return DyadicMeasure(dim, level, {{c, 1.0}});
}

double DyadicMeasure::cell_width() const { return std::ldexp(1.0, -level_); }

double DyadicMeasure::center(std::int64_t index) const {
  return std::ldexp(static_cast<double>(index) + 0.5, -level_);
}

DyadicMeasure DyadicMeasure::rebin(int coarser_level) const {
  if (coarser_level > level_) {
    throw PreconditionViolation("rebin target level must not exceed the current level");
  }
  const int shift = level_ - coarser_level;
  std::vector<Cell> out;
  out.reserve(cells_.size());
  for (const auto& c : cells_) {
    // Arithmetic shift is floor division for negative indices as well.
    CellIndex parent{c.index.i >> shift, dim_ == 2 ? (c.index.j >> shift) : 0};
    if (!out.empty() && out.back().index == parent) {
      out.back().mass += c.mass;
    } else {
      out.push_back({parent, c.mass});
    }
  }
  return DyadicMeasure(dim_, coarser_level, std::move(out));
}

void DyadicMeasure::write_csv(std::ostream& out) const {
  out << "# level=" << level_ << " dim=" << dim_ << '\n';
  out << std::setprecision(17);
  for (const auto& c : cells_) {
    out << c.index.i;
    if (dim_ == 2) out << ',' << c.index.j;
    out << ',' << c.mass << '\n';
  }
}

DyadicMeasure DyadicMeasure::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# level=", 0) != 0) {
    throw InvalidInput("measure CSV must start with a '# level=' line");
  }
  int level = 0, dim = 1;
  if (std::sscanf(line.c_str(), "# level=%d dim=%d", &level, &dim) < 1) {
    throw InvalidInput("cannot parse measure CSV header");
  }
  std::vector<Cell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Cell c;
    row >> c.index.i;
    if (dim == 2) row >> c.index.j;
    row >> c.mass;
    if (!row) throw InvalidInput("malformed measure CSV row: " + line);
    cells.push_back(c);
  }
  return DyadicMeasure(dim, level, std::move(cells));
}

void CellAccumulator::deposit(Point2 p, double mass) {
  CellIndex c{dyadic_floor(p.x, level_), dim_ == 2 ? dyadic_floor(p.y, level_) : 0};
  cells_[c] += mass;
}

void CellAccumulator::merge(const CellAccumulator& other) {
  for (const auto& [k, m] : other.cells_) cells_[k] += m;
}

DyadicMeasure CellAccumulator::finish() const {
  std::vector<DyadicMeasure::Cell> cells;
  cells.reserve(cells_.size());
  for (const auto& [k, m] : cells_) cells.push_back({k, m});
  return DyadicMeasure(dim_, level_, std::move(cells));
}

}  // namespace lqdim
