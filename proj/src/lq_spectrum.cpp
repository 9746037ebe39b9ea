#include "lqdim/lq_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "lqdim/error.hpp"

namespace lqdim {

double correlation_sum(const DyadicMeasure& m, double q) {
  if (!(q > 1.0)) throw InvalidInput("correlation sums need q > 1, got " + std::to_string(q));
  CompensatedSum acc;
  for (const auto& c : m.cells()) acc.add(std::pow(c.mass, q));
  return acc.value();
}

namespace {

void fit_line(SpectrumCurve& curve) {
  const auto n = static_cast<double>(curve.levels.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < curve.levels.size(); ++k) {
    const double x = curve.levels[k], y = curve.log_cq[k];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  curve.slope = slope;
  curve.dimension = slope / -(curve.q - 1.0);
  curve.residual = 0.0;
  for (std::size_t k = 0; k < curve.levels.size(); ++k) {
    curve.residual = std::max(curve.residual,
                              std::abs(curve.log_cq[k] - (intercept + slope * curve.levels[k])));
  }
}

void check_window(std::pair<int, int> window) {
  if (window.second - window.first + 1 < 3) {
    throw InvalidInput("dimension estimate needs a window of at least three levels");
  }
}

}  // namespace

SpectrumCurve estimate_dimension(const DyadicMeasure& finest, double q, std::pair<int, int> window) {
  check_window(window);
  if (finest.level() < window.second) {
    throw PreconditionViolation("measure is coarser than the top of the level window");
  }
  SpectrumCurve curve;
  curve.q = q;
  DyadicMeasure current = finest.rebin(window.second);
  for (int level = window.second; level >= window.first; --level) {
    if (level < window.second) current = current.rebin(level);
    curve.levels.push_back(level);
    curve.log_cq.push_back(std::log2(correlation_sum(current, q)));
  }
  std::reverse(curve.levels.begin(), curve.levels.end());
  std::reverse(curve.log_cq.begin(), curve.log_cq.end());
  fit_line(curve);
  return curve;
}

SpectrumCurve estimate_dimension(const std::function<DyadicMeasure(int level)>& builder, double q,
                                 std::pair<int, int> window) {
  check_window(window);
  return estimate_dimension(builder(window.second), q, window);
}

std::size_t box_count(const DyadicMeasure& m) { return m.size(); }

double holder_box_lower_bound(const DyadicMeasure& m, double q) {
  if (!(std::abs(m.total_mass() - 1.0) <= 1e-9)) {
    throw InvalidInput("Hölder box bound needs a probability measure");
  }
  // Hölder with the actual total M: count >= M^(q') C^(-q'/q); M = 1 up to rounding.
  const double total = m.total_mass();
  return std::pow(std::pow(total, q) / correlation_sum(m, q), 1.0 / (q - 1.0));
}

namespace {

bool contains(const Box& b, const double* x, int dim) {
  for (int a = 0; a < dim; ++a) {
    if (!(b.lo[a] <= x[a] && x[a] < b.hi[a])) return false;
  }
  return true;
}

bool intersects(const Box& a, const Box& b, int dim) {
  for (int k = 0; k < dim; ++k) {
    if (!(std::max(a.lo[k], b.lo[k]) < std::min(a.hi[k], b.hi[k]))) return false;
  }
  return true;
}

bool covered(std::span<const Box> family, const double* x, int dim) {
  return std::any_of(family.begin(), family.end(), [&](const Box& b) { return contains(b, x, dim); });
}

int max_hits(std::span<const Box> from, std::span<const Box> to, int dim) {
  int worst = 0;
  for (const auto& a : from) {
    int hits = 0;
    for (const auto& b : to) hits += intersects(a, b, dim) ? 1 : 0;
    worst = std::max(worst, hits);
  }
  return worst;
}

}  // namespace

MEquivalence check_m_equivalence(std::span<const Box> p, std::span<const Box> p2, const Box& w,
                                 int dim) {
  if (dim != 1 && dim != 2) throw InvalidInput("families must be 1- or 2-dimensional");
  // Elementary cells between consecutive breakpoints are either fully inside or
  // fully outside every box, so testing one interior point per cell decides (i).
  std::vector<double> breaks[2];
  for (int a = 0; a < dim; ++a) {
    breaks[a] = {w.lo[a], w.hi[a]};
    for (const auto& b : p) breaks[a].insert(breaks[a].end(), {b.lo[a], b.hi[a]});
    for (const auto& b : p2) breaks[a].insert(breaks[a].end(), {b.lo[a], b.hi[a]});
    std::sort(breaks[a].begin(), breaks[a].end());
    breaks[a].erase(std::unique(breaks[a].begin(), breaks[a].end()), breaks[a].end());
    std::erase_if(breaks[a], [&](double v) { return v < w.lo[a] || v > w.hi[a]; });
  }
  const std::size_t ny = dim == 2 ? breaks[1].size() - 1 : 1;
  for (std::size_t ix = 0; ix + 1 < breaks[0].size(); ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      double x[2] = {0.5 * (breaks[0][ix] + breaks[0][ix + 1]), 0.0};
      Box cell = Box::interval(breaks[0][ix], breaks[0][ix + 1]);
      if (dim == 2) {
        x[1] = 0.5 * (breaks[1][iy] + breaks[1][iy + 1]);
        cell.lo[1] = breaks[1][iy];
        cell.hi[1] = breaks[1][iy + 1];
      }
      if (covered(p, x, dim) != covered(p2, x, dim)) return {false, 0, cell};
    }
  }
  return {true, std::max({1, max_hits(p, p2, dim), max_hits(p2, p, dim)}), std::nullopt};
}

double family_moment(std::span<const Box> family, std::span<const Atom> atoms, double q, int dim) {
  double acc = 0.0;
  for (const auto& b : family) {
    double mass = 0.0;
    for (const auto& a : atoms) {
      const double x[2] = {a.center.x, a.center.y};
      if (contains(b, x, dim)) mass += a.mass;
    }
    if (mass > 0.0) acc += std::pow(mass, q);
  }
  return acc;
}

double discrete_energy(const DyadicMeasure& m, double s) {
  const auto& cells = m.cells();
  double acc = 0.0;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    const double xa = m.center(cells[a].index.i), ya = m.center(cells[a].index.j);
    double row = 0.0;
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      double d = m.center(cells[b].index.i) - xa;
      if (m.dim() == 2) d = std::hypot(d, m.center(cells[b].index.j) - ya);
      row += cells[b].mass * std::pow(std::abs(d), -s);
    }
    acc += 2.0 * cells[a].mass * row;
  }
  return acc;
}

EnergyDimension energy_correlation_dimension(const DyadicMeasure& m, std::span<const double> s_grid) {
  if (s_grid.empty()) throw InvalidInput("energy scan needs a nonempty s grid");
  std::vector<double> grid(s_grid.begin(), s_grid.end());
  std::sort(grid.begin(), grid.end());
  constexpr int kRefine = 3;
  const DyadicMeasure coarse = m.rebin(m.level() - kRefine);
  if (m.size() < 2 || coarse.size() < 2) return {grid.front(), true};
  const double growth = std::exp2(kRefine / 8.0);
  double last_finite = grid.front();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (discrete_energy(m, grid[k]) > growth * discrete_energy(coarse, grid[k])) {
      return {last_finite, k == 0};
    }
    last_finite = grid[k];
  }
  return {last_finite, false};
}

void write_spectrum_csv(std::ostream& out, std::span<const SpectrumCurve> curves) {
  out << "q,level,log2_cq,slope,dimension,residual\n" << std::setprecision(17);
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.levels.size(); ++k) {
      out << c.q << ',' << c.levels[k] << ',' << c.log_cq[k] << ',' << c.slope << ','
          << c.dimension << ',' << c.residual << '\n';
    }
  }
}

}  // namespace lqdim
