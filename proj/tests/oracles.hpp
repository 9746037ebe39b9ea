#pragma once

// Brute-force reference computations. They deliberately avoid the library's
// traversal and binning code: words are enumerated explicitly, maps are
// composed by nested application, and cells come from std::floor on
// long double.

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "lqdim/ifs_model.hpp"

namespace oracle {

struct PointMass {
  double x = 0.0, y = 0.0, mass = 0.0;
};

/// Every word of length depth against omega: the point f_{u_1}(...f_{u_n}(c)) and its mass.
inline std::vector<PointMass> cylinders(const lqdim::RuleSet& rs, const std::vector<int>& omega,
                                        std::size_t depth) {
  std::vector<std::vector<int>> words{{}};
  for (std::size_t m = 0; m < depth; ++m) {
    std::vector<std::vector<int>> next;
    const auto& rule = rs.rule(static_cast<std::size_t>(omega[m]));
    for (const auto& w : words) {
      for (std::size_t j = 0; j < rule.size(); ++j) {
        auto e = w;
        e.push_back(static_cast<int>(j));
        next.push_back(e);
      }
    }
    words.swap(next);
  }
  std::vector<PointMass> out;
  for (const auto& w : words) {
    lqdim::Point2 p = rs.reference().center;
    double mass = 1.0;
    for (std::size_t m = depth; m-- > 0;) {
      const auto& rule = rs.rule(static_cast<std::size_t>(omega[m]));
      p = rule.map(static_cast<std::size_t>(w[m])).apply(p);
      mass *= rule.probs()[static_cast<std::size_t>(w[m])];
    }
    if (mass > 0.0) out.push_back({p.x, p.y, mass});
  }
  return out;
}

inline long long cell_of(double x, int level) {
  return static_cast<long long>(std::floor(static_cast<long double>(x) * std::pow(2.0L, level)));
}

/// sum over cells of mass^q, 1-D (use_y false) or 2-D.
inline double correlation(const std::vector<PointMass>& pts, int level, double q, bool use_y) {
  std::map<std::pair<long long, long long>, double> cells;
  for (const auto& p : pts) cells[{cell_of(p.x, level), use_y ? cell_of(p.y, level) : 0}] += p.mass;
  double acc = 0.0;
  for (const auto& [k, m] : cells) acc += std::pow(m, q);
  return acc;
}

inline std::vector<PointMass> project(const std::vector<PointMass>& pts, double angle) {
  std::vector<PointMass> out;
  for (const auto& p : pts) out.push_back({p.x * std::cos(angle) + p.y * std::sin(angle), 0.0, p.mass});
  return out;
}

/// The smoothed moment by the literal double sum over fine cells (quadratic).
inline double smooth_moment(const std::vector<PointMass>& pts, int coarse_level, int refine, double q) {
  std::map<long long, double> fine;
  for (const auto& p : pts) fine[cell_of(p.x, coarse_level + refine)] += p.mass;
  auto psi = [](double x) {
    x = std::abs(x);
    if (x <= 1) return 1.0;
    if (x >= 2) return 0.0;
    const double t = 2 - x;
    return 3 * t * t - 2 * t * t * t;
  };
  const double w = std::ldexp(1.0, -(coarse_level + refine));
  double acc = 0.0;
  for (const auto& [iy, my] : fine) {
    double inner = 0.0;
    for (const auto& [ix, mx] : fine) inner += mx * psi((ix - iy) * w * std::ldexp(1.0, coarse_level));
    acc += my * std::pow(inner, q - 1.0);
  }
  return acc;
}

/// L with 2^-L <= product < 2^(1-L), by repeated halving in long double.
inline int level_of(long double product) {
  int l = 0;
  long double bound = 1.0L;
  while (!(bound <= product)) {
    bound /= 2;
    ++l;
  }
  return l;
}

}  // namespace oracle
