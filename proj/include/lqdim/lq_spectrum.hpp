#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lqdim/dyadic_measure.hpp"
#include "lqdim/measure_builder.hpp"

namespace lqdim {

/// log2 C^q per level with a least-squares dimension estimate.
struct SpectrumCurve {
  double q = 2.0;
  std::vector<int> levels;
  std::vector<double> log_cq;
  double slope = 0.0;
  /// slope / -(q-1).
  double dimension = 0.0;
  /// Largest absolute regression residual.
  double residual = 0.0;
};

/// The default q grid; values above 2 are diagnostic only.
inline constexpr double kDefaultQGrid[] = {1.25, 1.5, 1.75, 2.0};

/// sum over occupied cells of mass^q. Requires q > 1.
double correlation_sum(const DyadicMeasure& m, double q);

/// Least-squares fit of log2 C^q against level over [window.first, window.second]
/// (inclusive, at least three levels). `finest` must be at a level >= window.second;
/// coarser levels are obtained by rebinning it.
SpectrumCurve estimate_dimension(const DyadicMeasure& finest, double q, std::pair<int, int> window);

/// Same, with the finest measure produced on demand at window.second.
SpectrumCurve estimate_dimension(const std::function<DyadicMeasure(int level)>& builder, double q,
                                 std::pair<int, int> window);

/// Number of occupied cells.
std::size_t box_count(const DyadicMeasure& m);

/// C^q(m)^(-q'/q) with 1/q + 1/q' = 1, a lower bound for box_count of a
/// probability measure.
double holder_box_lower_bound(const DyadicMeasure& m, double q);

/// Half-open axis-aligned box [lo, hi) in 1 or 2 dimensions (unused axis ignored).
struct Box {
  double lo[2] = {0.0, 0.0};
  double hi[2] = {0.0, 0.0};

  static Box interval(double a, double b) { return {{a, 0.0}, {b, 1.0}}; }
};

struct MEquivalence {
  bool equivalent = false;
  /// Smallest M bounding both intersection counts (valid when equivalent).
  int m = 0;
  /// A piece of W covered by exactly one family, when the unions differ.
  std::optional<Box> witness;
};

/// Checks the unions of two finite families agree on W and returns the
/// smallest M such that every element of either family meets at most M
/// elements of the other.
MEquivalence check_m_equivalence(std::span<const Box> p, std::span<const Box> p2, const Box& w,
                                 int dim = 1);

/// sum over the family of rho(A)^q for an atomic measure rho.
double family_moment(std::span<const Box> family, std::span<const Atom> atoms, double q, int dim = 1);

struct EnergyDimension {
  double dimension = 0.0;
  /// True when no pair of distinct cells exists (point mass) or the first
  /// grid value already diverges.
  bool degenerate = false;
};

/// Discrete Riesz energy sum_{i != j} m_i m_j |x_i - x_j|^-s over cell centers.
double discrete_energy(const DyadicMeasure& m, double s);

/// Largest grid value s whose discrete energy stays finite under refinement:
/// s counts as divergent when E_L(s) > 2^(3/8) E_{L-3}(s).
EnergyDimension energy_correlation_dimension(const DyadicMeasure& m, std::span<const double> s_grid);

void write_spectrum_csv(std::ostream& out, std::span<const SpectrumCurve> curves);

}  // namespace lqdim
