#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lqdim/dyadic_measure.hpp"
#include "lqdim/ifs_model.hpp"
#include "lqdim/omega.hpp"

namespace lqdim {

struct BuildOptions {
  /// Reject levels finer than the normalization level of the build depth.
  bool enforce_level = true;
  /// 0 means hardware concurrency.
  unsigned threads = 0;
};

/// A cylinder image reduced to its center and mass.
struct Atom {
  Point2 center;
  double mass = 0.0;
};

/// Visits every positive-mass word of length `depth` against omega in
/// depth-first order, passing the center of its cylinder image and its mass.
void for_each_cylinder(const RuleSet& rs, std::span<const int> omega, std::size_t depth,
                       const std::function<void(Point2, double)>& visit);

/// All depth-`depth` cylinder atoms in depth-first order.
std::vector<Atom> enumerate_cylinders(const RuleSet& rs, std::span<const int> omega,
                                      std::size_t depth);

/// Discretized eta^(omega) (or nu^(omega) in 1-D): each word of length `depth`
/// deposits its mass in the cell containing its cylinder center.
DyadicMeasure build_measure(const RuleSet& rs, std::span<const int> omega, std::size_t depth,
                            int level, const BuildOptions& opts = {});

/// Discretized projection Pi_v eta^(omega) for a unit vector v.
DyadicMeasure project_measure(const RuleSet& rs, std::span<const int> omega, Point2 v,
                              std::size_t depth, int level, const BuildOptions& opts = {});

/// Projections onto many directions; the cylinder tree is traversed once.
std::vector<DyadicMeasure> project_measures(const RuleSet& rs, std::span<const int> omega,
                                            std::span<const Point2> directions,
                                            std::size_t depth, int level,
                                            const BuildOptions& opts = {});

/// Projects an atom cloud onto v and bins at `level`.
DyadicMeasure project_atoms(std::span<const Atom> atoms, Point2 v, int level);

/// nu * A_t theta: mass_x * mass_y deposited at the cell containing x + t y
/// (cell centers).
DyadicMeasure convolve_measures(const DyadicMeasure& nu, const DyadicMeasure& theta, double t,
                                int level);

/// Mass of the cylinder [word] under the measure attached to omega.
using CylinderMassFn =
    std::function<double(std::span<const int> omega, std::span<const int> word)>;

/// Product (Bernoulli) cylinder masses prod p_{omega_m, u_m}.
CylinderMassFn product_cylinder_mass(const RuleSet& rs);

/// Largest observed mass([uv]) / (mass([u]) * mass_{T^n omega}([v])) over
/// word pairs with |u| = n, |v| = m. Enumerates all pairs when there are at
/// most `max_pairs`, otherwise samples that many pairs with `seed`.
double check_condition_c(const RuleSet& rs, std::span<const int> omega, std::size_t n,
                         std::size_t m, const CylinderMassFn& mass = {},
                         std::size_t max_pairs = 1u << 20, std::uint64_t seed = 1);

}  // namespace lqdim
