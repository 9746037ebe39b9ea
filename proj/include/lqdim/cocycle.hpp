#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "lqdim/dyadic_measure.hpp"
#include "lqdim/ifs_model.hpp"

namespace lqdim {

/// Discretization knobs shared by the cocycle computations.
struct CocycleOptions {
  /// The projected measure is approximated by atoms at the centers of
  /// cylinders this many levels below n.
  std::size_t extra_depth = 0;
  /// tau_smooth integrates over a grid this many dyadic levels finer than L_n.
  int smooth_refine = 4;
};

/// The plateau bump: 1 on [-1,1], 0 outside (-2,2), smoothstep in between.
double bump(double x);

/// Unit vector of a fiber angle.
inline Point2 direction(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// sum over I in D_{L_n} of eta_v(I)^q, with eta_v approximated by atoms at
/// depth atom_depth >= n (0 selects n + extra_depth). 1-D rule sets ignore the fiber.
double tau(const RuleSet& rs, std::span<const int> omega, double fiber, std::size_t n, double q,
           const CocycleOptions& opts = {}, std::size_t atom_depth = 0);

/// int (int psi(2^{L_n}(x - y)) d eta_v(x))^(q-1) d eta_v(y) on the same atoms.
double tau_smooth(const RuleSet& rs, std::span<const int> omega, double fiber, std::size_t n,
                  double q, const CocycleOptions& opts = {}, std::size_t atom_depth = 0);

struct CocycleSample {
  std::size_t omega_offset = 0;
  double fiber = 0.0;
  std::size_t n = 0;
  double q = 2.0;
  double tau = 1.0;
  double tau_smooth = 1.0;
};

/// tau and tau_smooth from one discretization, so the pair is directly comparable.
CocycleSample sample_cocycle(const RuleSet& rs, std::span<const int> omega, double fiber,
                             std::size_t n, double q, const CocycleOptions& opts = {},
                             std::size_t atom_depth = 0);

/// tau_smooth from a fine 1-D measure at level >= coarse_level, kernel scaled to coarse_level.
double smooth_moment(const DyadicMeasure& fine, int coarse_level, double q);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Floating-point slack used when comparing sides of an exact inequality.
inline constexpr double kRoundingSlack = 1e-12;

/// tau_{n+m}(omega, v) <= (54 K)^q tau_n(omega, v) tau_m(S^n(omega, v)).
/// All three use one atom tree of depth n + m + extra_depth; tau_0 = 1.
InequalityCheck check_submultiplicative(const RuleSet& rs, std::span<const int> omega, double fiber,
                                        std::size_t n, std::size_t m, double q, double k_const = 1.0,
                                        const CocycleOptions& opts = {});

struct EquivalenceCheck {
  /// tau_smooth / tau, must be >= 1.
  double ratio_low = 1.0;
  /// tau_smooth / (5^(q-1) tau), must be <= 1.
  double ratio_high = 1.0;
  bool pass = false;
};

/// tau <= tau_smooth <= 5^(q-1) tau.
EquivalenceCheck check_equivalence(const RuleSet& rs, std::span<const int> omega, double fiber,
                                   std::size_t n, double q, const CocycleOptions& opts = {});
EquivalenceCheck check_equivalence(const CocycleSample& s);

/// sum over dyadic squares of side 2^-L_n of eta(Q)^q (planar rule sets).
double xi_planar(const RuleSet& rs, std::span<const int> omega, std::size_t n, double q,
                 const CocycleOptions& opts = {}, std::size_t atom_depth = 0);

struct PhiEstimate {
  std::vector<std::size_t> n_list;
  /// Mean over samples of phi_n = log2(K1 tau_smooth_n).
  std::vector<double> avg_phi;
  std::vector<double> phi_over_n;
  std::vector<double> running_inf;
  /// Least-squares slope of avg_phi against n; free of the additive log2 K1.
  double slope = 0.0;
  /// slope / ((q-1) mu*).
  double dimension = 0.0;
  /// running_inf.back() / ((q-1) mu*), biased by log2(K1)/n at finite n.
  double dimension_from_infimum = 0.0;
};

/// Monte Carlo estimate of inf_n (1/n) int phi_n over (omega, fiber) with
/// omega drawn from the r-Bernoulli measure and the fiber uniform.
PhiEstimate estimate_phi(const RuleSet& rs, std::span<const double> weights, double q,
                         std::span<const std::size_t> n_list, std::size_t samples,
                         std::uint64_t seed = 1, const CocycleOptions& opts = {},
                         unsigned threads = 0);

void write_phi_csv(std::ostream& out, const PhiEstimate& est);

}  // namespace lqdim
