#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lqdim/ifs_model.hpp"
#include "lqdim/omega.hpp"
#include "lqdim/scheme.hpp"

namespace lqdim {

/// The unique L >= 0 with 2^-L <= lambda_{omega_1} ... lambda_{omega_n} < 2^(1-L).
int normalization_level(const RuleSet& rs, std::span<const int> omega, std::size_t n);

/// L_0 .. L_n in one pass (L_0 = 0).
std::vector<int> normalization_levels(const RuleSet& rs, std::span<const int> omega, std::size_t n);

/// Smallest n with L_n >= level; throws if the omega prefix is too short.
std::size_t depth_for_level(const RuleSet& rs, std::span<const int> omega, int level);

/// Same bracket for an arbitrary list of scales read along omega.
std::vector<int> normalization_levels(std::span<const double> scales, std::span<const int> omega,
                                      std::size_t n);

/// Position on the base together with a fiber coordinate: an angle in
/// [0, 2pi) on the unit circle, or a point of [-beta, beta) on the beta-circle.
struct SkewState {
  std::size_t base_position = 0;
  double fiber = 0.0;
};

/// S(omega, v) = (T omega, e^{-i alpha_{omega_1}} v), iterated `steps` times.
/// The fiber is the angle of v; each step subtracts the current rule's rotation.
SkewState skew_step(const RuleSet& rs, std::span<const int> omega, SkewState st, std::size_t steps);

/// Reduces s to [-beta, beta).
double wrap_beta(double s, double beta);

/// S(omega, s) = (T^r omega, s +_beta alpha(omega_1..omega_r)), iterated `steps` times.
SkewState skew_step_beta(const ConvolutionScheme& scheme, std::span<const int> omega, SkewState st,
                         std::size_t steps);

/// sum_i r_i log2 lambda_i.
double lyapunov_constant(const RuleSet& rs, std::span<const double> weights);

/// Largest |empirical frequency - Bernoulli mass| over all cylinders of the given depth.
double genericity_test(std::span<const int> omega, std::span<const double> weights,
                       std::size_t cylinder_depth);

/// Observable evaluated at a skew-product state: the shifted sequence and the fiber.
using SkewObservable = std::function<double(std::span<const int> omega, double fiber)>;

/// (1/n) sum_{i<n} f(S^i(omega, fiber)) on the circle skew product.
double birkhoff_average(const SkewObservable& f, const RuleSet& rs, std::span<const int> omega,
                        double start_fiber, std::size_t n);

/// max over starting fibers of |birkhoff_average - integral|.
double uniform_birkhoff_deviation(const SkewObservable& f, double integral, const RuleSet& rs,
                                  std::span<const int> omega, std::span<const double> starts,
                                  std::size_t n, unsigned threads = 0);

/// Sufficient condition for ergodicity of mu x Lebesgue under S when mu is
/// Bernoulli: some rule with positive weight rotates by an irrational multiple of pi.
bool has_irrational_rotation(const RuleSet& rs, std::span<const double> weights);

/// Largest deviation of the empirical fiber distribution from uniform over
/// `bins` equal arcs, pooled over orbits from the given starts.
double fiber_equidistribution(const RuleSet& rs, std::span<const int> omega,
                              std::span<const double> starts, std::size_t n, std::size_t bins);

/// Result of testing a real for rationality via its continued fraction.
struct RationalityTest {
  bool rational = false;
  long long numerator = 0;
  long long denominator = 1;
};

/// Expands x to `depth` partial quotients and reports the first convergent
/// p/q with q <= max_denominator and |x - p/q| < tolerance.
RationalityTest detect_rational(double x, int depth = 40, long long max_denominator = 1000000,
                                double tolerance = 1e-14);

}  // namespace lqdim
