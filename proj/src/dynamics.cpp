#include "lqdim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lqdim/error.hpp"
#include "lqdim/parallel.hpp"

namespace lqdim {

std::vector<int> normalization_levels(std::span<const double> scales, std::span<const int> omega,
                                      std::size_t n) {
  if (n > omega.size()) throw PreconditionViolation("normalization level needs n <= prefix length");
  std::vector<int> levels;
  levels.reserve(n + 1);
  // Track the product as mantissa * 2^exponent, mantissa in [0.5, 1), so long
  // products never underflow. Then 2^(e-1) <= P < 2^e, i.e. L = 1 - e.
  int exponent = 0;
  double mantissa = std::frexp(1.0, &exponent);
  levels.push_back(1 - exponent);
  for (std::size_t k = 0; k < n; ++k) {
    int e = 0;
    mantissa = std::frexp(mantissa * scales[static_cast<std::size_t>(omega[k])], &e);
    exponent += e;
    levels.push_back(1 - exponent);
  }
  return levels;
}

namespace {

std::vector<double> rule_scales(const RuleSet& rs) {
  std::vector<double> s;
  for (const auto& r : rs.rules()) s.push_back(r.scale());
  return s;
}

}  // namespace

std::vector<int> normalization_levels(const RuleSet& rs, std::span<const int> omega, std::size_t n) {
  const auto scales = rule_scales(rs);
  return normalization_levels(scales, omega, n);
}

int normalization_level(const RuleSet& rs, std::span<const int> omega, std::size_t n) {
  return normalization_levels(rs, omega, n).back();
}

std::size_t depth_for_level(const RuleSet& rs, std::span<const int> omega, int level) {
  const auto levels = normalization_levels(rs, omega, omega.size());
  for (std::size_t n = 0; n < levels.size(); ++n) {
    if (levels[n] >= level) return n;
  }
  throw PreconditionViolation("omega prefix too short to reach level " + std::to_string(level));
}

SkewState skew_step(const RuleSet& rs, std::span<const int> omega, SkewState st, std::size_t steps) {
  if (st.base_position + steps > omega.size()) {
    throw PreconditionViolation("skew product orbit exhausts the omega prefix");
  }
  for (std::size_t k = 0; k < steps; ++k) {
    const double alpha = rs.rule(static_cast<std::size_t>(omega[st.base_position])).rotation();
    st.fiber = reduce_angle(st.fiber - alpha);
    ++st.base_position;
  }
  return st;
}

double wrap_beta(double s, double beta) {
  const double period = 2.0 * beta;
  double r = std::fmod(s + beta, period);
  if (r < 0.0) r += period;
  if (r >= period) r = 0.0;
  return r - beta;
}

SkewState skew_step_beta(const ConvolutionScheme& scheme, std::span<const int> omega, SkewState st,
                         std::size_t steps) {
  const auto r = static_cast<std::size_t>(scheme.r);
  if (st.base_position + steps * r > omega.size()) {
    throw PreconditionViolation("beta skew product orbit exhausts the omega prefix");
  }
  for (std::size_t k = 0; k < steps; ++k) {
    st.fiber = wrap_beta(st.fiber + scheme.alpha(omega.subspan(st.base_position, r)), scheme.beta);
    st.base_position += r;
  }
  return st;
}

double lyapunov_constant(const RuleSet& rs, std::span<const double> weights) {
  validate_probability_vector(weights, "driving weights");
  if (weights.size() != rs.size()) throw InvalidInput("driving weights must have one entry per rule");
  double acc = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) acc += weights[i] * std::log2(rs.rule(i).scale());
  return acc;
}

double genericity_test(std::span<const int> omega, std::span<const double> weights,
                       std::size_t cylinder_depth) {
  validate_probability_vector(weights, "driving weights");
  const std::size_t n_sym = weights.size();
  if (cylinder_depth == 0 || omega.size() < cylinder_depth) {
    throw PreconditionViolation("genericity test needs 1 <= depth <= prefix length");
  }
  std::size_t words = 1;
  for (std::size_t d = 0; d < cylinder_depth; ++d) {
    words *= n_sym;
    if (words > (1u << 24)) throw ResourceError("too many cylinders for genericity test");
  }
  std::vector<std::size_t> counts(words, 0);
  const std::size_t windows = omega.size() - cylinder_depth + 1;
  for (std::size_t s = 0; s < windows; ++s) {
    std::size_t code = 0;
    for (std::size_t d = 0; d < cylinder_depth; ++d) {
      const int sym = omega[s + d];
      if (sym < 0 || static_cast<std::size_t>(sym) >= n_sym) throw InvalidInput("omega symbol out of range");
      code = code * n_sym + static_cast<std::size_t>(sym);
    }
    ++counts[code];
  }
  double worst = 0.0;
  for (std::size_t code = 0; code < words; ++code) {
    double expected = 1.0;
    std::size_t c = code;
    for (std::size_t d = 0; d < cylinder_depth; ++d) {
      expected *= weights[c % n_sym];
      c /= n_sym;
    }
    const double freq = static_cast<double>(counts[code]) / static_cast<double>(windows);
    worst = std::max(worst, std::abs(freq - expected));
  }
  return worst;
}

double birkhoff_average(const SkewObservable& f, const RuleSet& rs, std::span<const int> omega,
                        double start_fiber, std::size_t n) {
  if (n == 0) throw PreconditionViolation("Birkhoff average needs n >= 1");
  if (n > omega.size()) throw PreconditionViolation("Birkhoff average exhausts the omega prefix");
  double acc = 0.0;
  double fiber = reduce_angle(start_fiber);
  for (std::size_t i = 0; i < n; ++i) {
    acc += f(omega.subspan(i), fiber);
    fiber = reduce_angle(fiber - rs.rule(static_cast<std::size_t>(omega[i])).rotation());
  }
  return acc / static_cast<double>(n);
}

double uniform_birkhoff_deviation(const SkewObservable& f, double integral, const RuleSet& rs,
                                  std::span<const int> omega, std::span<const double> starts,
                                  std::size_t n, unsigned threads) {
  std::vector<double> dev(starts.size());
  parallel_for(starts.size(), threads, [&](std::size_t s) {
    dev[s] = std::abs(birkhoff_average(f, rs, omega, starts[s], n) - integral);
  });
  return dev.empty() ? 0.0 : *std::max_element(dev.begin(), dev.end());
}

RationalityTest detect_rational(double x, int depth, long long max_denominator, double tolerance) {
  // Convergents h_k / k_k of the continued fraction of x.
  long long h_prev = 1, h = 0, k_prev = 0, k = 1;
  double rest = x;
  for (int d = 0; d < depth; ++d) {
    const double a_real = std::floor(rest);
    if (std::abs(a_real) > 1e15) break;
    const auto a = static_cast<long long>(a_real);
    const long long h_next = a * h_prev + h;
    const long long k_next = a * k_prev + k;
    h = h_prev;
    k = k_prev;
    h_prev = h_next;
    k_prev = k_next;
    if (k_prev > max_denominator) break;
    if (std::abs(x - static_cast<double>(h_prev) / static_cast<double>(k_prev)) < tolerance) {
      return {true, h_prev, k_prev};
    }
    const double frac = rest - a_real;
    if (frac <= 0.0) break;
    rest = 1.0 / frac;
  }
  return {};
}

bool has_irrational_rotation(const RuleSet& rs, std::span<const double> weights) {
  validate_probability_vector(weights, "driving weights");
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    if (!detect_rational(rs.rule(i).rotation() / std::numbers::pi).rational) return true;
  }
  return false;
}

double fiber_equidistribution(const RuleSet& rs, std::span<const int> omega,
                              std::span<const double> starts, std::size_t n, std::size_t bins) {
  if (bins == 0 || starts.empty()) throw PreconditionViolation("equidistribution needs bins and starts");
  std::vector<double> hist(bins, 0.0);
  for (double s : starts) {
    SkewState st{0, reduce_angle(s)};
    for (std::size_t i = 0; i < n; ++i) {
      auto b = static_cast<std::size_t>(st.fiber / kTwoPi * static_cast<double>(bins));
      hist[std::min(b, bins - 1)] += 1.0;
      st = skew_step(rs, omega, st, 1);
    }
  }
  const double total = static_cast<double>(n * starts.size());
  double worst = 0.0;
  for (double h : hist) worst = std::max(worst, std::abs(h / total - 1.0 / static_cast<double>(bins)));
  return worst;
}

}  // namespace lqdim
