#include "lqdim/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <limits>
#include <random>

#include "lqdim/dynamics.hpp"
#include "lqdim/error.hpp"
#include "lqdim/lq_spectrum.hpp"
#include "lqdim/measure_builder.hpp"
#include "lqdim/parallel.hpp"

namespace lqdim {

double bump(double x) {
  const double a = std::abs(x);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  const double t = 2.0 - a;
  return t * t * (3.0 - 2.0 * t);
}

namespace {

void check_q(double q) {
  if (!(q > 1.0)) throw InvalidInput("cocycle moments need q > 1");
}

std::size_t resolve_depth(std::size_t n, std::size_t atom_depth, const CocycleOptions& opts) {
  const std::size_t d = atom_depth == 0 ? n + opts.extra_depth : atom_depth;
  if (d < n) throw PreconditionViolation("atom depth must be at least n");
  return d;
}

// The (projected) measure on the line, binned at `level`. Parallelism lives
// at the sample level, so builds here are single-threaded.
DyadicMeasure line_measure(const RuleSet& rs, std::span<const int> omega, double fiber,
                           std::size_t depth, int level) {
  BuildOptions bo;
  bo.enforce_level = false;
  bo.threads = 1;
  if (rs.ambient_dim() == 1) return build_measure(rs, omega, depth, level, bo);
  return project_measure(rs, omega, direction(fiber), depth, level, bo);
}

}  // namespace

double tau(const RuleSet& rs, std::span<const int> omega, double fiber, std::size_t n, double q,
           const CocycleOptions& opts, std::size_t atom_depth) {
  check_q(q);
  if (n == 0) return 1.0;
  const std::size_t depth = resolve_depth(n, atom_depth, opts);
  if (depth > omega.size()) throw PreconditionViolation("omega prefix shorter than the atom depth");
  const int level = normalization_level(rs, omega, n);
  return correlation_sum(line_measure(rs, omega, fiber, depth, level), q);
}

double smooth_moment(const DyadicMeasure& fine, int coarse_level, double q) {
  check_q(q);
  if (fine.dim() != 1) throw InvalidInput("smooth moment is defined for measures on the line");
  const int refine = fine.level() - coarse_level;
  if (refine < 0) throw PreconditionViolation("fine measure is coarser than the kernel scale");
  const auto& cells = fine.cells();
  const double sub = std::exp2(refine);
  // Kernel support |x - y| < 2 * 2^-coarse spans fewer than 2 * sub fine cells.
  const auto reach = static_cast<std::int64_t>(2.0 * sub);
  double acc = 0.0;
  std::size_t lo = 0;
  for (std::size_t y = 0; y < cells.size(); ++y) {
    const std::int64_t iy = cells[y].index.i;
    while (cells[lo].index.i <= iy - reach) ++lo;
    double inner = 0.0;
    for (std::size_t x = lo; x < cells.size() && cells[x].index.i < iy + reach; ++x) {
      inner += cells[x].mass * bump(static_cast<double>(cells[x].index.i - iy) / sub);
    }
    acc += cells[y].mass * std::pow(inner, q - 1.0);
  }
  return acc;
}

CocycleSample sample_cocycle(const RuleSet& rs, std::span<const int> omega, double fiber,
                             std::size_t n, double q, const CocycleOptions& opts,
                             std::size_t atom_depth) {
  check_q(q);
  CocycleSample s;
  s.fiber = fiber;
  s.n = n;
  s.q = q;
  if (n == 0) return s;
  const std::size_t depth = resolve_depth(n, atom_depth, opts);
  if (depth > omega.size()) throw PreconditionViolation("omega prefix shorter than the atom depth");
  if (opts.smooth_refine < 0) throw InvalidInput("smooth_refine must be non-negative");
  const int level = normalization_level(rs, omega, n);
  const DyadicMeasure fine = line_measure(rs, omega, fiber, depth, level + opts.smooth_refine);
  s.tau = correlation_sum(fine.rebin(level), q);
  s.tau_smooth = smooth_moment(fine, level, q);
  return s;
}

double tau_smooth(const RuleSet& rs, std::span<const int> omega, double fiber, std::size_t n,
                  double q, const CocycleOptions& opts, std::size_t atom_depth) {
  return sample_cocycle(rs, omega, fiber, n, q, opts, atom_depth).tau_smooth;
}

InequalityCheck check_submultiplicative(const RuleSet& rs, std::span<const int> omega, double fiber,
                                        std::size_t n, std::size_t m, double q, double k_const,
                                        const CocycleOptions& opts) {
  check_q(q);
  const std::size_t depth = n + m + opts.extra_depth;
  if (depth > omega.size()) throw PreconditionViolation("omega prefix shorter than n + m + extra depth");
  const double lhs = tau(rs, omega, fiber, n + m, q, opts, depth);
  const double tau_n = tau(rs, omega, fiber, n, q, opts, depth);
  const SkewState moved = skew_step(rs, omega, {0, reduce_angle(fiber)}, n);
  const double tau_m = tau(rs, omega.subspan(n), moved.fiber, m, q, opts, depth - n);
  const double rhs = std::pow(54.0 * k_const, q) * tau_n * tau_m;
  return {lhs, rhs, lhs <= rhs * (1.0 + kRoundingSlack)};
}

EquivalenceCheck check_equivalence(const CocycleSample& s) {
  EquivalenceCheck c;
  c.ratio_low = s.tau_smooth / s.tau;
  c.ratio_high = s.tau_smooth / (std::pow(5.0, s.q - 1.0) * s.tau);
  c.pass = c.ratio_low >= 1.0 - kRoundingSlack && c.ratio_high <= 1.0 + kRoundingSlack;
  return c;
}

EquivalenceCheck check_equivalence(const RuleSet& rs, std::span<const int> omega, double fiber,
                                   std::size_t n, double q, const CocycleOptions& opts) {
  return check_equivalence(sample_cocycle(rs, omega, fiber, n, q, opts));
}

double xi_planar(const RuleSet& rs, std::span<const int> omega, std::size_t n, double q,
                 const CocycleOptions& opts, std::size_t atom_depth) {
  check_q(q);
  if (rs.ambient_dim() != 2) throw InvalidInput("xi is defined for planar rule sets");
  if (n == 0) return 1.0;
  const std::size_t depth = resolve_depth(n, atom_depth, opts);
  if (depth > omega.size()) throw PreconditionViolation("omega prefix shorter than the atom depth");
  BuildOptions bo;
  bo.enforce_level = false;
  const int level = normalization_level(rs, omega, n);
  return correlation_sum(build_measure(rs, omega, depth, level, bo), q);
}

PhiEstimate estimate_phi(const RuleSet& rs, std::span<const double> weights, double q,
                         std::span<const std::size_t> n_list, std::size_t samples,
                         std::uint64_t seed, const CocycleOptions& opts, unsigned threads) {
  check_q(q);
  if (n_list.empty()) throw InvalidInput("estimate_phi needs a nonempty n list");
  if (samples == 0) throw InvalidInput("estimate_phi needs at least one sample");
  if (std::any_of(n_list.begin(), n_list.end(), [](std::size_t n) { return n == 0; })) {
    throw InvalidInput("estimate_phi needs n >= 1");
  }
  const double mu_star = lyapunov_constant(rs, weights);
  const std::size_t n_max = *std::max_element(n_list.begin(), n_list.end());
  const double log_k1 = q * std::log2(54.0);

  std::vector<std::vector<double>> phi(samples, std::vector<double>(n_list.size()));
  parallel_for(samples, threads, [&](std::size_t s) {
    const auto omega = sample_omega(weights, n_max + opts.extra_depth, seed + s);
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (s + 1)));
    const double fiber = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
    for (std::size_t k = 0; k < n_list.size(); ++k) {
      const auto c = sample_cocycle(rs, omega.symbols, fiber, n_list[k], q, opts);
      phi[s][k] = log_k1 + std::log2(c.tau_smooth);
    }
  });

  PhiEstimate est;
  est.n_list.assign(n_list.begin(), n_list.end());
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    double avg = 0.0;
    for (const auto& row : phi) avg += row[k];
    avg /= static_cast<double>(samples);
    est.avg_phi.push_back(avg);
    est.phi_over_n.push_back(avg / static_cast<double>(n_list[k]));
    inf = std::min(inf, est.phi_over_n.back());
    est.running_inf.push_back(inf);
  }
  const double norm = (q - 1.0) * mu_star;
  if (n_list.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto cnt = static_cast<double>(n_list.size());
    for (std::size_t k = 0; k < n_list.size(); ++k) {
      const auto x = static_cast<double>(n_list[k]);
      sx += x;
      sy += est.avg_phi[k];
      sxx += x * x;
      sxy += x * est.avg_phi[k];
    }
    const double den = cnt * sxx - sx * sx;
    est.slope = den > 0.0 ? (cnt * sxy - sx * sy) / den : est.phi_over_n.back();
  } else {
    est.slope = est.phi_over_n.back();
  }
  est.dimension = norm != 0.0 ? est.slope / norm : 0.0;
  est.dimension_from_infimum = norm != 0.0 ? est.running_inf.back() / norm : 0.0;
  return est;
}

void write_phi_csv(std::ostream& out, const PhiEstimate& est) {
  out << "n,avg_phi,phi_over_n,running_inf\n" << std::setprecision(17);
  for (std::size_t k = 0; k < est.n_list.size(); ++k) {
    out << est.n_list[k] << ',' << est.avg_phi[k] << ',' << est.phi_over_n[k] << ','
        << est.running_inf[k] << '\n';
  }
}

}  // namespace lqdim
