#include "lqdim/convolution_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "lqdim/dynamics.hpp"
#include "lqdim/error.hpp"
#include "lqdim/measure_builder.hpp"
#include "lqdim/parallel.hpp"

namespace lqdim {

double ConvolutionScheme::alpha(std::span<const int> block) const {
  if (block.size() < static_cast<std::size_t>(r)) throw PreconditionViolation("block shorter than r");
  std::size_t code = 0;
  for (int k = 0; k < r; ++k) {
    const int s = block[static_cast<std::size_t>(k)];
    if (s < 0 || static_cast<std::size_t>(s) >= rule_count()) throw InvalidInput("omega symbol out of range");
    code = code * rule_count() + static_cast<std::size_t>(s);
  }
  return alphas[code];
}

ConvolutionScheme select_scheme(std::span<const double> random_scales, double deterministic_scale) {
  if (random_scales.empty()) throw InvalidInput("scheme needs at least one random scale");
  const double b = deterministic_scale;
  if (!(b > 0.0 && b < 1.0)) throw InvalidInput("deterministic scale must lie in (0,1)");
  for (double a : random_scales) {
    if (!(a > 0.0 && a < 1.0)) throw InvalidInput("random scales must lie in (0,1)");
  }
  ConvolutionScheme s;
  s.random_scales.assign(random_scales.begin(), random_scales.end());
  s.deterministic_scale = b;
  const double a_max = *std::max_element(random_scales.begin(), random_scales.end());
  const double a_min = *std::min_element(random_scales.begin(), random_scales.end());
  // Logs keep the comparisons exact-enough for large r.
  const double lb = std::log(b);
  while (!(lb - s.r * std::log(a_max) > 0.0)) ++s.r;
  const double top = lb - s.r * std::log(a_min);
  while (!(top < -s.l * lb)) ++s.l;
  s.beta = -s.l * lb;

  const std::size_t n = random_scales.size();
  std::size_t tuples = 1;
  for (int k = 0; k < s.r; ++k) {
    tuples *= n;
    if (tuples > (1u << 22)) throw ResourceError("too many r-blocks in the convolution scheme");
  }
  s.alphas.resize(tuples);
  for (std::size_t code = 0; code < tuples; ++code) {
    double log_prod = 0.0;
    std::size_t c = code;
    for (int k = 0; k < s.r; ++k) {
      log_prod += std::log(random_scales[c % n]);
      c /= n;
    }
    const double a = lb - log_prod;
    if (!(a > 0.0 && a < s.beta)) throw PreconditionViolation("rotation increment outside (0, beta)");
    s.alphas[code] = a;
  }
  return s;
}

namespace {

struct BetaOrbit {
  double fiber = 0.0;
  std::size_t crossings = 0;
};

BetaOrbit run_orbit(const ConvolutionScheme& scheme, std::span<const int> omega, std::size_t n) {
  const auto r = static_cast<std::size_t>(scheme.r);
  if (n * r > omega.size()) throw PreconditionViolation("beta orbit exhausts the omega prefix");
  BetaOrbit o;
  for (std::size_t k = 0; k < n; ++k) {
    o.fiber += scheme.alpha(omega.subspan(k * r, r));
    if (o.fiber >= scheme.beta) {
      o.fiber -= 2.0 * scheme.beta;
      ++o.crossings;
    }
  }
  return o;
}

}  // namespace

std::size_t crossing_count(const ConvolutionScheme& scheme, std::span<const int> omega, std::size_t n) {
  return run_orbit(scheme, omega, n).crossings;
}

double beta_orbit(const ConvolutionScheme& scheme, std::span<const int> omega, std::size_t n) {
  return run_orbit(scheme, omega, n).fiber;
}

FamilyShape family_rectangles(const ConvolutionScheme& scheme, std::span<const int> omega,
                              std::size_t n, Family which) {
  const auto l = static_cast<std::size_t>(scheme.l);
  if (which == Family::Z && n < 3 * l) throw PreconditionViolation("Z family needs n >= 3l");
  const BetaOrbit o = run_orbit(scheme, omega, n);
  FamilyShape f;
  f.family = which;
  f.n = n;
  f.random_word_len = n * static_cast<std::size_t>(scheme.r);
  f.crossing_count = o.crossings;
  f.fiber = o.fiber;
  std::size_t len = n + 2 * l * o.crossings;
  if (which == Family::Y) len += 2 * l;
  if (which == Family::Z) len -= 2 * l;
  f.deterministic_word_len = len;
  for (std::size_t k = 0; k < f.random_word_len; ++k) {
    f.log_width += std::log(scheme.random_scales[static_cast<std::size_t>(omega[k])]);
  }
  f.log_height = static_cast<double>(len) * std::log(scheme.deterministic_scale);
  const double log_ecc = f.log_height - f.log_width;
  f.eccentricity = std::exp(log_ecc);
  // Rounding in the two log sums is far below 1e-9 of beta.
  const double tol = 1e-9 * std::max(1.0, scheme.beta);
  const double centre = which == Family::W ? 0.0 : which == Family::Y ? -2.0 * scheme.beta : 2.0 * scheme.beta;
  f.in_bracket = log_ecc >= centre - scheme.beta - tol && log_ecc < centre + scheme.beta + tol;
  return f;
}

std::vector<double> log_t_grid(double beta, std::size_t count) {
  if (!(beta > 0.0)) throw InvalidInput("beta must be positive");
  if (count == 0) throw InvalidInput("t grid needs at least one point");
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k) {
    t[k] = std::exp(-beta + 2.0 * beta * static_cast<double>(k) / static_cast<double>(count));
  }
  return t;
}

std::vector<ConvolutionPoint> convolution_dimension_sweep(
    const MeasureAtLevel& nu, const MeasureAtLevel& theta, double q, std::span<const double> t_grid,
    std::pair<int, int> window, std::optional<double> closed_form, int refine, unsigned threads) {
  if (t_grid.empty()) throw InvalidInput("t grid is empty");
  if (refine < 0) throw InvalidInput("refine must be non-negative");
  const DyadicMeasure a = nu(window.second + refine);
  const DyadicMeasure b = theta(window.second + refine);
  std::vector<ConvolutionPoint> out(t_grid.size());
  parallel_for(t_grid.size(), threads, [&](std::size_t k) {
    ConvolutionPoint& p = out[k];
    p.t = t_grid[k];
    p.curve = estimate_dimension(convolve_measures(a, b, p.t, window.second), q, window);
    p.closed_form = closed_form;
    if (closed_form) p.abs_err = std::abs(p.curve.dimension - *closed_form);
  });
  return out;
}

std::pair<double, double> sweep_error_and_spread(std::span<const ConvolutionPoint> points) {
  double err = 0.0, lo = INFINITY, hi = -INFINITY;
  for (const auto& p : points) {
    err = std::max(err, p.abs_err);
    lo = std::min(lo, p.curve.dimension);
    hi = std::max(hi, p.curve.dimension);
  }
  return {err, points.empty() ? 0.0 : hi - lo};
}

Additivity additivity_formula(double nu_dim, double theta_dim, double a, double b) {
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) throw InvalidInput("scales must lie in (0,1)");
  return {std::min(nu_dim + theta_dim, 1.0), !detect_rational(std::log(a) / std::log(b)).rational};
}

void write_convolution_csv(std::ostream& out, std::span<const ConvolutionPoint> points) {
  out << "t,q,dimension,residual,closed_form,abs_err\n" << std::setprecision(17);
  for (const auto& p : points) {
    out << p.t << ',' << p.curve.q << ',' << p.curve.dimension << ',' << p.curve.residual << ',';
    if (p.closed_form) out << *p.closed_form;
    out << ',' << p.abs_err << '\n';
  }
}

}  // namespace lqdim
