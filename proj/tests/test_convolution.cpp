#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lqdim/convolution_model.hpp"
#include "lqdim/dynamics.hpp"
#include "lqdim/error.hpp"
#include "lqdim/measure_builder.hpp"

using namespace lqdim;

namespace {

RuleSet cantor(double a, double p0 = 0.5) {
  return RuleSet({Rule(a, 0, {{0, 0}, {1 - a, 0}}, {p0, 1 - p0})}, 1);
}

MeasureAtLevel builder(RuleSet rs) {
  return [rs](int level) {
    const std::vector<int> omega(128, 0);
    return build_measure(rs, omega, depth_for_level(rs, omega, level) + 2, level);
  };
}

}  // namespace

TEST_SUITE("convolution_model") {
  TEST_CASE("scheme selection examples") {
    const std::vector<double> quarter{0.25};
    const auto s = select_scheme(quarter, 1.0 / 3);
    CHECK(s.r == 1);
    CHECK(s.l == 1);
    CHECK(s.beta == doctest::Approx(1.098612).epsilon(1e-6));
    const std::vector<int> zero{0};
    CHECK(s.alpha(zero) == doctest::Approx(0.287682).epsilon(1e-6));

    const std::vector<double> half{0.5};
    const auto h = select_scheme(half, 0.4);
    CHECK(h.r == 2);
    CHECK(h.l == 1);
    CHECK(h.beta == doctest::Approx(std::log(2.5)));
    const std::vector<int> zz{0, 0};
    CHECK(h.alpha(zz) == doctest::Approx(std::log(1.6)));

    const std::vector<double> third{1.0 / 3};
    const auto t = select_scheme(third, 1.0 / 3);
    CHECK(t.r == 2);
    CHECK(detect_rational(std::log(1.0 / 3) / std::log(1.0 / 3)).rational);

    CHECK_THROWS_AS(select_scheme(half, 1.0), InvalidInput);
    const std::vector<double> bad{1.5};
    CHECK_THROWS_AS(select_scheme(bad, 0.5), InvalidInput);
  }

  TEST_CASE("scheme constraints hold") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ua(0.05, 0.6), ub(0.3, 0.95);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> a(1 + rng() % 3);
      for (auto& x : a) x = ua(rng);
      const double b = ub(rng);
      const auto s = select_scheme(a, b);
      double lo = 1e300, hi = 0;
      for (double x : a) {
        lo = std::min(lo, b / std::pow(x, s.r));
        hi = std::max(hi, b / std::pow(x, s.r));
      }
      CHECK(lo > 1.0);
      CHECK(hi < std::pow(b, -s.l));
      if (s.r > 1) {
        double prev = 1e300;
        for (double x : a) prev = std::min(prev, b / std::pow(x, s.r - 1));
        CHECK(prev <= 1.0);
      }
      if (s.l > 1) CHECK(hi >= std::pow(b, -(s.l - 1)));
      CHECK(s.beta == doctest::Approx(-s.l * std::log(b)));
      for (double al : s.alphas) {
        CHECK(al > 0.0);
        CHECK(al < s.beta);
      }
    }
  }

  TEST_CASE("alphas are indexed with the first symbol most significant") {
    const std::vector<double> a{0.3, 0.6};
    const auto s = select_scheme(a, 0.5);
    REQUIRE(s.r >= 2);
    std::vector<int> block(static_cast<std::size_t>(s.r), 0);
    block[0] = 1;
    double expect = std::log(0.5 / 0.6);
    for (int k = 1; k < s.r; ++k) expect -= std::log(0.3);
    CHECK(s.alpha(block) == doctest::Approx(expect));
    CHECK(s.alphas[std::size_t{1} << (s.r - 1)] == doctest::Approx(expect));
  }

  TEST_CASE("crossing counts") {
    const std::vector<double> quarter{0.25};
    const auto s = select_scheme(quarter, 1.0 / 3);
    const std::vector<int> omega(2000, 0);
    CHECK(crossing_count(s, omega, 3) == 0);
    CHECK(crossing_count(s, omega, 4) == 1);
    CHECK_THROWS_AS(crossing_count(s, omega, 2001), PreconditionViolation);

    const std::vector<double> near_b{0.3299};
    const auto tiny = select_scheme(near_b, 0.33);
    CHECK(crossing_count(tiny, omega, 10) == 0);

    const std::vector<double> a{0.25, 0.2};
    const auto two = select_scheme(a, 1.0 / 3);
    const std::vector<double> w{0.5, 0.5};
    const auto om = sample_omega(w, 4000, 8);
    std::size_t prev = 0;
    double alpha_sum = 0.0;
    for (std::size_t n = 1; n * static_cast<std::size_t>(two.r) <= om.size() && n <= 1000; ++n) {
      const std::size_t xi = crossing_count(two, om.symbols, n);
      CHECK(xi - prev <= 1);
      CHECK(xi >= prev);
      prev = xi;
      alpha_sum += two.alpha(om.view((n - 1) * static_cast<std::size_t>(two.r)));
      const double orbit = beta_orbit(two, om.symbols, n);
      CHECK(std::abs(orbit - (alpha_sum - 2 * two.beta * static_cast<double>(xi))) < 1e-9);
      const auto st = skew_step_beta(two, om.symbols, {0, 0.0}, n);
      CHECK(std::abs(st.fiber - orbit) < 1e-9);
    }
  }

  TEST_CASE("family rectangles") {
    const std::vector<double> quarter{0.25};
    const auto s = select_scheme(quarter, 1.0 / 3);
    const std::vector<int> omega(100, 0);
    const auto w3 = family_rectangles(s, omega, 3, Family::W);
    CHECK(w3.crossing_count == 0);
    CHECK(w3.deterministic_word_len == 3);
    const auto w = family_rectangles(s, omega, 4, Family::W);
    const auto y = family_rectangles(s, omega, 4, Family::Y);
    const auto z = family_rectangles(s, omega, 4, Family::Z);
    CHECK(w.crossing_count == 1);
    CHECK(w.deterministic_word_len == 6);
    CHECK(y.deterministic_word_len == 8);
    CHECK(z.deterministic_word_len == 4);
    CHECK(w.random_word_len == 4);
    CHECK(w.log_width == doctest::Approx(4 * std::log(0.25)));
    CHECK(w.eccentricity == doctest::Approx(std::exp(beta_orbit(s, omega, 4))));
    CHECK(w.in_bracket);
    CHECK(y.in_bracket);
    CHECK(z.in_bracket);
    CHECK_THROWS_AS(family_rectangles(s, omega, 2, Family::Z), PreconditionViolation);
  }

  TEST_CASE("eccentricities stay in their brackets") {
    const std::vector<double> a{0.25, 0.2};
    const auto s = select_scheme(a, 1.0 / 3);
    const std::vector<double> w{0.5, 0.5};
    const auto om = sample_omega(w, 1000 * static_cast<std::size_t>(s.r), 3);
    for (std::size_t n = 1; n <= 1000; ++n) {
      const auto fw = family_rectangles(s, om.symbols, n, Family::W);
      CHECK(fw.in_bracket);
      CHECK(fw.eccentricity >= std::exp(-s.beta) * (1 - 1e-9));
      CHECK(fw.eccentricity < std::exp(s.beta) * (1 + 1e-9));
      CHECK(family_rectangles(s, om.symbols, n, Family::Y).in_bracket);
      if (n >= 3 * static_cast<std::size_t>(s.l)) {
        const auto fz = family_rectangles(s, om.symbols, n, Family::Z);
        CHECK(fz.in_bracket);
        CHECK(fz.eccentricity > std::exp(-3 * s.beta));
        CHECK(fz.eccentricity < std::exp(3 * s.beta) * (1 + 1e-9));
      }
    }
  }

  TEST_CASE("log t grid") {
    const auto g = log_t_grid(std::log(3.0), 32);
    CHECK(g.size() == 32);
    CHECK(g.front() == doctest::Approx(1.0 / 3));
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(g[k] >= 1.0 / 3 - 1e-15);
      CHECK(g[k] < 3.0);
      if (k) CHECK(std::log(g[k]) - std::log(g[k - 1]) == doctest::Approx(2 * std::log(3.0) / 32));
    }
    CHECK_THROWS_AS(log_t_grid(0.0, 4), InvalidInput);
  }

  TEST_CASE("convolving with a point mass keeps the dimension") {
    const auto nu = builder(cantor(1.0 / 3));
    const MeasureAtLevel delta = [](int level) { return DyadicMeasure::point_mass(1, level); };
    const auto base = estimate_dimension(nu(12), 2.0, {7, 12}).dimension;
    const std::vector<double> ts{0.4, 1.0, 2.7};
    const auto pts = convolution_dimension_sweep(nu, delta, 2.0, ts, {7, 12}, base, 3, 1);
    REQUIRE(pts.size() == 3);
    for (const auto& p : pts) CHECK(std::abs(p.curve.dimension - base) < 0.02);
  }

  TEST_CASE("supercritical pair fills the line") {
    const auto beta = std::log(3.0);
    const auto ts = log_t_grid(beta, 4);
    const auto pts = convolution_dimension_sweep(builder(cantor(0.25)), builder(cantor(1.0 / 3)), 2.0, ts, {8, 13}, 1.0);
    for (const auto& p : pts) CHECK(p.curve.dimension >= 0.9);
    const auto [err, spread] = sweep_error_and_spread(pts);
    CHECK(err < 0.1);
    CHECK(spread >= 0.0);
    std::ostringstream out;
    write_convolution_csv(out, pts);
    CHECK(out.str().rfind("t,q,dimension,residual,closed_form,abs_err\n", 0) == 0);
  }

  TEST_CASE("additivity formula") {
    const auto full = additivity_formula(0.5, 0.63093, 0.25, 1.0 / 3);
    CHECK(full.value == 1.0);
    CHECK(full.irrational);
    const auto sub = additivity_formula(0.12331, 0.63093, 0.2, 1.0 / 3);
    CHECK(sub.value == doctest::Approx(0.75424));
    CHECK(sub.irrational);
    CHECK(additivity_formula(0.4, 0.0, 0.5, 0.3).value == doctest::Approx(0.4));
    CHECK(additivity_formula(1.4, 0.0, 0.5, 0.3).value == 1.0);
    CHECK_FALSE(additivity_formula(0.4, 0.3, 1.0 / 9, 1.0 / 3).irrational);
    CHECK_FALSE(additivity_formula(0.4, 0.3, 1.0 / 3, 1.0 / 3).irrational);
  }
}
