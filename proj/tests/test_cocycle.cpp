#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lqdim/cocycle.hpp"
#include "lqdim/dynamics.hpp"
#include "lqdim/error.hpp"
#include "lqdim/measure_builder.hpp"
#include "oracles.hpp"

using namespace lqdim;

namespace {

RuleSet corners() { return RuleSet({Rule::uniform(0.2, 1.0, {{0, 0}, {0.8, 0}, {0, 0.8}, {0.8, 0.8}})}, 2); }
RuleSet point_rule() { return RuleSet({Rule::uniform(0.4, 0.5, {{0.3, 0.2}})}, 2); }
RuleSet lebesgue() { return RuleSet({Rule::uniform(0.5, 0, {{0, 0}, {0.5, 0}})}, 1); }
RuleSet two_rules() {
  return RuleSet({Rule::uniform(0.25, 1.0, {{-0.7, 0}, {0.7, 0}}),
                  Rule::uniform(1.0 / 3, 0.0, {{0.6, 0}, {-0.3, 0.5196152422706632}, {-0.3, -0.5196152422706632}})},
                 2);
}

std::vector<int> zeros(std::size_t n) { return std::vector<int>(n, 0); }

}  // namespace

TEST_SUITE("cocycle") {
  TEST_CASE("bump") {
    CHECK(bump(0.0) == 1.0);
    CHECK(bump(1.0) == 1.0);
    CHECK(bump(-1.0) == 1.0);
    CHECK(bump(2.0) == 0.0);
    CHECK(bump(-2.5) == 0.0);
    CHECK(bump(1.5) == doctest::Approx(0.5));
    for (double x = -3; x <= 3; x += 0.01) {
      CHECK(bump(x) >= 0.0);
      CHECK(bump(x) <= 1.0);
      CHECK(bump(x) == bump(-x));
    }
  }

  TEST_CASE("point mass rule") {
    const auto rs = point_rule();
    const auto omega = zeros(12);
    for (double v : {0.0, 1.0, 4.0}) {
      for (std::size_t n : {0, 1, 5, 9}) {
        CHECK(tau(rs, omega, v, n, 2.0) == doctest::Approx(1.0));
        CHECK(tau_smooth(rs, omega, v, n, 1.5) == doctest::Approx(1.0));
        const auto eq = check_equivalence(rs, omega, v, n, 2.0);
        CHECK(eq.ratio_low == doctest::Approx(1.0));
        CHECK(eq.pass);
      }
      const auto sub = check_submultiplicative(rs, omega, v, 3, 4, 2.0);
      CHECK(sub.lhs == doctest::Approx(1.0));
      CHECK(sub.rhs == doctest::Approx(54.0 * 54.0));
      CHECK(sub.pass);
    }
    CHECK(xi_planar(rs, omega, 4, 2.0) == doctest::Approx(1.0));
  }

  TEST_CASE("Lebesgue rule") {
    const auto rs = lebesgue();
    const auto omega = zeros(20);
    for (std::size_t n = 1; n <= 12; ++n) {
      const auto s = sample_cocycle(rs, omega, 0.0, n, 2.0);
      const double unit = std::ldexp(1.0, -static_cast<int>(n));
      CHECK(s.tau == doctest::Approx(unit).epsilon(1e-12));
      CHECK(s.tau_smooth >= unit * (1 - 1e-12));
      CHECK(s.tau_smooth <= 5 * unit * (1 + 1e-12));
      const auto eq = check_equivalence(s);
      CHECK(eq.pass);
      CHECK(eq.ratio_low >= 1.0);
      CHECK(eq.ratio_low <= 5.0);
    }
  }

  TEST_CASE("tau and tau_smooth match brute force") {
    const auto rs = two_rules();
    const std::vector<double> w{0.5, 0.5};
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> angle(0, kTwoPi);
    for (int trial = 0; trial < 20; ++trial) {
      const auto omega = sample_omega(w, 12, 100 + trial);
      const std::size_t n = 1 + rng() % 5;
      const double v = angle(rng);
      const double q = trial % 2 ? 2.0 : 1.5;
      CocycleOptions opts;
      opts.extra_depth = 2;
      const auto pts = oracle::project(oracle::cylinders(rs, omega.symbols, n + 2), v);
      const int level = normalization_level(rs, omega.symbols, n);
      const auto s = sample_cocycle(rs, omega.symbols, v, n, q, opts);
      CHECK(s.tau == doctest::Approx(oracle::correlation(pts, level, q, false)).epsilon(1e-12));
      CHECK(tau(rs, omega.symbols, v, n, q, opts) == doctest::Approx(s.tau).epsilon(1e-12));
      CHECK(s.tau_smooth == doctest::Approx(oracle::smooth_moment(pts, level, opts.smooth_refine, q)).epsilon(1e-12));
    }
  }

  TEST_CASE("smooth moment preconditions") {
    const auto m = DyadicMeasure::point_mass(1, 5);
    CHECK(smooth_moment(m, 3, 2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(smooth_moment(m, 6, 2.0), PreconditionViolation);
    CHECK_THROWS_AS(smooth_moment(m, 3, 1.0), InvalidInput);
    CHECK_THROWS_AS(smooth_moment(DyadicMeasure::point_mass(2, 5), 3, 2.0), InvalidInput);
  }

  TEST_CASE("submultiplicativity on sampled instances") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(0, kTwoPi), qd(1.05, 2.0);
    const std::vector<double> w{0.5, 0.5};
    for (const auto& rs : {corners(), two_rules()}) {
      int passed = 0;
      for (int trial = 0; trial < 200; ++trial) {
        const auto omega = sample_omega(w.size() == rs.size() ? w : std::vector<double>{1.0}, 16, rng());
        const std::size_t n = rng() % 5, m = 1 + rng() % 4;
        const double q = trial < 100 ? 2.0 : qd(rng);
        const auto c = check_submultiplicative(rs, omega.symbols, angle(rng), n, m, q);
        CHECK(c.lhs > 0.0);
        CHECK(c.lhs <= 1.0 + 1e-12);
        passed += c.pass ? 1 : 0;
      }
      CHECK(passed == 200);
    }
  }

  TEST_CASE("tau and tau_smooth equivalence on sampled instances") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> angle(0, kTwoPi);
    const std::vector<double> w{0.5, 0.5};
    for (const auto& rs : {corners(), two_rules()}) {
      for (int trial = 0; trial < 200; ++trial) {
        const auto omega = sample_omega(w.size() == rs.size() ? w : std::vector<double>{1.0}, 12, rng());
        const std::size_t n = 1 + rng() % 7;
        const double q = trial % 2 ? 1.5 : 2.0;
        const auto s = sample_cocycle(rs, omega.symbols, angle(rng), n, q);
        const auto c = check_equivalence(s);
        CHECK(c.pass);
        CHECK(s.tau <= 1.0 + 1e-12);
        CHECK(s.tau_smooth <= std::pow(5.0, q - 1) + 1e-12);
        if (q == 1.5) CHECK(c.ratio_low <= std::sqrt(5.0) * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("planar cocycle") {
    CHECK(xi_planar(corners(), zeros(4), 1, 2.0) == doctest::Approx(0.25));
    CHECK(xi_planar(corners(), zeros(4), 0, 2.0) == 1.0);
    CHECK_THROWS_AS(xi_planar(lebesgue(), zeros(4), 1, 2.0), InvalidInput);
  }

  TEST_CASE("phi estimate") {
    const std::vector<std::size_t> ns{2, 3, 4, 5, 6, 7, 8};
    const std::vector<double> one{1.0};
    const auto point = estimate_phi(point_rule(), one, 2.0, ns, 4);
    CHECK(std::abs(point.dimension) < 1e-12);
    CHECK(point.running_inf.back() == doctest::Approx(2 * std::log2(54.0) / 8));

    const auto leb = estimate_phi(lebesgue(), one, 2.0, ns, 4);
    CHECK(std::abs(leb.dimension - 1.0) < 0.05);

    const auto corner = estimate_phi(corners(), one, 2.0, ns, 64);
    CHECK(std::abs(corner.dimension - std::log(4.0) / std::log(5.0)) < 0.05);
    for (std::size_t k = 1; k < ns.size(); ++k) CHECK(corner.running_inf[k] <= corner.running_inf[k - 1]);

    const std::vector<std::size_t> none;
    CHECK_THROWS_AS(estimate_phi(corners(), one, 2.0, none, 4), InvalidInput);

    std::ostringstream out;
    write_phi_csv(out, corner);
    CHECK(out.str().rfind("n,avg_phi,phi_over_n,running_inf\n", 0) == 0);
  }

  TEST_CASE("phi estimate is reproducible") {
    const std::vector<std::size_t> ns{2, 4, 6};
    const std::vector<double> w{0.5, 0.5};
    const auto a = estimate_phi(two_rules(), w, 1.5, ns, 8, 5, {}, 1);
    const auto b = estimate_phi(two_rules(), w, 1.5, ns, 8, 5, {}, 1);
    CHECK(a.avg_phi == b.avg_phi);
  }
}
