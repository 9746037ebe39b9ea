#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "lqdim/dynamics.hpp"
#include "lqdim/error.hpp"
#include "lqdim/lq_spectrum.hpp"
#include "lqdim/measure_builder.hpp"
#include "oracles.hpp"

using namespace lqdim;

namespace {

RuleSet corners(double rotation = 1.0) {
  return RuleSet({Rule::uniform(0.2, rotation, {{0, 0}, {0.8, 0}, {0, 0.8}, {0.8, 0.8}})}, 2);
}
RuleSet middle_thirds() { return RuleSet({Rule::uniform(1.0 / 3, 0, {{0, 0}, {2.0 / 3, 0}})}, 1); }
RuleSet lebesgue() { return RuleSet({Rule::uniform(0.5, 0, {{0, 0}, {0.5, 0}})}, 1); }
RuleSet mixed() {
  return RuleSet({Rule(0.25, 1.0, {{-0.7, 0}, {0.7, 0}}, {0.3, 0.7}),
                  Rule::uniform(1.0 / 3, 0.0, {{0.6, 0}, {-0.3, 0.5196152422706632}, {-0.3, -0.5196152422706632}})},
                 2);
}

std::vector<int> zeros(std::size_t n) { return std::vector<int>(n, 0); }

double mass_at(const DyadicMeasure& m, std::int64_t i, std::int64_t j = 0) {
  for (const auto& c : m.cells()) {
    if (c.index.i == i && c.index.j == j) return c.mass;
  }
  return 0.0;
}

}  // namespace

TEST_SUITE("measure_builder") {
  TEST_CASE("sample_omega") {
    const std::vector<double> one{1.0};
    const auto c = sample_omega(one, 50, 3);
    CHECK(std::all_of(c.symbols.begin(), c.symbols.end(), [](int s) { return s == 0; }));
    const std::vector<double> half{0.5, 0.5};
    const auto a = sample_omega(half, 100000, 11);
    const auto b = sample_omega(half, 100000, 11);
    CHECK(a.symbols == b.symbols);
    const double freq = std::count(a.symbols.begin(), a.symbols.end(), 0) / 1e5;
    CHECK(std::abs(freq - 0.5) < 0.01);
    const std::vector<double> bad{0.0, 0.0};
    CHECK_THROWS_AS(sample_omega(bad, 10, 1), InvalidInput);
  }

  TEST_CASE("Lebesgue rule gives the uniform measure") {
    const auto m = build_measure(lebesgue(), zeros(10), 10, 10);
    CHECK(m.size() == 1024);
    for (const auto& c : m.cells()) CHECK(c.mass == doctest::Approx(1.0 / 1024).epsilon(1e-12));
  }

  TEST_CASE("middle thirds depth 2 at level 3") {
    const auto m = build_measure(middle_thirds(), zeros(2), 2, 3);
    CHECK(m.size() == 4);
    // Centers 1/18, 5/18, 13/18, 17/18 fall in cells 0, 2, 5, 7 of width 1/8.
    for (auto i : {0, 2, 5, 7}) CHECK(mass_at(m, i) == doctest::Approx(0.25));
  }

  TEST_CASE("planar corners depth 1 at level 2") {
    const auto m = build_measure(corners(), zeros(1), 1, 2);
    CHECK(m.size() == 4);
    for (const auto& c : m.cells()) CHECK(c.mass == doctest::Approx(0.25));
  }

  TEST_CASE("level precondition names the required depth") {
    try {
      build_measure(middle_thirds(), zeros(10), 2, 6);
      FAIL("expected an exception");
    } catch (const PreconditionViolation& e) {
      CHECK(std::string(e.what()).find("depth 4") != std::string::npos);
    }
    CHECK_THROWS_AS(build_measure(middle_thirds(), zeros(2), 3, 1), PreconditionViolation);
  }

  TEST_CASE("projection examples") {
    const Point2 e1{1, 0};
    const auto p = project_measure(corners(0.0), zeros(1), e1, 1, 2);
    CHECK(p.size() == 2);
    CHECK(mass_at(p, 0) == doctest::Approx(0.5));
    CHECK(mass_at(p, 3) == doctest::Approx(0.5));
    const RuleSet point({Rule::uniform(0.5, 0.3, {{0.2, 0.1}})}, 2);
    for (double a : {0.0, 1.0, 2.5}) {
      const auto m = project_measure(point, zeros(6), {std::cos(a), std::sin(a)}, 6, 5);
      CHECK(m.size() == 1);
      CHECK(m.total_mass() == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(project_measure(corners(), zeros(1), {1, 1}, 1, 2), InvalidInput);
  }

  TEST_CASE("projection onto e1 is the first marginal") {
    const auto rs = corners(0.0);
    const auto planar = build_measure(rs, zeros(5), 5, 9);
    const auto proj = project_measure(rs, zeros(5), {1, 0}, 5, 9);
    std::map<std::int64_t, double> marginal;
    for (const auto& c : planar.cells()) marginal[c.index.i] += c.mass;
    CHECK(marginal.size() == proj.size());
    for (const auto& c : proj.cells()) CHECK(c.mass == doctest::Approx(marginal[c.index.i]).epsilon(1e-12));
  }

  TEST_CASE("builders agree with brute-force enumeration") {
    const auto rs = mixed();
    const std::vector<double> w{0.5, 0.5};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto omega = sample_omega(w, 7, seed);
      const auto pts = oracle::cylinders(rs, omega.symbols, 7);
      const int level = normalization_level(rs, omega.symbols, 7);
      const auto m = build_measure(rs, omega.symbols, 7, level);
      CHECK(m.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(correlation_sum(m, 2.0) == doctest::Approx(oracle::correlation(pts, level, 2.0, true)).epsilon(1e-12));
      for (double a : {0.0, 0.4, 1.9, 3.3}) {
        const auto pm = project_measure(rs, omega.symbols, {std::cos(a), std::sin(a)}, 7, level);
        CHECK(pm.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(correlation_sum(pm, 1.5) ==
              doctest::Approx(oracle::correlation(oracle::project(pts, a), level, 1.5, false)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("coarser builds equal rebinned finer builds") {
    const auto rs = mixed();
    const std::vector<double> w{0.5, 0.5};
    const auto omega = sample_omega(w, 8, 9);
    const int level = normalization_level(rs, omega.symbols, 8);
    const auto fine = build_measure(rs, omega.symbols, 8, level);
    const auto coarse = build_measure(rs, omega.symbols, 8, level - 1);
    const auto rebinned = fine.rebin(level - 1);
    REQUIRE(coarse.size() == rebinned.size());
    for (std::size_t k = 0; k < coarse.size(); ++k) {
      CHECK(coarse.cells()[k].index == rebinned.cells()[k].index);
      CHECK(coarse.cells()[k].mass == doctest::Approx(rebinned.cells()[k].mass).epsilon(1e-12));
    }
  }

  TEST_CASE("thread count does not change the cell set") {
    const auto rs = corners();
    BuildOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto a = build_measure(rs, zeros(7), 7, 12, one);
    const auto b = build_measure(rs, zeros(7), 7, 12, four);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a.cells()[k].index == b.cells()[k].index);
      CHECK(std::abs(a.cells()[k].mass - b.cells()[k].mass) < 1e-12);
    }
  }

  TEST_CASE("project_measures matches project_measure") {
    const auto rs = corners();
    std::vector<Point2> dirs;
    for (int k = 0; k < 5; ++k) dirs.push_back({std::cos(0.7 * k), std::sin(0.7 * k)});
    const auto many = project_measures(rs, zeros(5), dirs, 5, 10);
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const auto single = project_measure(rs, zeros(5), dirs[k], 5, 10);
      REQUIRE(single.size() == many[k].size());
      for (std::size_t c = 0; c < single.size(); ++c) {
        CHECK(single.cells()[c].index == many[k].cells()[c].index);
        CHECK(single.cells()[c].mass == doctest::Approx(many[k].cells()[c].mass).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("convolution examples") {
    const auto nu = build_measure(middle_thirds(), zeros(6), 6, 9);
    const auto delta = DyadicMeasure::point_mass(1, 12, {0.0, 0.0});
    const auto same = convolve_measures(nu, delta, 0.7, 9);
    REQUIRE(same.size() == nu.size());
    for (std::size_t k = 0; k < nu.size(); ++k) {
      CHECK(same.cells()[k].index == nu.cells()[k].index);
      CHECK(same.cells()[k].mass == doctest::Approx(nu.cells()[k].mass));
    }

    const DyadicMeasure fair(1, 0, {{{0, 0}, 0.5}, {{1, 0}, 0.5}});
    const auto bin = convolve_measures(fair, fair, 1.0, 0);
    CHECK(bin.size() == 3);
    CHECK(mass_at(bin, 1) == doctest::Approx(0.25));
    CHECK(mass_at(bin, 2) == doctest::Approx(0.5));
    CHECK(mass_at(bin, 3) == doctest::Approx(0.25));

    const auto mt1 = build_measure(middle_thirds(), zeros(1), 1, 2);
    const auto conv = convolve_measures(mt1, mt1, 1.0 / 3, 6);
    CHECK(conv.total_mass() == doctest::Approx(1.0));
    std::vector<double> sums;
    for (double x : {mt1.center(mt1.cells()[0].index.i), mt1.center(mt1.cells()[1].index.i)}) {
      for (double y : {mt1.center(mt1.cells()[0].index.i), mt1.center(mt1.cells()[1].index.i)}) sums.push_back(x + y / 3);
    }
    for (double s : sums) CHECK(mass_at(conv, dyadic_floor(s, 6)) == doctest::Approx(0.25));
    CHECK_THROWS_AS(convolve_measures(fair, fair, 0.0, 0), InvalidInput);
  }

  TEST_CASE("condition (c) for product measures") {
    const auto rs = mixed();
    const std::vector<double> w{0.5, 0.5};
    const auto omega = sample_omega(w, 10, 2);
    CHECK(check_condition_c(rs, omega.symbols, 0, 3) == doctest::Approx(1.0));
    CHECK(check_condition_c(rs, omega.symbols, 3, 4) == doctest::Approx(1.0).epsilon(1e-12));
    // Words starting 00 get 1.5x mass; the worst ratio is exactly 1.5.
    const CylinderMassFn tilted = [&](std::span<const int> om, std::span<const int> word) {
      double m = 1.0;
      for (std::size_t k = 0; k < word.size(); ++k) m *= rs.rule(static_cast<std::size_t>(om[k])).probs()[static_cast<std::size_t>(word[k])];
      if (word.size() >= 2 && word[0] == 0 && word[1] == 0) m *= 1.5;
      return m;
    };
    const double ratio = check_condition_c(rs, omega.symbols, 1, 2, tilted);
    CHECK(ratio == doctest::Approx(1.5).epsilon(1e-12));
  }

  TEST_CASE("CSV round trip") {
    const auto m = build_measure(corners(), zeros(3), 3, 6);
    std::stringstream s;
    m.write_csv(s);
    const auto back = DyadicMeasure::read_csv(s);
    CHECK(back.level() == m.level());
    CHECK(back.dim() == 2);
    REQUIRE(back.size() == m.size());
    for (std::size_t k = 0; k < m.size(); ++k) CHECK(back.cells()[k].mass == m.cells()[k].mass);
  }
}
