#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "sfde/coefficient.hpp"
#include "sfde/holder.hpp"
#include "sfde/rng.hpp"

using namespace sfde;
using namespace sfde::coefficient;

TEST_SUITE_BEGIN("coefficient");

namespace {

constexpr double kTau = 0.1;
constexpr std::size_t kSteps = 50;

FunctionalCoefficient paper_coefficient() {
  return FunctionalCoefficient::integral_functional(OuterFunction::sin_shift(),
                                                    Measure::lebesgue());
}

// Samples xi(theta) = theta^2 + 2 on the segment grid.
std::vector<double> quadratic_segment(std::size_t n = kSteps) {
  std::vector<double> psi(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double theta = -kTau + kTau * static_cast<double>(j) / n;
    psi[j] = theta * theta + 2.0;
  }
  return psi;
}

// Random continuous-ish segment: a scaled random walk plus a level shift.
std::vector<double> random_segment(std::uint64_t seed, std::size_t n = kSteps) {
  rng::SplitMix64 gen(seed);
  std::vector<double> psi(n + 1);
  psi[0] = 2.0 * gen.next_gaussian();
  for (std::size_t j = 1; j <= n; ++j) {
    psi[j] = psi[j - 1] + 0.3 * gen.next_gaussian();
  }
  return psi;
}

}  // namespace

TEST_CASE("evaluation closed forms") {
  const auto f = paper_coefficient();

  SUBCASE("zero segment") {
    const std::vector<double> zero(kSteps + 1, 0.0);
    CHECK(f.evaluate(zero, kTau) == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("quadratic initial segment") {
    // inner integral tau^3/3 + 2 tau, f = I + sin I, 30-digit reference
    CHECK(f.evaluate(quadratic_segment(), kTau) ==
          doctest::Approx(0.39932934194444023).epsilon(1e-5));
  }

  SUBCASE("point delay on a constant segment") {
    const auto g = FunctionalCoefficient::point_delay(OuterFunction::identity());
    const std::vector<double> one(kSteps + 1, 1.0);
    CHECK(g.evaluate(one, kTau) == 1.0);
  }

  SUBCASE("constant coefficient ignores the segment") {
    const auto c = FunctionalCoefficient::constant(-2.5);
    CHECK(c.evaluate(quadratic_segment(), kTau) == -2.5);
  }
}

TEST_CASE("quadrature properties") {
  const auto linear_f = FunctionalCoefficient::integral_functional(
      OuterFunction::identity(), Measure::lebesgue());

  SUBCASE("exact for affine segments") {
    // psi = a + b theta integrates to a tau - b tau^2 / 2
    const double a = 1.7, b = -0.9;
    std::vector<double> psi(kSteps + 1);
    for (std::size_t j = 0; j <= kSteps; ++j) {
      const double theta = -kTau + kTau * static_cast<double>(j) / kSteps;
      psi[j] = a + b * theta;
    }
    const double expected = a * kTau - 0.5 * b * kTau * kTau;
    CHECK(linear_f.evaluate(psi, kTau) ==
          doctest::Approx(expected).epsilon(1e-14));
  }

  SUBCASE("linearity of the identity-outer functional") {
    const auto p1 = random_segment(1), p2 = random_segment(2);
    const double a = 0.6, b = -1.3;
    std::vector<double> combo(p1.size());
    for (std::size_t j = 0; j < p1.size(); ++j) combo[j] = a * p1[j] + b * p2[j];
    const double lhs = linear_f.evaluate(combo, kTau);
    const double rhs =
        a * linear_f.evaluate(p1, kTau) + b * linear_f.evaluate(p2, kTau);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }

  SUBCASE("constant shift moves the integral by c tau") {
    const auto p = random_segment(3);
    const double c = 0.77;
    std::vector<double> shifted(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) shifted[j] = p[j] + c;
    CHECK(linear_f.evaluate(shifted, kTau) - linear_f.evaluate(p, kTau) ==
          doctest::Approx(c * kTau).epsilon(1e-12));
  }

  SUBCASE("atoms must sit on grid offsets") {
    auto nu = Measure::atoms_only({{-kTau / 2.0, 1.0}});
    CHECK_NOTHROW(nu.weights(2, kTau));  // midpoint is a node for n = 2
    auto off = Measure::atoms_only({{-kTau / 3.0, 1.0}});
    CHECK_THROWS_AS(off.weights(2, kTau), std::invalid_argument);
  }

  SUBCASE("point mass at -tau reproduces the oldest value") {
    const auto f = FunctionalCoefficient::integral_functional(
        OuterFunction::identity(), Measure::atoms_only({{-kTau, 1.0}}));
    const auto p = random_segment(4);
    CHECK(f.evaluate(p, kTau) == doctest::Approx(p.front()).epsilon(1e-15));
  }
}

TEST_CASE("declared constants") {
  SUBCASE("constant coefficient") {
    const auto c = FunctionalCoefficient::constant(-3.0);
    const auto k = c.declared_constants(kSteps, kTau);
    CHECK(k.m1 == 0.0);
    CHECK(k.m2 == 3.0);
    CHECK(k.c == 0.0);
    CHECK(k.known);
  }

  SUBCASE("reference coefficient") {
    const auto k = paper_coefficient().declared_constants(kSteps, kTau);
    CHECK(k.m1 == doctest::Approx(0.2).epsilon(1e-12));   // Lip(x+sin x) * tau
    CHECK(k.m2 == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(k.c == doctest::Approx(0.01).epsilon(1e-12));   // sup|sigma''| * tau^2
  }

  SUBCASE("point delay with identity") {
    const auto g = FunctionalCoefficient::point_delay(OuterFunction::identity());
    const auto k = g.declared_constants(kSteps, kTau);
    CHECK(k.m1 == 1.0);
    CHECK(k.m2 == 1.0);
    CHECK(k.c == 0.0);
  }

  SUBCASE("custom table has no declared bounds") {
    const auto f = FunctionalCoefficient::integral_functional(
        OuterFunction::custom_table({0.0, 1.0}, {0.0, 2.0}),
        Measure::lebesgue());
    CHECK_FALSE(f.declared_constants(kSteps, kTau).known);
  }
}

TEST_CASE("lipschitz probe") {
  SUBCASE("constant coefficient gives zero ratio") {
    const auto c = FunctionalCoefficient::constant(4.0);
    CHECK(lipschitz_probe(c, random_segment(5), random_segment(6), kTau) == 0.0);
  }

  SUBCASE("identical segments short-circuit") {
    const auto p = random_segment(7);
    CHECK(lipschitz_probe(paper_coefficient(), p, p, kTau) == 0.0);
  }

  SUBCASE("identity functional stays below tau") {
    const auto linear_f = FunctionalCoefficient::integral_functional(
        OuterFunction::identity(), Measure::lebesgue());
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const double ratio =
          lipschitz_probe(linear_f, random_segment(2 * s), random_segment(2 * s + 1),
                          kTau);
      CHECK(ratio <= kTau * (1.0 + 1e-12));
    }
  }

  SUBCASE("reference coefficient stays below its declared M1") {
    const auto f = paper_coefficient();
    const double m1 = f.declared_constants(kSteps, kTau).m1;
    CHECK(m1 == doctest::Approx(2.0 * kTau).epsilon(1e-12));
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const double ratio = lipschitz_probe(f, random_segment(3000 + 2 * s),
                                           random_segment(3001 + 2 * s), kTau);
      CHECK(ratio <= m1 * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("four point probe") {
  const auto f = paper_coefficient();

  SUBCASE("matched pairs cancel") {
    const auto p1 = random_segment(11), p2 = random_segment(12);
    const auto probe = four_point_probe(f, p1, p2, p1, p2, kTau);
    CHECK(probe.lhs == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(probe.lhs <= probe.rhs + 1e-14);
  }

  SUBCASE("linear functional needs only the first term") {
    const auto linear_f = FunctionalCoefficient::integral_functional(
        OuterFunction::identity(), Measure::lebesgue());
    CHECK(linear_f.declared_constants(kSteps, kTau).c == 0.0);
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto probe = four_point_probe(
          linear_f, random_segment(4 * s), random_segment(4 * s + 1),
          random_segment(4 * s + 2), random_segment(4 * s + 3), kTau);
      CHECK(probe.lhs <= probe.rhs * (1.0 + 1e-12) + 1e-15);
    }
  }

  SUBCASE("reference coefficient on random quadruples") {
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const auto probe = four_point_probe(
          f, random_segment(9000 + 4 * s), random_segment(9001 + 4 * s),
          random_segment(9002 + 4 * s), random_segment(9003 + 4 * s), kTau);
      CHECK(probe.known);
      CHECK(probe.lhs <= probe.rhs * (1.0 + 1e-12) + 1e-15);
    }
  }
}

TEST_CASE("lipschitz constants on a working range") {
  const auto sin_shift = OuterFunction::sin_shift();
  CHECK(*sin_shift.lipschitz_on(-7.0, 7.0) == 2.0);  // contains 0
  CHECK(*sin_shift.lipschitz_on(1.0, 2.0) ==
        doctest::Approx(1.0 + std::cos(1.0)));
  const auto squash = OuterFunction::tanh_fn();
  CHECK(*squash.lipschitz_on(-1.0, 1.0) == 1.0);
  const double t = std::tanh(1.0);
  CHECK(*squash.lipschitz_on(1.0, 2.0) == doctest::Approx(1.0 - t * t));
  CHECK(*OuterFunction::identity().lipschitz_on(5.0, 6.0) == 1.0);
  CHECK(*OuterFunction::affine(-3.0, 1.0).lipschitz_on(0.0, 1.0) == 3.0);
  CHECK_FALSE(OuterFunction::custom_table({0.0, 1.0}, {0.0, 1.0})
                  .lipschitz_on(0.0, 1.0)
                  .has_value());
}

TEST_CASE("linear growth bound") {
  const auto f = paper_coefficient();
  const auto k = f.declared_constants(kSteps, kTau);
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto p = random_segment(500 + s);
    CHECK(std::fabs(f.evaluate(p, kTau)) <=
          k.m2 * (1.0 + holder::sup_norm(p)) * (1.0 + 1e-12));
  }
}

TEST_SUITE_END();
