#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "sfde/convergence.hpp"
#include "sfde/euler.hpp"
#include "sfde/rng.hpp"

using namespace sfde;
using coefficient::FunctionalCoefficient;
using coefficient::Measure;
using coefficient::OuterFunction;

TEST_SUITE_BEGIN("euler");

namespace {

FunctionalCoefficient paper_coefficient() {
  return FunctionalCoefficient::integral_functional(OuterFunction::sin_shift(),
                                                    Measure::lebesgue());
}

const path::InitialCondition kQuadraticXi =
    path::InitialCondition::polynomial({2.0, 0.0, 1.0});

fbm::FbmPath driver_for(const path::GridSpec& spec, std::uint64_t seed,
                        double hurst = 0.75) {
  return fbm::sample_circulant(spec.horizon_steps, fbm::Hurst(hurst),
                               spec.horizon, seed);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2]
                      : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

}  // namespace

TEST_CASE("default lambda") {
  CHECK(euler::default_lambda(0.75) == doctest::Approx(0.7));
  const double clamped = euler::default_lambda(0.52);
  CHECK(clamped > 0.5);
  CHECK(clamped < 0.52);
}

TEST_CASE("frozen dynamics for a vanishing coefficient") {
  const auto spec = path::build_grid(0.1, 20, 0.5);
  const auto result =
      euler::euler_solve(FunctionalCoefficient::constant(0.0), kQuadraticXi,
                         driver_for(spec, 3), spec);
  for (std::size_t k = 0; k <= spec.horizon_steps; ++k) {
    CHECK(result.solution.value_at(static_cast<std::ptrdiff_t>(k)) == 2.0);
  }
  // every segment anchored past the first delay window is constant xi(0)
  const auto seg =
      path::segment_at(result.solution, static_cast<std::ptrdiff_t>(spec.horizon_steps));
  for (std::size_t j = 0; j <= 20; ++j) CHECK(seg.at_offset(j) == 2.0);
}

TEST_CASE("constant coefficient telescopes onto the driver") {
  const auto spec = path::build_grid(0.1, 50, 1.0);
  const double c = 2.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto driver = driver_for(spec, rng::mix_seed(100, seed));
    const auto result = euler::euler_solve(FunctionalCoefficient::constant(c),
                                           kQuadraticXi, driver, spec);
    const double scale = 1.0 + holder::sup_norm(driver.values);
    for (std::size_t k = 0; k <= spec.horizon_steps; ++k) {
      const double closed = 2.0 + c * driver.values[k];
      CHECK(std::fabs(result.solution.value_at(static_cast<std::ptrdiff_t>(k)) -
                      closed) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("pure delay closed form on the first delay interval") {
  const auto spec = path::build_grid(0.1, 64, 0.1);  // T = tau
  const auto one = path::InitialCondition::constant(1.0);
  const auto f = FunctionalCoefficient::point_delay(OuterFunction::identity());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto driver = driver_for(spec, rng::mix_seed(200, seed));
    const auto result = euler::euler_solve(f, one, driver, spec);
    for (std::size_t k = 0; k <= spec.horizon_steps; ++k) {
      const double closed = 1.0 + driver.values[k];
      CHECK(result.solution.value_at(static_cast<std::ptrdiff_t>(k)) ==
            doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("driver scaling scales the increments exactly") {
  const auto spec = path::build_grid(0.1, 25, 0.5);
  const auto zero = path::InitialCondition::constant(0.0);
  const auto f = FunctionalCoefficient::constant(0.7);
  const auto driver = driver_for(spec, 5);
  fbm::FbmPath doubled = driver;
  for (double& v : doubled.values) v *= 2.0;
  const auto base = euler::euler_solve(f, zero, driver, spec);
  const auto scaled = euler::euler_solve(f, zero, doubled, spec);
  for (std::size_t k = 0; k <= spec.horizon_steps; ++k) {
    CHECK(scaled.solution.value_at(static_cast<std::ptrdiff_t>(k)) ==
          2.0 * base.solution.value_at(static_cast<std::ptrdiff_t>(k)));
  }
}

TEST_CASE("solver input guards") {
  const auto spec = path::build_grid(0.1, 20, 0.5);
  const auto f = paper_coefficient();

  SUBCASE("mismatched driver step") {
    const auto wrong = fbm::sample_circulant(60, fbm::Hurst(0.75), 0.5, 1);
    CHECK_THROWS_AS(euler::euler_solve(f, kQuadraticXi, wrong, spec),
                    std::invalid_argument);
  }

  SUBCASE("driver too short") {
    const auto stub = fbm::sample_circulant(50, fbm::Hurst(0.75), 0.25, 1);
    CHECK_THROWS_AS(euler::euler_solve(f, kQuadraticXi, stub, spec),
                    std::invalid_argument);
  }

  SUBCASE("hurst at one half rejected") {
    const auto brownian = fbm::sample_circulant(100, fbm::Hurst(0.5), 0.5, 1);
    CHECK_THROWS_AS(euler::euler_solve(f, kQuadraticXi, brownian, spec),
                    std::invalid_argument);
  }

  SUBCASE("lambda outside the admissible band") {
    const auto driver = driver_for(spec, 1);
    CHECK_THROWS_AS(euler::euler_solve(f, kQuadraticXi, driver, spec, 0.8),
                    std::invalid_argument);
    CHECK_THROWS_AS(euler::euler_solve(f, kQuadraticXi, driver, spec, 0.5),
                    std::invalid_argument);
  }

  SUBCASE("divergence guard names the step") {
    const auto driver = driver_for(spec, 1);
    const auto huge = FunctionalCoefficient::constant(1e20);
    CHECK_THROWS_WITH_AS(
        euler::euler_solve(huge, kQuadraticXi, driver, spec),
        doctest::Contains("diverged at step"), std::runtime_error);
  }
}

TEST_CASE("determinism of the solve") {
  const auto spec = path::build_grid(0.1, 30, 0.6);
  const auto driver = driver_for(spec, 77);
  const auto a = euler::euler_solve(paper_coefficient(), kQuadraticXi, driver, spec);
  const auto b = euler::euler_solve(paper_coefficient(), kQuadraticXi, driver, spec);
  for (std::size_t k = 0; k <= spec.horizon_steps; ++k) {
    CHECK(a.solution.value_at(static_cast<std::ptrdiff_t>(k)) ==
          b.solution.value_at(static_cast<std::ptrdiff_t>(k)));
  }
  CHECK(a.f_trace == b.f_trace);
}

TEST_CASE("scheme remainder") {
  const auto spec = path::build_grid(0.1, 20, 1.0);
  const auto driver = driver_for(spec, 9);

  SUBCASE("consecutive entries vanish") {
    const auto result =
        euler::euler_solve(paper_coefficient(), kQuadraticXi, driver, spec);
    const auto field = euler::scheme_remainder(result);
    const double scale =
        holder::sup_norm(result.solution.nonnegative_values());
    for (std::size_t i = 0; i + 1 <= spec.horizon_steps; ++i) {
      CHECK(std::fabs(field(i, i + 1)) <= 1e-14 * std::max(1.0, scale));
    }
  }

  SUBCASE("constant coefficient zeroes the whole field") {
    const auto result = euler::euler_solve(FunctionalCoefficient::constant(1.2),
                                           kQuadraticXi, driver, spec);
    const auto field = euler::scheme_remainder(result);
    const double scale =
        holder::sup_norm(result.solution.nonnegative_values());
    double worst = 0.0;
    for (std::size_t i = 0; i <= spec.horizon_steps; ++i)
      for (std::size_t j = i + 1; j <= spec.horizon_steps; ++j)
        worst = std::max(worst, std::fabs(field(i, j)));
    CHECK(worst <= 1e-13 * std::max(1.0, scale));
    CHECK(euler::scheme_remainder_norm(result, 1.4) <= 1e-10);
  }

  SUBCASE("materialized field agrees with the streaming norm") {
    const auto result =
        euler::euler_solve(paper_coefficient(), kQuadraticXi, driver, spec);
    const auto field = euler::scheme_remainder(result);
    CHECK(holder::two_param_norm(field, 1.4) ==
          doctest::Approx(euler::scheme_remainder_norm(result, 1.4))
              .epsilon(1e-12));
  }
}

TEST_CASE("reference solve and the solution remainder") {
  const auto spec = path::build_grid(0.1, 10, 1.0);
  const auto f = paper_coefficient();

  SUBCASE("refine one is a plain solve") {
    const auto driver = driver_for(spec, 4);
    const auto a = euler::euler_solve(f, kQuadraticXi, driver, spec);
    const auto b = euler::reference_solve(f, kQuadraticXi, driver, spec, 1);
    const auto va = a.solution.all_values();
    const auto vb = b.solution.all_values();
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i] == vb[i]);
    CHECK(b.refine == 1);
  }

  SUBCASE("constant coefficient matches at shared nodes across refinement") {
    const auto fine_spec = path::build_grid(0.1, 80, 1.0);
    const auto fine_driver = driver_for(fine_spec, 6);
    const auto reference = euler::reference_solve(
        FunctionalCoefficient::constant(1.5), kQuadraticXi, fine_driver, spec, 8);
    const auto coarse = euler::euler_solve(FunctionalCoefficient::constant(1.5),
                                           kQuadraticXi,
                                           fbm::subsample(fine_driver, 8), spec);
    const auto ref_values = reference.solution.nonnegative_values();
    const auto coarse_values = coarse.solution.nonnegative_values();
    const double scale = 1.0 + holder::sup_norm(ref_values);
    for (std::size_t k = 0; k <= spec.horizon_steps; ++k) {
      CHECK(std::fabs(ref_values[8 * k] - coarse_values[k]) <= 1e-13 * scale);
    }
  }

  SUBCASE("coarse-grid remainder of a refined solve has nonzero diagonal") {
    const auto fine_spec = path::build_grid(0.1, 80, 1.0);
    const auto reference = euler::reference_solve(
        f, kQuadraticXi, driver_for(fine_spec, 8), spec, 8);
    CHECK(reference.coarse_nodes() == spec.horizon_steps + 1);
    const auto field = euler::solution_remainder(reference);
    double diag = 0.0;
    for (std::size_t i = 0; i + 1 <= spec.horizon_steps; ++i)
      diag = std::max(diag, std::fabs(field(i, i + 1)));
    CHECK(diag > 0.0);
    CHECK(holder::two_param_norm(field, 1.4) ==
          doctest::Approx(euler::solution_remainder_norm(reference, 1.4))
              .epsilon(1e-12));
  }

  SUBCASE("refinement reduces the error against a common reference") {
    std::vector<double> coarse_errors, fine_errors;
    for (std::uint64_t seed = 0; seed < 9; ++seed) {
      const auto finest_spec = path::build_grid(0.1, 160, 1.0);
      const auto finest = driver_for(finest_spec, rng::mix_seed(300, seed));
      const auto reference =
          euler::reference_solve(f, kQuadraticXi, finest, spec, 16);
      const auto sol10 = euler::euler_solve(f, kQuadraticXi,
                                            fbm::subsample(finest, 16), spec);
      const auto spec20 = path::build_grid(0.1, 20, 1.0);
      const auto sol20 = euler::euler_solve(f, kQuadraticXi,
                                            fbm::subsample(finest, 8), spec20);
      coarse_errors.push_back(convergence::sup_error(sol10, reference));
      fine_errors.push_back(convergence::sup_error(sol20, reference));
      CHECK(coarse_errors.back() > 0.0);
    }
    CHECK(median(fine_errors) < median(coarse_errors));
  }
}

TEST_CASE("large grids refuse materialization but stream norms") {
  const auto spec = path::build_grid(0.1, 250, 1.0);  // 2501 nodes > 2048
  const auto result = euler::euler_solve(paper_coefficient(), kQuadraticXi,
                                         driver_for(spec, 2), spec);
  CHECK_THROWS_AS(euler::scheme_remainder(result), std::invalid_argument);
  CHECK(euler::scheme_remainder_norm(result, 1.4) > 0.0);
}

TEST_CASE("solver records the inner integral range") {
  const auto spec = path::build_grid(0.1, 50, 1.0);
  const auto result = euler::euler_solve(paper_coefficient(), kQuadraticXi,
                                         driver_for(spec, 21), spec);
  const auto& range = result.coefficient_range;
  CHECK(range.has_range);
  CHECK(range.inner_min <= range.inner_max);
  // the run starts from xi with inner integral tau^3/3 + 2 tau
  CHECK(range.inner_min <= 0.20033333333333334);
  CHECK(range.inner_max >= 0.20033333333333334);
  CHECK(range.has_lipschitz);
  CHECK(range.lipschitz_on_range > 0.0);
  CHECK(range.lipschitz_on_range <= 2.0);

  // constant coefficients have no inner integral
  const auto flat = euler::euler_solve(FunctionalCoefficient::constant(1.0),
                                       kQuadraticXi, driver_for(spec, 22), spec);
  CHECK_FALSE(flat.coefficient_range.has_range);
}

TEST_CASE("chaining identity holds to rounding") {
  const auto spec = path::build_grid(0.1, 20, 1.0);

  SUBCASE("constant coefficient gives a zero defect") {
    const auto result = euler::euler_solve(FunctionalCoefficient::constant(3.0),
                                           kQuadraticXi, driver_for(spec, 13),
                                           spec);
    CHECK(euler::chaining_identity_defect(result) <= 1e-13);
  }

  SUBCASE("reference coefficient stays at rounding scale") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto result = euler::euler_solve(
          paper_coefficient(), kQuadraticXi,
          driver_for(spec, rng::mix_seed(400, seed)), spec);
      const double scale =
          holder::sup_norm(result.solution.nonnegative_values());
      CHECK(euler::chaining_identity_defect(result) <=
            1e-12 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("sewing inequality on the scheme remainder") {
  const auto spec = path::build_grid(0.1, 100, 1.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto result =
        euler::euler_solve(paper_coefficient(), kQuadraticXi,
                           driver_for(spec, rng::mix_seed(500, seed)), spec, 0.7);
    const auto check = euler::scheme_remainder_sewing(result, 1.4);
    CHECK(check.passes());
    CHECK(check.diag <= 1e-10);
    // the allowance is negligible next to the real bound
    CHECK(check.rounding_slack < 1e-3 * check.bound);
  }

  SUBCASE("constant coefficient: a pure-noise field still passes") {
    const auto result =
        euler::euler_solve(FunctionalCoefficient::constant(2.0), kQuadraticXi,
                           driver_for(spec, 1), spec, 0.7);
    const auto check = euler::scheme_remainder_sewing(result, 1.4);
    CHECK(check.delta_part == 0.0);
    CHECK(check.passes());
  }
}

TEST_CASE("holder seminorm of the solution is stable across resolutions") {
  const double lambda = 0.7;
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto finest_spec = path::build_grid(0.1, 200, 1.0);
    const auto finest = driver_for(finest_spec, rng::mix_seed(600, seed));
    std::vector<double> norms;
    for (std::size_t n : {50, 100, 200}) {
      const auto spec = path::build_grid(0.1, n, 1.0);
      const auto result = euler::euler_solve(paper_coefficient(), kQuadraticXi,
                                             fbm::subsample(finest, 200 / n),
                                             spec, lambda);
      norms.push_back(holder::holder_seminorm(
          result.solution.nonnegative_values(), spec.dt, lambda));
      CHECK(std::isfinite(norms.back()));
    }
    ratios.push_back(*std::max_element(norms.begin(), norms.end()) /
                     *std::min_element(norms.begin(), norms.end()));
  }
  CHECK(median(ratios) <= 2.0);
}

TEST_SUITE_END();
