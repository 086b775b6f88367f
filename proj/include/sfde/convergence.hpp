#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sfde/coefficient.hpp"
#include "sfde/euler.hpp"
#include "sfde/fbm.hpp"
#include "sfde/path.hpp"

namespace sfde::convergence {

// Resolution ladder for the strong-rate experiment. One finest fBm path per
// replication (step tau / (refine * max n)) feeds every resolution by
// subsampling, so error differences reflect discretization only.
struct LadderConfig {
  double hurst = 0.75;
  double tau = 0.1;
  double horizon = 1.0;
  double lambda = 0.7;
  double eps_margin = 0.15;
  std::vector<std::size_t> resolutions = {10, 20, 40, 80, 160};
  std::size_t refine = 16;              // reference refinement m
  std::size_t sensitivity_refine = 8;   // second reference; 0 disables
  std::size_t replications = 20;
  std::uint64_t base_seed = 1;
  coefficient::FunctionalCoefficient coeff =
      coefficient::FunctionalCoefficient::integral_functional(
          coefficient::OuterFunction::sin_shift(),
          coefficient::Measure::lebesgue());
  path::InitialCondition xi =
      path::InitialCondition::polynomial({2.0, 0.0, 1.0});
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool degenerate = false;    // fewer than two usable points
  std::size_t excluded = 0;   // zero-error pairs dropped from the fit
};

// Ordinary least squares of log(error) on log(n). Pairs with error <= 0 are
// excluded and flagged.
RateFit fit_rate(std::span<const std::pair<double, double>> pairs);

// (mean of e^p)^{1/p}; requires at least two samples and p >= 1.
double error_moment(std::span<const double> errors, double p);

// Max over the coarse non-negative nodes of |X_ref - X_coarse|. The reference
// must refine the coarse grid with a common origin, and both solves must ride
// the same driver realization (checked bit-exactly at shared nodes).
double sup_error(const euler::SolveResult& coarse,
                 const euler::SolveResult& reference);

struct ConvergenceReport {
  // config echo
  double hurst, tau, horizon, lambda, eps_margin;
  std::size_t refine, sensitivity_refine, replications;
  std::uint64_t base_seed;

  std::vector<std::size_t> resolutions;
  // errors[i][r]: resolution resolutions[i], replication r
  std::vector<std::vector<double>> errors;
  std::vector<std::vector<double>> errors_sensitivity;

  std::vector<double> median_error;
  std::vector<double> mean_error;
  std::vector<double> mean_log_error;
  std::vector<double> p2_moment;

  RateFit median_fit;
  RateFit p2_fit;
  RateFit sensitivity_fit;  // median errors against the second reference

  double target_rate = 0.0;     // 2 lambda - 1
  double threshold_rate = 0.0;  // 2 lambda - 1 - eps_margin
  bool injected = false;
};

ConvergenceReport run_ladder(const LadderConfig& config);

// Degenerate report built from externally supplied (n, error) pairs; used by
// the CLI's synthetic injection mode.
ConvergenceReport report_from_injection(
    std::span<const std::pair<double, double>> pairs, double lambda,
    double eps_margin);

}  // namespace sfde::convergence
