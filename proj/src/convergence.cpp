#include "sfde/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sfde/rng.hpp"

namespace sfde::convergence {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double moment_of(std::span<const double> errors, double p) {
  double acc = 0.0;
  for (double e : errors) acc += std::pow(e, p);
  return std::pow(acc / static_cast<double>(errors.size()), 1.0 / p);
}

void finalize_aggregates(ConvergenceReport& report) {
  const std::size_t count = report.resolutions.size();
  report.median_error.resize(count);
  report.mean_error.resize(count);
  report.mean_log_error.resize(count);
  report.p2_moment.resize(count);
  std::vector<std::pair<double, double>> median_pairs, p2_pairs, sens_pairs;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& errs = report.errors[i];
    report.median_error[i] = median_of(errs);
    double mean = 0.0, mean_log = 0.0;
    std::size_t log_count = 0;
    for (double e : errs) {
      mean += e;
      if (e > 0.0) {
        mean_log += std::log(e);
        ++log_count;
      }
    }
    report.mean_error[i] = mean / static_cast<double>(errs.size());
    report.mean_log_error[i] =
        (log_count > 0) ? mean_log / static_cast<double>(log_count)
                        : -std::numeric_limits<double>::infinity();
    report.p2_moment[i] = moment_of(errs, 2.0);

    const double n = static_cast<double>(report.resolutions[i]);
    median_pairs.emplace_back(n, report.median_error[i]);
    p2_pairs.emplace_back(n, report.p2_moment[i]);
    if (!report.errors_sensitivity.empty()) {
      sens_pairs.emplace_back(n, median_of(report.errors_sensitivity[i]));
    }
  }
  report.median_fit = fit_rate(median_pairs);
  report.p2_fit = fit_rate(p2_pairs);
  if (!sens_pairs.empty()) report.sensitivity_fit = fit_rate(sens_pairs);
}

}  // namespace

RateFit fit_rate(std::span<const std::pair<double, double>> pairs) {
  RateFit fit;
  std::vector<double> xs, ys;
  for (const auto& [n, e] : pairs) {
    if (!(e > 0.0)) {
      ++fit.excluded;
      continue;
    }
    xs.push_back(std::log(n));
    ys.push_back(std::log(e));
  }
  if (fit.excluded > 0) fit.degenerate = true;
  std::size_t distinct = 0;
  {
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    distinct = static_cast<std::size_t>(
        std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  }
  if (distinct < 2) {
    fit.degenerate = true;
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    fit.r_squared = 0.0;
    return fit;
  }
  const auto count = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / count, my = sy / count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

double error_moment(std::span<const double> errors, double p) {
  if (errors.size() < 2) {
    throw std::invalid_argument("error_moment needs at least two replications");
  }
  if (!(p >= 1.0)) throw std::domain_error("error_moment requires p >= 1");
  return moment_of(errors, p);
}

double sup_error(const euler::SolveResult& coarse,
                 const euler::SolveResult& reference) {
  const auto& cs = coarse.spec;
  const auto& rs = reference.spec;
  if (std::fabs(cs.tau - rs.tau) > 1e-12 * cs.tau ||
      std::fabs(cs.horizon - rs.horizon) > 1e-12 * cs.horizon) {
    throw std::invalid_argument("sup_error: grids cover different intervals");
  }
  if (rs.horizon_steps % cs.horizon_steps != 0) {
    throw std::invalid_argument(
        "sup_error: reference grid does not refine the coarse grid");
  }
  const std::size_t stride = rs.horizon_steps / cs.horizon_steps;
  const auto coarse_values = coarse.solution.nonnegative_values();
  const auto ref_values = reference.solution.nonnegative_values();
  for (std::size_t k = 0; k <= cs.horizon_steps; ++k) {
    if (coarse.driver.values[k] != reference.driver.values[k * stride]) {
      throw std::invalid_argument(
          "sup_error: drivers disagree at shared nodes; the solves do not "
          "share one realization");
    }
  }
  double best = 0.0;
  for (std::size_t k = 0; k <= cs.horizon_steps; ++k) {
    best = std::max(best,
                    std::fabs(ref_values[k * stride] - coarse_values[k]));
  }
  return best;
}

ConvergenceReport run_ladder(const LadderConfig& config) {
  if (config.resolutions.empty()) {
    throw std::invalid_argument("resolution ladder is empty");
  }
  if (!(config.lambda > 0.5 && config.lambda < config.hurst)) {
    throw std::invalid_argument("lambda must lie in (1/2, H)");
  }
  if (config.refine < 1) throw std::invalid_argument("refine must be >= 1");
  if (config.replications < 1) {
    throw std::invalid_argument("need at least one replication");
  }
  if (config.sensitivity_refine > 0 &&
      config.refine % config.sensitivity_refine != 0) {
    throw std::invalid_argument(
        "sensitivity refinement must divide the reference refinement");
  }

  std::vector<std::size_t> resolutions = config.resolutions;
  std::sort(resolutions.begin(), resolutions.end());
  resolutions.erase(std::unique(resolutions.begin(), resolutions.end()),
                    resolutions.end());
  const std::size_t n_max = resolutions.back();
  for (std::size_t n : resolutions) {
    if (n < 1 || (config.refine * n_max) % n != 0) {
      std::ostringstream msg;
      msg << "resolution " << n << " does not divide refine * n_max = "
          << config.refine * n_max;
      throw std::invalid_argument(msg.str());
    }
  }

  const path::GridSpec fine_spec =
      path::build_grid(config.tau, config.refine * n_max, config.horizon);
  const bool with_sensitivity = config.sensitivity_refine > 0 &&
                                config.sensitivity_refine != config.refine;
  const fbm::Hurst hurst(config.hurst);

  ConvergenceReport report;
  report.hurst = config.hurst;
  report.tau = config.tau;
  report.horizon = config.horizon;
  report.lambda = config.lambda;
  report.eps_margin = config.eps_margin;
  report.refine = config.refine;
  report.sensitivity_refine = with_sensitivity ? config.sensitivity_refine : 0;
  report.replications = config.replications;
  report.base_seed = config.base_seed;
  report.resolutions = resolutions;
  report.errors.assign(resolutions.size(), {});
  if (with_sensitivity) report.errors_sensitivity.assign(resolutions.size(), {});
  report.target_rate = 2.0 * config.lambda - 1.0;
  report.threshold_rate = report.target_rate - config.eps_margin;

  for (std::size_t r = 0; r < config.replications; ++r) {
    const std::uint64_t seed = rng::mix_seed(config.base_seed, r);
    const fbm::FbmPath finest = fbm::sample_circulant(
        fine_spec.horizon_steps, hurst, config.horizon, seed);
    const euler::SolveResult reference = euler::euler_solve(
        config.coeff, config.xi, finest, fine_spec, config.lambda);

    std::optional<euler::SolveResult> reference_s;
    if (with_sensitivity) {
      const std::size_t factor_s = config.refine / config.sensitivity_refine;
      const path::GridSpec spec_s = path::build_grid(
          config.tau, config.sensitivity_refine * n_max, config.horizon);
      reference_s = euler::euler_solve(config.coeff, config.xi,
                                       fbm::subsample(finest, factor_s),
                                       spec_s, config.lambda);
    }

    for (std::size_t i = 0; i < resolutions.size(); ++i) {
      const std::size_t n = resolutions[i];
      const std::size_t factor = (config.refine * n_max) / n;
      const fbm::FbmPath driver = fbm::subsample(finest, factor);
      const path::GridSpec spec =
          path::build_grid(config.tau, n, config.horizon);
      try {
        const euler::SolveResult solution =
            euler::euler_solve(config.coeff, config.xi, driver, spec,
                               config.lambda);
        report.errors[i].push_back(sup_error(solution, reference));
        if (reference_s) {
          report.errors_sensitivity[i].push_back(
              sup_error(solution, *reference_s));
        }
      } catch (const std::exception& err) {
        std::ostringstream msg;
        msg << "replication " << r << ", resolution " << n << ": "
            << err.what();
        throw std::runtime_error(msg.str());
      }
    }
  }

  finalize_aggregates(report);
  return report;
}

ConvergenceReport report_from_injection(
    std::span<const std::pair<double, double>> pairs, double lambda,
    double eps_margin) {
  ConvergenceReport report{};
  report.hurst = 0.0;
  report.tau = 0.0;
  report.horizon = 0.0;
  report.lambda = lambda;
  report.eps_margin = eps_margin;
  report.refine = 0;
  report.sensitivity_refine = 0;
  report.replications = 1;
  report.base_seed = 0;
  report.injected = true;
  for (const auto& [n, e] : pairs) {
    report.resolutions.push_back(static_cast<std::size_t>(n));
    report.errors.push_back({e});
  }
  report.target_rate = 2.0 * lambda - 1.0;
  report.threshold_rate = report.target_rate - eps_margin;
  finalize_aggregates(report);
  return report;
}

}  // namespace sfde::convergence
