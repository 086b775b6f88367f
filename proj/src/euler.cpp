#include "sfde/euler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sfde/rng.hpp"

namespace sfde::euler {

namespace {

constexpr double kDivergenceGuard = 1e12;

// Coarse-grid slices (solution, coefficient trace, driver) of a solve; for
// refine == 1 these are just the non-negative nodes.
struct CoarseSlices {
  std::vector<double> level;
  std::vector<double> trace;
  std::vector<double> driver;
  double dt;
};

// Slices on the result's own grid, stride 1 regardless of refine.
CoarseSlices own_slices(const SolveResult& result) {
  CoarseSlices s;
  s.dt = result.spec.dt;
  const auto level = result.solution.nonnegative_values();
  s.level.assign(level.begin(), level.end());
  s.trace = result.f_trace;
  s.driver.assign(result.driver.values.begin(),
                  result.driver.values.begin() +
                      static_cast<std::ptrdiff_t>(level.size()));
  return s;
}

CoarseSlices coarse_slices(const SolveResult& result) {
  const std::size_t nodes = result.coarse_nodes();
  const std::size_t stride = result.refine;
  CoarseSlices s;
  s.dt = result.coarse_dt();
  s.level.resize(nodes);
  s.trace.resize(nodes);
  s.driver.resize(nodes);
  const auto level = result.solution.nonnegative_values();
  for (std::size_t k = 0; k < nodes; ++k) {
    const std::size_t fine = k * stride;
    s.level[k] = level[fine];
    s.trace[k] = result.f_trace[fine];
    s.driver[k] = result.driver.values[fine];
  }
  return s;
}

holder::TwoParamField materialize(const CoarseSlices& s) {
  const std::size_t nodes = s.level.size();
  if (nodes > kMaxMaterializedNodes) {
    std::ostringstream msg;
    msg << "remainder field with " << nodes
        << " nodes exceeds the materialization cap " << kMaxMaterializedNodes
        << "; use the streaming norms";
    throw std::invalid_argument(msg.str());
  }
  holder::TwoParamField field(nodes, s.dt);
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    for (std::size_t j = i + 1; j < nodes; ++j) {
      field.at(i, j) =
          (s.level[j] - s.level[i]) - s.trace[i] * (s.driver[j] - s.driver[i]);
    }
  }
  return field;
}

double streaming_norm(const CoarseSlices& s, double mu, std::size_t max_gap) {
  if (!(mu > 0.0)) throw std::domain_error("remainder norm requires mu > 0");
  const std::size_t nodes = s.level.size();
  const std::size_t cap =
      (max_gap == 0) ? nodes - 1 : std::min(max_gap, nodes - 1);
  std::vector<double> inv(cap + 1, 0.0);
  for (std::size_t g = 1; g <= cap; ++g) {
    inv[g] = 1.0 / std::pow(static_cast<double>(g) * s.dt, mu);
  }
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    const double xi = s.level[i];
    const double fi = s.trace[i];
    const double bi = s.driver[i];
    const std::size_t j_end = std::min(nodes, i + cap + 1);
    for (std::size_t j = i + 1; j < j_end; ++j) {
      const double r = (s.level[j] - xi) - fi * (s.driver[j] - bi);
      best = std::max(best, std::fabs(r) * inv[j - i]);
    }
  }
  return best;
}

holder::SewingCheck sewing_from_slices(const CoarseSlices& s, double mu) {
  if (!(mu > 1.0)) throw std::domain_error("sewing_check requires mu > 1");
  const std::size_t nodes = s.level.size();
  const double inv_step = 1.0 / std::pow(s.dt, mu);
  double diag = 0.0;
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    const double r = (s.level[i + 1] - s.level[i]) -
                     s.trace[i] * (s.driver[i + 1] - s.driver[i]);
    diag = std::max(diag, std::fabs(r) * inv_step);
  }
  const double lhs = streaming_norm(s, mu, 0);
  const double dpart =
      holder::increment_delta_norm(s.trace, s.driver, s.dt, mu);
  // Rounding allowance: each field entry carries eps-level error in the
  // solution/trace/driver magnitudes, amplified at worst by the one-step
  // weight. Needed when the exact field vanishes (constant coefficients) and
  // everything here is noise.
  double magnitude = 1.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    magnitude = std::max(magnitude, std::fabs(s.level[i]));
    magnitude = std::max(magnitude, std::fabs(s.trace[i] * s.driver[i]));
  }
  const double slack =
      32.0 * std::numeric_limits<double>::epsilon() * magnitude * inv_step;
  return {lhs, holder::sewing_constant(mu) * dpart + diag, diag, dpart, slack};
}

}  // namespace

double default_lambda(double hurst) {
  double lambda = hurst - 0.05;
  if (lambda <= 0.5) lambda = 0.5 + 0.5 * (hurst - 0.5);
  return lambda;
}

SolveResult euler_solve(const coefficient::FunctionalCoefficient& coeff,
                        const path::InitialCondition& xi,
                        const fbm::FbmPath& driver, const path::GridSpec& spec,
                        std::optional<double> lambda) {
  if (!(driver.hurst.value > 0.5)) {
    throw std::invalid_argument(
        "euler_solve requires a driver with Hurst parameter > 1/2");
  }
  if (std::fabs(driver.step - spec.dt) > 1e-9 * spec.dt) {
    std::ostringstream msg;
    msg << "driver step " << driver.step << " does not match grid step "
        << spec.dt;
    throw std::invalid_argument(msg.str());
  }
  if (driver.n_steps() < spec.horizon_steps) {
    throw std::invalid_argument("driver does not cover [0, T]");
  }
  const double lam = lambda.value_or(default_lambda(driver.hurst.value));
  if (!(lam > 0.5 && lam < driver.hurst.value)) {
    throw std::invalid_argument("lambda must lie in (1/2, H)");
  }

  path::GridPath solution(spec, xi);
  const std::size_t steps = spec.horizon_steps;
  std::vector<double> trace(steps + 1, 0.0);
  const coefficient::BoundCoefficient f(coeff, spec.steps_per_delay, spec.tau);

  for (std::size_t k = 0; k < steps; ++k) {
    const auto anchor = static_cast<std::ptrdiff_t>(k);
    const double fk = f(path::segment_at(solution, anchor).values());
    trace[k] = fk;
    const double next = solution.value_at(anchor) +
                        fk * (driver.values[k + 1] - driver.values[k]);
    if (!std::isfinite(next) || std::fabs(next) > kDivergenceGuard) {
      std::ostringstream msg;
      msg << "euler scheme diverged at step " << k + 1 << " (|X| = " << next
          << ")";
      throw std::runtime_error(msg.str());
    }
    solution.set_value(anchor + 1, next);
  }
  trace[steps] = f(
      path::segment_at(solution, static_cast<std::ptrdiff_t>(steps)).values());

  CoefficientRange range;
  if (f.has_inner_range()) {
    range.has_range = true;
    range.inner_min = f.inner_min();
    range.inner_max = f.inner_max();
    if (const auto lip = f.outer().lipschitz_on(f.inner_min(), f.inner_max())) {
      range.has_lipschitz = true;
      range.lipschitz_on_range = *lip;
    }
  }

  return SolveResult{std::move(solution),
                     std::move(trace),
                     driver,
                     spec,
                     holder::HolderExponent(lam),
                     1,
                     range};
}

SolveResult reference_solve(const coefficient::FunctionalCoefficient& coeff,
                            const path::InitialCondition& xi,
                            const fbm::FbmPath& driver_fine,
                            const path::GridSpec& spec_coarse,
                            std::size_t refine, std::optional<double> lambda) {
  if (refine < 1) throw std::invalid_argument("refine must be >= 1");
  if (refine == 1) {
    return euler_solve(coeff, xi, driver_fine, spec_coarse, lambda);
  }
  const path::GridSpec fine = path::build_grid(
      spec_coarse.tau, spec_coarse.steps_per_delay * refine,
      spec_coarse.horizon);
  SolveResult result = euler_solve(coeff, xi, driver_fine, fine, lambda);
  result.refine = refine;
  return result;
}

holder::TwoParamField scheme_remainder(const SolveResult& result) {
  return materialize(own_slices(result));
}

holder::TwoParamField solution_remainder(const SolveResult& result) {
  return materialize(coarse_slices(result));
}

double scheme_remainder_norm(const SolveResult& result, double mu,
                             std::size_t max_gap) {
  return streaming_norm(own_slices(result), mu, max_gap);
}

double solution_remainder_norm(const SolveResult& result, double mu,
                               std::size_t max_gap) {
  return streaming_norm(coarse_slices(result), mu, max_gap);
}

holder::SewingCheck scheme_remainder_sewing(const SolveResult& result,
                                            double mu) {
  return sewing_from_slices(own_slices(result), mu);
}

holder::SewingCheck solution_remainder_sewing(const SolveResult& result,
                                              double mu) {
  return sewing_from_slices(coarse_slices(result), mu);
}

double chaining_identity_defect(const SolveResult& result,
                                std::size_t max_triples) {
  const auto level = result.solution.nonnegative_values();
  const auto& trace = result.f_trace;
  const auto& driver = result.driver.values;
  const std::size_t nodes = level.size();
  if (nodes < 3) return 0.0;

  auto remainder = [&](std::size_t a, std::size_t b) {
    return (level[b] - level[a]) - trace[a] * (driver[b] - driver[a]);
  };
  auto defect = [&](std::size_t u, std::size_t s, std::size_t t) {
    return std::fabs(remainder(u, t) - remainder(u, s) - remainder(s, t) -
                     (trace[s] - trace[u]) * (driver[t] - driver[s]));
  };

  const double total =
      static_cast<double>(nodes) * static_cast<double>(nodes - 1) *
      static_cast<double>(nodes - 2) / 6.0;
  double best = 0.0;
  if (total <= static_cast<double>(max_triples)) {
    for (std::size_t u = 0; u + 2 < nodes; ++u)
      for (std::size_t s = u + 1; s + 1 < nodes; ++s)
        for (std::size_t t = s + 1; t < nodes; ++t)
          best = std::max(best, defect(u, s, t));
    return best;
  }
  rng::SplitMix64 gen(0x5eedf00dULL);
  for (std::size_t trial = 0; trial < max_triples; ++trial) {
    std::size_t a = static_cast<std::size_t>(gen.next_u64() % nodes);
    std::size_t b = static_cast<std::size_t>(gen.next_u64() % nodes);
    std::size_t c = static_cast<std::size_t>(gen.next_u64() % nodes);
    if (a == b || b == c || a == c) continue;
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    best = std::max(best, defect(a, b, c));
  }
  return best;
}

}  // namespace sfde::euler
