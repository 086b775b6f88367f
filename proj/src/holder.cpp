#include "sfde/holder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sfde::holder {

namespace {

// Reciprocal gap weights ((g * dt)^mu)^{-1} for g = 1..max_gap, so the O(N^2)
// and O(N^3) scans below do one table lookup instead of a pow per pair.
std::vector<double> inverse_gap_powers(std::size_t max_gap, double dt,
                                       double mu) {
  std::vector<double> inv(max_gap + 1, 0.0);
  for (std::size_t g = 1; g <= max_gap; ++g) {
    inv[g] = 1.0 / std::pow(static_cast<double>(g) * dt, mu);
  }
  return inv;
}

}  // namespace

HolderExponent::HolderExponent(double v) : value(v) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::invalid_argument("Holder exponent must lie in (0,1)");
  }
}

double holder_seminorm(std::span<const double> values, double dt,
                       double lambda, std::size_t max_gap) {
  const std::size_t n = values.size();
  if (n < 2) {
    throw std::invalid_argument(
        "holder_seminorm needs a window with at least two grid points");
  }
  const std::size_t gap_cap = (max_gap == 0) ? n - 1 : std::min(max_gap, n - 1);
  const std::vector<double> inv = inverse_gap_powers(gap_cap, dt, lambda);
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double vi = values[i];
    const std::size_t j_end = std::min(n, i + gap_cap + 1);
    for (std::size_t j = i + 1; j < j_end; ++j) {
      best = std::max(best, std::fabs(values[j] - vi) * inv[j - i]);
    }
  }
  return best;
}

double sup_norm(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("sup_norm of an empty window");
  }
  double best = 0.0;
  for (double v : values) best = std::max(best, std::fabs(v));
  return best;
}

double young_riemann(std::span<const double> integrand,
                     std::span<const double> integrator, std::size_t i0,
                     std::size_t i1) {
  if (integrand.size() != integrator.size()) {
    throw std::invalid_argument(
        "young_riemann: integrand and integrator must share one grid");
  }
  if (!(i0 < i1) || i1 >= integrand.size()) {
    throw std::invalid_argument("young_riemann: need i0 < i1 within the grid");
  }
  // Accumulate in extended precision so the sum is correctly rounded for all
  // practical term counts; additivity across a split point then holds to the
  // last bits of the double result.
  long double acc = 0.0L;
  for (std::size_t i = i0; i < i1; ++i) {
    acc += static_cast<long double>(integrand[i]) *
           (static_cast<long double>(integrator[i + 1]) -
            static_cast<long double>(integrator[i]));
  }
  return static_cast<double>(acc);
}

double sewing_constant(double mu) {
  if (!(mu > 1.0)) {
    throw std::domain_error("sewing constant requires exponent > 1");
  }
  return std::pow(2.0, mu) * std::riemann_zeta(mu);
}

YoungProbe young_bound_probe(std::span<const double> integrand,
                             std::span<const double> integrator, double dt,
                             double alpha, double beta, std::size_t i0,
                             std::size_t i1) {
  if (!(alpha + beta > 1.0)) {
    throw std::domain_error("young_bound_probe requires alpha + beta > 1");
  }
  const double lhs = std::fabs(young_riemann(integrand, integrator, i0, i1));
  const auto window_h = integrand.subspan(i0, i1 - i0 + 1);
  const auto window_g = integrator.subspan(i0, i1 - i0 + 1);
  const double span_t = static_cast<double>(i1 - i0) * dt;
  const double rhs =
      std::fabs(integrand[i0]) * std::fabs(integrator[i1] - integrator[i0]) +
      holder_seminorm(window_h, dt, alpha) *
          holder_seminorm(window_g, dt, beta) * std::pow(span_t, alpha + beta);
  return {lhs, rhs};
}

TwoParamField::TwoParamField(std::size_t nodes, double dt)
    : nodes_(nodes), dt_(dt) {
  if (nodes < 2) {
    throw std::invalid_argument("TwoParamField needs at least two nodes");
  }
  values_.assign(nodes * (nodes - 1) / 2, 0.0);
}

double& TwoParamField::at(std::size_t i, std::size_t j) {
  if (!(i < j && j < nodes_)) {
    throw std::out_of_range("TwoParamField::at requires i < j < nodes");
  }
  // Row i stores entries j = i+1 .. nodes-1.
  const std::size_t base = i * (nodes_ - 1) - i * (i - 1) / 2;
  return values_[base + (j - i - 1)];
}

double TwoParamField::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (!(i < j && j < nodes_)) {
    throw std::out_of_range("TwoParamField access requires i <= j < nodes");
  }
  const std::size_t base = i * (nodes_ - 1) - i * (i - 1) / 2;
  return values_[base + (j - i - 1)];
}

double two_param_norm(const TwoParamField& h, double mu, std::size_t max_gap) {
  if (!(mu > 0.0)) {
    throw std::domain_error("two_param_norm requires mu > 0");
  }
  const std::size_t n = h.nodes();
  const std::size_t gap_cap = (max_gap == 0) ? n - 1 : std::min(max_gap, n - 1);
  const std::vector<double> inv = inverse_gap_powers(gap_cap, h.dt(), mu);
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j_end = std::min(n, i + gap_cap + 1);
    for (std::size_t j = i + 1; j < j_end; ++j) {
      best = std::max(best, std::fabs(h(i, j)) * inv[j - i]);
    }
  }
  return best;
}

DeltaField delta_of_two_param(const TwoParamField& h) { return DeltaField{&h}; }

double delta_norm(const TwoParamField& h, double mu) {
  if (!(mu > 0.0)) {
    throw std::domain_error("delta_norm requires mu > 0");
  }
  const std::size_t n = h.nodes();
  const std::vector<double> inv = inverse_gap_powers(n - 1, h.dt(), mu);
  const DeltaField dh{&h};
  double best = 0.0;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    for (std::size_t k = i + 1; k + 1 < n; ++k) {
      for (std::size_t j = k + 1; j < n; ++j) {
        best = std::max(best, std::fabs(dh(i, k, j)) * inv[j - i]);
      }
    }
  }
  return best;
}

SewingCheck sewing_check(const TwoParamField& h, double mu) {
  if (!(mu > 1.0)) {
    throw std::domain_error("sewing_check requires mu > 1");
  }
  const std::size_t n = h.nodes();
  const double inv_step = 1.0 / std::pow(h.dt(), mu);
  double diag = 0.0;
  double magnitude = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    diag = std::max(diag, std::fabs(h(i, i + 1)) * inv_step);
    for (std::size_t j = i + 1; j < n; ++j) {
      magnitude = std::max(magnitude, std::fabs(h(i, j)));
    }
  }
  const double lhs = two_param_norm(h, mu);
  const double dpart = delta_norm(h, mu);
  const double slack = 32.0 * std::numeric_limits<double>::epsilon() *
                       (1.0 + magnitude) * inv_step;
  return {lhs, sewing_constant(mu) * dpart + diag, diag, dpart, slack};
}

double increment_delta_norm(std::span<const double> g,
                            std::span<const double> driver, double dt,
                            double mu) {
  if (g.size() != driver.size()) {
    throw std::invalid_argument(
        "increment_delta_norm: trace and driver must share one grid");
  }
  if (!(mu > 0.0)) {
    throw std::domain_error("increment_delta_norm requires mu > 0");
  }
  const std::size_t n = g.size();
  if (n < 3) return 0.0;
  const std::vector<double> inv = inverse_gap_powers(n - 1, dt, mu);

  // Forward range of the driver from each midpoint, used to prune (i,k) pairs
  // whose best possible value cannot beat the current maximum.
  std::vector<double> forward_range(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double m = 0.0;
    const double bk = driver[k];
    for (std::size_t j = k + 1; j < n; ++j) {
      m = std::max(m, std::fabs(driver[j] - bk));
    }
    forward_range[k] = m;
  }

  double best = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double gk = g[k];
    const double bk = driver[k];
    for (std::size_t i = 0; i < k; ++i) {
      const double a = std::fabs(gk - g[i]);
      if (a == 0.0) continue;
      // inv is decreasing in the gap, so the smallest reachable gap bounds
      // every candidate for this (i,k).
      if (a * forward_range[k] * inv[k - i + 1] <= best) continue;
      const std::size_t offset = k - i;
      for (std::size_t j = k + 1; j < n; ++j) {
        const double cand = a * std::fabs(driver[j] - bk) * inv[offset + (j - k)];
        if (cand > best) best = cand;
      }
    }
  }
  return best;
}

}  // namespace sfde::holder
