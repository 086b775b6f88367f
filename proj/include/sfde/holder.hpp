#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sfde::holder {

// Hölder exponent in (0,1); the solver layer narrows it to (1/2, H).
struct HolderExponent {
  double value;
  explicit HolderExponent(double v);
};

// Discrete-proxy semantics throughout this module: every norm below is a
// maximum over grid points/pairs/triples, i.e. a lower bound of the continuum
// supremum. max_gap = 0 means exact enumeration of all pairs; a positive
// max_gap restricts to pairs with index distance <= max_gap (approximate,
// intended for grids beyond 2^14 nodes).
double holder_seminorm(std::span<const double> values, double dt, double lambda,
                       std::size_t max_gap = 0);

double sup_norm(std::span<const double> values);

// Left-point Riemann sum of integrand against increments of integrator over
// grid indices [i0, i1). Both sequences live on the same grid.
double young_riemann(std::span<const double> integrand,
                     std::span<const double> integrator, std::size_t i0,
                     std::size_t i1);

struct YoungProbe {
  double lhs;                    // |left-point sum over [s,t]|
  double rhs_without_constant;   // |h(s)||dg(s,t)| + ||h||_a ||g||_b (t-s)^{a+b}
};

// Probe of the Young bound on the window [i0, i1]; requires alpha + beta > 1.
// Callers compare lhs against young_constant(alpha+beta) * rhs.
YoungProbe young_bound_probe(std::span<const double> integrand,
                             std::span<const double> integrator, double dt,
                             double alpha, double beta, std::size_t i0,
                             std::size_t i1);

// Testing convention for the unspecified sewing constants:
// C_mu = 2^mu * zeta(mu) and c_{alpha,beta} = 2^{alpha+beta} zeta(alpha+beta).
double sewing_constant(double mu);
inline double young_constant(double s) { return sewing_constant(s); }

// Two-parameter field h(t_i, t_j), 0 <= i <= j < nodes, on a uniform grid of
// spacing dt. Diagonal entries are identically zero; off-diagonal entries are
// stored packed by row.
class TwoParamField {
 public:
  TwoParamField(std::size_t nodes, double dt);

  std::size_t nodes() const { return nodes_; }
  double dt() const { return dt_; }

  double& at(std::size_t i, std::size_t j);        // i < j
  double operator()(std::size_t i, std::size_t j) const;  // i <= j

 private:
  std::size_t nodes_;
  double dt_;
  std::vector<double> values_;
};

// sup over i < j of |h(i,j)| / ((j-i) dt)^mu; mu > 0.
double two_param_norm(const TwoParamField& h, double mu,
                      std::size_t max_gap = 0);

// delta h(s,u,t) = h(s,t) - h(s,u) - h(u,t), evaluated lazily over the
// discrete simplex i < k < j.
struct DeltaField {
  const TwoParamField* h;
  double operator()(std::size_t i, std::size_t k, std::size_t j) const {
    return (*h)(i, j) - (*h)(i, k) - (*h)(k, j);
  }
};
DeltaField delta_of_two_param(const TwoParamField& h);

// sup over i < k < j of |delta h(i,k,j)| / ((j-i) dt)^mu. Exact but O(N^3).
double delta_norm(const TwoParamField& h, double mu);

struct SewingCheck {
  double lhs;         // ||h||_mu
  double bound;       // C_mu ||delta h||_mu + M_mu(h)
  double diag;        // M_mu(h): max over consecutive pairs
  double delta_part;  // ||delta h||_mu
  // Floating-point allowance: the inequality concerns the exact-arithmetic
  // field, whose evaluation here carries rounding of order eps * scale
  // amplified by the one-step weight dt^{-mu}. Passing means
  // lhs <= bound + rounding_slack.
  double rounding_slack;

  bool passes() const { return lhs <= bound + rounding_slack; }
};

// Discrete sewing inequality check; requires mu > 1.
SewingCheck sewing_check(const TwoParamField& h, double mu);

// Fast delta-norm for fields of the form h(s,t) = dY(s,t) - g(s) dB(s,t),
// whose delta collapses to (g(u) - g(s)) dB(u,t):
//   sup over i < k < j of |g_k - g_i| |B_j - B_k| / ((j-i) dt)^mu.
// g and driver are node sequences on the same uniform grid.
double increment_delta_norm(std::span<const double> g,
                            std::span<const double> driver, double dt,
                            double mu);

}  // namespace sfde::holder
