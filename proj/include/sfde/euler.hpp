#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sfde/coefficient.hpp"
#include "sfde/fbm.hpp"
#include "sfde/holder.hpp"
#include "sfde/path.hpp"

namespace sfde::euler {

// Default working Hölder exponent: H - 0.05, pulled into (1/2, H) when that
// would leave the admissible band.
double default_lambda(double hurst);

// Working range of the inner integral visited during a solve, with the outer
// function's Lipschitz constant evaluated on that interval (when declared).
struct CoefficientRange {
  bool has_range = false;
  double inner_min = 0.0;
  double inner_max = 0.0;
  bool has_lipschitz = false;
  double lipschitz_on_range = 0.0;
};

// Output of one Euler pass. When produced by reference_solve, refine > 1 and
// coarse node k corresponds to fine node k * refine; spec always describes
// the grid the values actually live on.
struct SolveResult {
  path::GridPath solution;
  std::vector<double> f_trace;  // f(segment at t_k), k = 0..horizon_steps
  fbm::FbmPath driver;
  path::GridSpec spec;
  holder::HolderExponent lambda;
  std::size_t refine = 1;
  CoefficientRange coefficient_range;

  std::size_t coarse_nodes() const {
    return spec.horizon_steps / refine + 1;
  }
  double coarse_dt() const { return spec.dt * static_cast<double>(refine); }
};

// Forward Euler recursion X(t_{k+1}) = X(t_k) + f(segment at t_k) dB(t_k,
// t_{k+1}) over the whole horizon; one pass subsumes the delay-interval
// recursion because segments only reach back n nodes. The driver grid must
// match spec.dt and cover [0, T]; requires H > 1/2 and lambda in (1/2, H).
SolveResult euler_solve(const coefficient::FunctionalCoefficient& coeff,
                        const path::InitialCondition& xi,
                        const fbm::FbmPath& driver, const path::GridSpec& spec,
                        std::optional<double> lambda = std::nullopt);

// Euler solve on the refine-times-finer grid of the same realization
// (driver_fine must have step spec_coarse.dt / refine). The result keeps the
// fine resolution plus the index map back to the coarse grid.
SolveResult reference_solve(const coefficient::FunctionalCoefficient& coeff,
                            const path::InitialCondition& xi,
                            const fbm::FbmPath& driver_fine,
                            const path::GridSpec& spec_coarse,
                            std::size_t refine,
                            std::optional<double> lambda = std::nullopt);

// Largest grid that remainder fields are materialized for; beyond it use the
// streaming norms below.
inline constexpr std::size_t kMaxMaterializedNodes = 2048;

// R^n(t_i, t_j) = dX(t_i,t_j) - f(segment at t_i) dB(t_i,t_j) on the result's
// own non-negative grid; consecutive entries vanish up to rounding.
holder::TwoParamField scheme_remainder(const SolveResult& result);

// Same increment decomposition read through the coarse index map when
// refine > 1 (the fine solve standing in for the true solution), else the
// result's own grid. Consecutive coarse entries are genuinely nonzero.
holder::TwoParamField solution_remainder(const SolveResult& result);

// Streaming sup |R| / gap^mu without materializing the field.
double scheme_remainder_norm(const SolveResult& result, double mu,
                             std::size_t max_gap = 0);
double solution_remainder_norm(const SolveResult& result, double mu,
                               std::size_t max_gap = 0);

// Discrete sewing check of the scheme remainder, with the delta norm computed
// from the algebraic identity delta R(s,u,t) = (f_u - f_s) dB(u,t).
holder::SewingCheck scheme_remainder_sewing(const SolveResult& result,
                                            double mu);
holder::SewingCheck solution_remainder_sewing(const SolveResult& result,
                                              double mu);

// Max over grid triples u < s < t of
// |R(u,t) - R(u,s) - R(s,t) - (f_s - f_u) dB(s,t)|; an algebraic identity, so
// the result is pure rounding noise. Enumerates every triple when their count
// is within budget, otherwise scans a deterministic pseudo-random sample.
double chaining_identity_defect(const SolveResult& result,
                                std::size_t max_triples = 100000);

}  // namespace sfde::euler
