#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sfde::fbm {

// Hurst parameter. Any value in (0,1) can be sampled; the solver layer
// additionally insists on H > 1/2.
struct Hurst {
  double value;
  explicit Hurst(double v);
};

// A sampled fBm path on the uniform grid t_k = k * step, k = 0..n_steps,
// with values[0] == 0.
struct FbmPath {
  Hurst hurst;
  double horizon;           // T
  double step;              // grid spacing
  std::uint64_t seed;       // seed the path was drawn with
  std::vector<double> values;

  std::size_t n_steps() const { return values.size() - 1; }
  double time_at(std::size_t k) const { return step * static_cast<double>(k); }
};

// Covariance 0.5 * (s^{2H} + t^{2H} - |t-s|^{2H}); s, t >= 0.
double covariance(double s, double t, Hurst h);

// Autocovariance of unit-step fractional Gaussian noise at lag k >= 0:
// gamma(k) = 0.5 * (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}).
double fgn_autocovariance(std::int64_t lag, Hurst h);

// Exact-in-law generator via Cholesky factorization of the fGn covariance.
// O(n^3) once per call; serves as the oracle for the fast generator and is
// capped at n_steps <= 2048.
FbmPath sample_cholesky(std::size_t n_steps, Hurst h, double horizon,
                        std::uint64_t seed);

// Exact-in-law generator via minimal circulant embedding (size 2(m-1),
// m = n_steps) with eigenvalues from the DFT of the first row. Eigenvalues
// below -tol_eig abort; those in [-tol_eig, 0) are clamped to zero, with
// tol_eig = 1e-10 * max eigenvalue. Gaussians are drawn in spectral index
// order 0, m-1, then (k, conjugate pair) for k = 1..m-2.
FbmPath sample_circulant(std::size_t n_steps, Hurst h, double horizon,
                         std::uint64_t seed);

// Keep every factor-th value; factor must divide n_steps. Retained values are
// bit-identical to the source.
FbmPath subsample(const FbmPath& path, std::size_t factor);

inline constexpr std::size_t kMaxCholeskySteps = 2048;

}  // namespace sfde::fbm
