#include "sfde/fbm.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "sfde/rng.hpp"

namespace sfde::fbm {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// The Cholesky factor depends only on (n_steps, H); Monte Carlo loops reuse it
// across seeds. Packed lower-triangular storage.
struct CholeskyCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, double>, std::shared_ptr<const std::vector<double>>>
      factors;
};

CholeskyCache& cholesky_cache() {
  static CholeskyCache cache;
  return cache;
}

FbmPath path_from_increments(std::vector<double> increments, Hurst h,
                             double horizon, double step, std::uint64_t seed) {
  FbmPath out{h, horizon, step, seed, {}};
  out.values.resize(increments.size() + 1);
  out.values[0] = 0.0;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    out.values[i + 1] = out.values[i] + increments[i];
  }
  return out;
}

}  // namespace

Hurst::Hurst(double v) : value(v) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::invalid_argument("Hurst parameter must lie in (0,1)");
  }
}

double covariance(double s, double t, Hurst h) {
  if (s < 0.0 || t < 0.0) {
    throw std::domain_error("fbm covariance requires non-negative times");
  }
  const double twoH = 2.0 * h.value;
  return 0.5 * (std::pow(s, twoH) + std::pow(t, twoH) -
                std::pow(std::fabs(t - s), twoH));
}

double fgn_autocovariance(std::int64_t lag, Hurst h) {
  if (lag < 0) {
    throw std::domain_error("fgn autocovariance requires lag >= 0");
  }
  const double twoH = 2.0 * h.value;
  const double k = static_cast<double>(lag);
  return 0.5 * (std::pow(k + 1.0, twoH) - 2.0 * std::pow(k, twoH) +
                std::pow(std::fabs(k - 1.0), twoH));
}

FbmPath sample_cholesky(std::size_t n_steps, Hurst h, double horizon,
                        std::uint64_t seed) {
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (n_steps > kMaxCholeskySteps) {
    throw std::invalid_argument(
        "Cholesky generator is capped at n_steps <= 2048; use the circulant "
        "generator for larger grids");
  }
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");

  const std::size_t m = n_steps;
  const double step = horizon / static_cast<double>(n_steps);

  std::shared_ptr<const std::vector<double>> factor;
  {
    auto& cache = cholesky_cache();
    std::lock_guard<std::mutex> lock(cache.mutex);
    auto it = cache.factors.find({m, h.value});
    if (it != cache.factors.end()) factor = it->second;
  }
  if (!factor) {
    // Lower-triangular Cholesky factor of the unit-step fGn covariance
    // Toeplitz matrix gamma(|i-j|), row-packed.
    std::vector<double> gamma(m);
    for (std::size_t k = 0; k < m; ++k) {
      gamma[k] = fgn_autocovariance(static_cast<std::int64_t>(k), h);
    }
    auto L = std::make_shared<std::vector<double>>(m * (m + 1) / 2, 0.0);
    auto at = [&L](std::size_t i, std::size_t j) -> double& {
      return (*L)[i * (i + 1) / 2 + j];  // j <= i
    };
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double sum = gamma[i - j];
        for (std::size_t k = 0; k < j; ++k) sum -= at(i, k) * at(j, k);
        if (j == i) {
          if (sum <= 0.0) {
            std::ostringstream msg;
            msg << "fGn covariance matrix numerically non-positive-definite: "
                   "pivot "
                << i << " = " << sum;
            throw std::runtime_error(msg.str());
          }
          at(i, j) = std::sqrt(sum);
        } else {
          at(i, j) = sum / at(j, j);
        }
      }
    }
    factor = L;
    auto& cache = cholesky_cache();
    std::lock_guard<std::mutex> lock(cache.mutex);
    if (cache.factors.size() > 8) cache.factors.clear();
    cache.factors[{m, h.value}] = factor;
  }

  rng::SplitMix64 gen(seed);
  std::vector<double> z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = gen.next_gaussian();

  const std::vector<double>& L = *factor;
  const double scale = std::pow(step, h.value);
  std::vector<double> increments(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = L.data() + i * (i + 1) / 2;
    double acc = 0.0;
    for (std::size_t k = 0; k <= i; ++k) acc += row[k] * z[k];
    increments[i] = scale * acc;
  }
  return path_from_increments(std::move(increments), h, horizon, step, seed);
}

FbmPath sample_circulant(std::size_t n_steps, Hurst h, double horizon,
                         std::uint64_t seed) {
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");

  const double step = horizon / static_cast<double>(n_steps);
  const double scale = std::pow(step, h.value);
  rng::SplitMix64 gen(seed);

  if (n_steps == 1) {
    return path_from_increments({scale * gen.next_gaussian()}, h, horizon,
                                step, seed);
  }

  const std::size_t m = n_steps;
  const std::size_t embed = 2 * (m - 1);
  const std::size_t half = m - 1;  // embed / 2

  // First row of the circulant: gamma(0..m-1) reflected.
  std::vector<double> row(embed);
  for (std::size_t k = 0; k < m; ++k) {
    row[k] = fgn_autocovariance(static_cast<std::int64_t>(k), h);
  }
  for (std::size_t k = m; k < embed; ++k) row[k] = row[embed - k];

  // Eigenvalues = DFT of the first row (real by symmetry).
  std::vector<double> eig(half + 1);
  {
    fftw_complex* spec = fftw_alloc_complex(half + 1);
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      plan = fftw_plan_dft_r2c_1d(static_cast<int>(embed), row.data(), spec,
                                  FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    for (std::size_t k = 0; k <= half; ++k) eig[k] = spec[k][0];
    {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(spec);
  }

  double eig_max = 0.0;
  for (double e : eig) eig_max = std::max(eig_max, e);
  const double tol_eig = 1e-10 * eig_max;
  for (std::size_t k = 0; k <= half; ++k) {
    if (eig[k] < -tol_eig) {
      std::ostringstream msg;
      msg << "circulant embedding not positive semidefinite: eigenvalue["
          << k << "] = " << eig[k] << " (tolerance " << -tol_eig << ")";
      throw std::runtime_error(msg.str());
    }
    if (eig[k] < 0.0) eig[k] = 0.0;
  }

  // Hermitian half-spectrum with E|V_k|^2 = eig_k, then an unnormalized
  // backward transform and division by sqrt(embed) realizes the circulant
  // covariance; the first m entries carry the Toeplitz fGn block.
  fftw_complex* spec = fftw_alloc_complex(half + 1);
  spec[0][0] = std::sqrt(eig[0]) * gen.next_gaussian();
  spec[0][1] = 0.0;
  spec[half][0] = std::sqrt(eig[half]) * gen.next_gaussian();
  spec[half][1] = 0.0;
  for (std::size_t k = 1; k < half; ++k) {
    const double amp = std::sqrt(0.5 * eig[k]);
    spec[k][0] = amp * gen.next_gaussian();
    spec[k][1] = amp * gen.next_gaussian();
  }

  std::vector<double> noise(embed);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(embed), spec, noise.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spec);

  const double norm = scale / std::sqrt(static_cast<double>(embed));
  std::vector<double> increments(m);
  for (std::size_t i = 0; i < m; ++i) increments[i] = norm * noise[i];
  return path_from_increments(std::move(increments), h, horizon, step, seed);
}

FbmPath subsample(const FbmPath& path, std::size_t factor) {
  const std::size_t n = path.n_steps();
  if (factor == 0 || n % factor != 0) {
    throw std::invalid_argument(
        "subsample factor must be a positive divisor of n_steps");
  }
  FbmPath out{path.hurst, path.horizon, path.step * static_cast<double>(factor),
              path.seed, {}};
  out.values.reserve(n / factor + 1);
  for (std::size_t k = 0; k <= n; k += factor) {
    out.values.push_back(path.values[k]);
  }
  return out;
}

}  // namespace sfde::fbm
