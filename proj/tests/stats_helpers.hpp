#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace teststats {

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

struct CovEstimate {
  double value;
  double standard_error;
};

// Covariance of paired samples with the plug-in standard error of the
// cross-product estimator.
inline CovEstimate sample_covariance(std::span<const double> xs,
                                     std::span<const double> ys) {
  const double mx = mean(xs), my = mean(ys);
  const auto n = static_cast<double>(xs.size());
  std::vector<double> products(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    products[i] = (xs[i] - mx) * (ys[i] - my);
  }
  const double cov = mean(products) * n / (n - 1.0);
  const double se = std::sqrt(sample_variance(products) / n);
  return {cov, se};
}

// Two-sample Kolmogorov-Smirnov p-value (asymptotic, Numerical Recipes form).
inline double ks_two_sample_pvalue(std::vector<double> a,
                                   std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na -
                              static_cast<double>(ib) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  double p = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    p += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * p, 0.0, 1.0);
}

}  // namespace teststats
