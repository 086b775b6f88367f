#include "sfde/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfde/holder.hpp"

namespace sfde::coefficient {

Measure Measure::uniform(double density) {
  Measure m;
  m.density_kind_ = DensityKind::kUniform;
  m.uniform_density_ = density;
  return m;
}

Measure Measure::density_table(std::vector<double> table) {
  if (table.size() < 2) {
    throw std::invalid_argument("density table needs at least two values");
  }
  Measure m;
  m.density_kind_ = DensityKind::kTable;
  m.table_ = std::move(table);
  return m;
}

Measure Measure::atoms_only(std::vector<Atom> atoms) {
  Measure m;
  m.atoms_ = std::move(atoms);
  return m;
}

Measure& Measure::add_atom(double offset, double mass) {
  atoms_.push_back({offset, mass});
  return *this;
}

double Measure::density_at(double theta, double tau) const {
  switch (density_kind_) {
    case DensityKind::kNone:
      return 0.0;
    case DensityKind::kUniform:
      return uniform_density_;
    case DensityKind::kTable: {
      const std::size_t n = table_.size() - 1;
      double u = (theta + tau) / (tau / static_cast<double>(n));
      if (u < 0.0) u = 0.0;
      if (u > static_cast<double>(n)) u = static_cast<double>(n);
      const auto j = static_cast<std::size_t>(u);
      if (j >= n) return table_[n];
      const double frac = u - static_cast<double>(j);
      return table_[j] + frac * (table_[j + 1] - table_[j]);
    }
  }
  return 0.0;
}

std::vector<double> Measure::weights(std::size_t n, double tau) const {
  if (n < 1) throw std::invalid_argument("measure weights need n >= 1");
  const double dt = tau / static_cast<double>(n);
  std::vector<double> w(n + 1, 0.0);
  if (density_kind_ != DensityKind::kNone) {
    for (std::size_t j = 0; j <= n; ++j) {
      const double theta = -tau + static_cast<double>(j) * dt;
      const double trap = (j == 0 || j == n) ? 0.5 : 1.0;
      w[j] = trap * dt * density_at(theta, tau);
    }
  }
  for (const Atom& atom : atoms_) {
    const double u = (atom.offset + tau) / dt;
    const double nearest = std::round(u);
    if (std::fabs(u - nearest) > 1e-6 || nearest < 0.0 ||
        nearest > static_cast<double>(n)) {
      std::ostringstream msg;
      msg << "measure atom at theta = " << atom.offset
          << " does not sit on a grid offset (n = " << n << ", tau = " << tau
          << ")";
      throw std::invalid_argument(msg.str());
    }
    w[static_cast<std::size_t>(nearest)] += atom.mass;
  }
  return w;
}

double Measure::total_variation(std::size_t n, double tau) const {
  double tv = 0.0;
  for (double w : weights(n, tau)) tv += std::fabs(w);
  return tv;
}

OuterFunction OuterFunction::identity() {
  OuterFunction f;
  f.kind_ = Kind::kIdentity;
  f.name_ = "identity";
  return f;
}

OuterFunction OuterFunction::affine(double a, double b) {
  OuterFunction f;
  f.kind_ = Kind::kAffine;
  f.a_ = a;
  f.b_ = b;
  f.name_ = "affine";
  return f;
}

OuterFunction OuterFunction::sin_shift() {
  OuterFunction f;
  f.kind_ = Kind::kSinShift;
  f.name_ = "sin_shift";
  return f;
}

OuterFunction OuterFunction::tanh_fn() {
  OuterFunction f;
  f.kind_ = Kind::kTanh;
  f.name_ = "tanh";
  return f;
}

OuterFunction OuterFunction::custom_table(std::vector<double> xs,
                                          std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("custom table needs matching xs/ys, size >= 2");
  }
  if (!std::is_sorted(xs.begin(), xs.end())) {
    throw std::invalid_argument("custom table xs must be increasing");
  }
  OuterFunction f;
  f.kind_ = Kind::kTable;
  f.xs_ = std::move(xs);
  f.ys_ = std::move(ys);
  f.name_ = "custom_table";
  return f;
}

double OuterFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::kIdentity:
      return x;
    case Kind::kAffine:
      return a_ * x + b_;
    case Kind::kSinShift:
      return x + std::sin(x);
    case Kind::kTanh:
      return std::tanh(x);
    case Kind::kTable: {
      if (x <= xs_.front()) return ys_.front();
      if (x >= xs_.back()) return ys_.back();
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t j = static_cast<std::size_t>(it - xs_.begin()) - 1;
      const double frac = (x - xs_[j]) / (xs_[j + 1] - xs_[j]);
      return ys_[j] + frac * (ys_[j + 1] - ys_[j]);
    }
  }
  return 0.0;
}

double OuterFunction::derivative(double x) const {
  switch (kind_) {
    case Kind::kIdentity:
      return 1.0;
    case Kind::kAffine:
      return a_;
    case Kind::kSinShift:
      return 1.0 + std::cos(x);
    case Kind::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Kind::kTable: {
      if (x < xs_.front() || x > xs_.back()) return 0.0;
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      std::size_t j = static_cast<std::size_t>(it - xs_.begin());
      if (j == 0) j = 1;
      if (j >= xs_.size()) j = xs_.size() - 1;
      return (ys_[j] - ys_[j - 1]) / (xs_[j] - xs_[j - 1]);
    }
  }
  return 0.0;
}

std::optional<double> OuterFunction::lipschitz_on(double lo, double hi) const {
  if (lo > hi) std::swap(lo, hi);
  switch (kind_) {
    case Kind::kIdentity:
      return 1.0;
    case Kind::kAffine:
      return std::fabs(a_);
    case Kind::kSinShift: {
      // sup |1 + cos x| = 1 + max cos; the max is 1 if [lo, hi] contains a
      // multiple of 2 pi, else it sits at an endpoint.
      const double two_pi = 2.0 * std::acos(-1.0);
      if (std::floor(hi / two_pi) >= std::ceil(lo / two_pi)) return 2.0;
      return 1.0 + std::max(std::cos(lo), std::cos(hi));
    }
    case Kind::kTanh: {
      if (lo <= 0.0 && 0.0 <= hi) return 1.0;
      const double closest = std::min(std::fabs(lo), std::fabs(hi));
      const double t = std::tanh(closest);
      return 1.0 - t * t;
    }
    case Kind::kTable:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> OuterFunction::lipschitz() const {
  switch (kind_) {
    case Kind::kIdentity:
      return 1.0;
    case Kind::kAffine:
      return std::fabs(a_);
    case Kind::kSinShift:
      return 2.0;  // sup |1 + cos x|
    case Kind::kTanh:
      return 1.0;
    case Kind::kTable:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> OuterFunction::second_derivative_bound() const {
  switch (kind_) {
    case Kind::kIdentity:
    case Kind::kAffine:
      return 0.0;
    case Kind::kSinShift:
      return 1.0;  // sup |-sin x|
    case Kind::kTanh:
      return 4.0 / (3.0 * std::sqrt(3.0));
    case Kind::kTable:
      return std::nullopt;
  }
  return std::nullopt;
}

FunctionalCoefficient FunctionalCoefficient::integral_functional(
    OuterFunction sigma, Measure nu) {
  FunctionalCoefficient f;
  f.kind_ = Kind::kIntegralFunctional;
  f.outer_ = std::move(sigma);
  f.measure_ = std::move(nu);
  return f;
}

FunctionalCoefficient FunctionalCoefficient::point_delay(OuterFunction g) {
  FunctionalCoefficient f;
  f.kind_ = Kind::kPointDelay;
  f.outer_ = std::move(g);
  return f;
}

FunctionalCoefficient FunctionalCoefficient::constant(double c) {
  FunctionalCoefficient f;
  f.kind_ = Kind::kConstant;
  f.constant_ = c;
  return f;
}

double FunctionalCoefficient::evaluate(std::span<const double> psi,
                                       double tau) const {
  switch (kind_) {
    case Kind::kConstant:
      return constant_;
    case Kind::kPointDelay:
      return outer_(psi.front());
    case Kind::kIntegralFunctional: {
      if (psi.size() < 2) {
        throw std::invalid_argument("integral functional needs >= 2 samples");
      }
      const std::vector<double> w = measure_.weights(psi.size() - 1, tau);
      double inner = 0.0;
      for (std::size_t j = 0; j < psi.size(); ++j) inner += w[j] * psi[j];
      return outer_(inner);
    }
  }
  return 0.0;
}

double FunctionalCoefficient::evaluate(const path::Segment& segment) const {
  return evaluate(segment.values(), segment.tau());
}

DeclaredConstants FunctionalCoefficient::declared_constants(std::size_t n,
                                                            double tau) const {
  DeclaredConstants out;
  switch (kind_) {
    case Kind::kConstant:
      out.m1 = 0.0;
      out.m2 = std::fabs(constant_);
      out.c = 0.0;
      return out;
    case Kind::kPointDelay:
    case Kind::kIntegralFunctional: {
      const double tv = (kind_ == Kind::kPointDelay)
                            ? 1.0
                            : measure_.total_variation(n, tau);
      const auto lip = outer_.lipschitz();
      const auto dd = outer_.second_derivative_bound();
      if (!lip || !dd) {
        out.known = false;
        return out;
      }
      out.m1 = *lip * tv;
      const std::vector<double> zero(n + 1, 0.0);
      out.m2 = std::max(out.m1, std::fabs(evaluate(zero, tau)));
      out.c = *dd * tv * tv;
      return out;
    }
  }
  return out;
}

BoundCoefficient::BoundCoefficient(const FunctionalCoefficient& f,
                                   std::size_t n, double tau)
    : kind_(f.kind()), constant_(f.constant_value()), outer_(&f.outer()) {
  if (kind_ == FunctionalCoefficient::Kind::kIntegralFunctional) {
    weights_ = f.measure().weights(n, tau);
  }
}

double BoundCoefficient::operator()(std::span<const double> psi) const {
  switch (kind_) {
    case FunctionalCoefficient::Kind::kConstant:
      return constant_;
    case FunctionalCoefficient::Kind::kPointDelay:
      return (*outer_)(psi.front());
    case FunctionalCoefficient::Kind::kIntegralFunctional: {
      double inner = 0.0;
      const double* w = weights_.data();
      const double* p = psi.data();
      for (std::size_t j = 0; j < weights_.size(); ++j) inner += w[j] * p[j];
      if (!inner_seen_) {
        inner_seen_ = true;
        inner_min_ = inner_max_ = inner;
      } else {
        inner_min_ = std::min(inner_min_, inner);
        inner_max_ = std::max(inner_max_, inner);
      }
      return (*outer_)(inner);
    }
  }
  return 0.0;
}

double lipschitz_probe(const FunctionalCoefficient& f,
                       std::span<const double> psi1,
                       std::span<const double> psi2, double tau) {
  if (psi1.size() != psi2.size()) {
    throw std::invalid_argument("lipschitz probe needs segments on one grid");
  }
  std::vector<double> diff(psi1.size());
  for (std::size_t j = 0; j < psi1.size(); ++j) diff[j] = psi2[j] - psi1[j];
  const double denom = holder::sup_norm(diff);
  if (denom == 0.0) return 0.0;
  return std::fabs(f.evaluate(psi2, tau) - f.evaluate(psi1, tau)) / denom;
}

FourPointProbe four_point_probe(const FunctionalCoefficient& f,
                                std::span<const double> psi1,
                                std::span<const double> psi2,
                                std::span<const double> psi3,
                                std::span<const double> psi4, double tau) {
  const std::size_t sz = psi1.size();
  if (psi2.size() != sz || psi3.size() != sz || psi4.size() != sz) {
    throw std::invalid_argument("four-point probe needs segments on one grid");
  }
  const double lhs =
      std::fabs(f.evaluate(psi1, tau) - f.evaluate(psi2, tau) -
                f.evaluate(psi3, tau) + f.evaluate(psi4, tau));
  std::vector<double> second_diff(sz), d34(sz), d24(sz);
  for (std::size_t j = 0; j < sz; ++j) {
    second_diff[j] = psi1[j] - psi2[j] - psi3[j] + psi4[j];
    d34[j] = psi3[j] - psi4[j];
    d24[j] = psi2[j] - psi4[j];
  }
  const DeclaredConstants k = f.declared_constants(sz - 1, tau);
  const double nsd = holder::sup_norm(second_diff);
  const double rhs =
      k.m1 * nsd + k.c * holder::sup_norm(d34) * (nsd + holder::sup_norm(d24));
  return {lhs, rhs, k.known};
}

}  // namespace sfde::coefficient
