#include "sfde/path.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sfde::path {

GridSpec build_grid(double tau, std::size_t steps_per_delay, double horizon) {
  if (!(tau > 0.0)) throw std::invalid_argument("delay tau must be > 0");
  if (steps_per_delay < 1) {
    throw std::invalid_argument("steps per delay must be >= 1");
  }
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");

  const double dt = tau / static_cast<double>(steps_per_delay);
  const double steps_real = horizon / dt;
  const double steps_rounded = std::round(steps_real);
  // dt itself carries one rounding, so the divisibility test is ulp-scaled.
  const double tol = 1e-9 * std::max(1.0, steps_rounded);
  if (steps_rounded < 1.0 || std::fabs(steps_real - steps_rounded) > tol) {
    std::ostringstream msg;
    msg << "horizon " << horizon << " is not a multiple of dt = tau/n = " << dt
        << "; nearest valid horizon is "
        << std::max(1.0, steps_rounded) * dt;
    throw std::invalid_argument(msg.str());
  }
  return GridSpec{tau, steps_per_delay, horizon, dt,
                  static_cast<std::size_t>(steps_rounded)};
}

InitialCondition InitialCondition::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) {
    throw std::invalid_argument("polynomial initial condition needs coefficients");
  }
  InitialCondition xi;
  xi.kind_ = Kind::kPolynomial;
  xi.data_ = std::move(coefficients);
  return xi;
}

InitialCondition InitialCondition::constant(double value) {
  InitialCondition xi;
  xi.kind_ = Kind::kConstant;
  xi.data_ = {value};
  return xi;
}

InitialCondition InitialCondition::tabulated(std::vector<double> values,
                                             double tau) {
  if (values.size() < 2) {
    throw std::invalid_argument("tabulated initial condition needs >= 2 values");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("delay tau must be > 0");
  InitialCondition xi;
  xi.kind_ = Kind::kTabulated;
  xi.data_ = std::move(values);
  xi.tau_ = tau;
  return xi;
}

double InitialCondition::operator()(double theta) const {
  switch (kind_) {
    case Kind::kConstant:
      return data_[0];
    case Kind::kPolynomial: {
      double acc = 0.0;  // Horner, data_[i] multiplies theta^i
      for (std::size_t i = data_.size(); i-- > 0;) {
        acc = acc * theta + data_[i];
      }
      return acc;
    }
    case Kind::kTabulated: {
      const std::size_t n = data_.size() - 1;
      const double dt = tau_ / static_cast<double>(n);
      double u = (theta + tau_) / dt;
      if (u < 0.0) u = 0.0;
      if (u > static_cast<double>(n)) u = static_cast<double>(n);
      const auto j = static_cast<std::size_t>(u);
      if (j >= n) return data_[n];
      const double frac = u - static_cast<double>(j);
      return data_[j] + frac * (data_[j + 1] - data_[j]);
    }
  }
  return 0.0;
}

GridPath::GridPath(GridSpec spec, const InitialCondition& xi)
    : spec_(spec), values_(spec.total_nodes(), 0.0) {
  const auto n = static_cast<std::ptrdiff_t>(spec_.steps_per_delay);
  for (std::ptrdiff_t k = -n; k <= 0; ++k) {
    double theta = spec_.time_at(k);
    if (theta < -spec_.tau) theta = -spec_.tau;
    if (theta > 0.0) theta = 0.0;
    values_[index_of(k)] = xi(theta);
  }
}

std::size_t GridPath::index_of(std::ptrdiff_t k) const {
  const auto n = static_cast<std::ptrdiff_t>(spec_.steps_per_delay);
  const auto last = static_cast<std::ptrdiff_t>(spec_.horizon_steps);
  if (k < -n || k > last) {
    throw std::out_of_range("grid index outside [-n, horizon_steps]");
  }
  return static_cast<std::size_t>(k + n);
}

double GridPath::value_at(std::ptrdiff_t k) const {
  return values_[index_of(k)];
}

void GridPath::set_value(std::ptrdiff_t k, double v) {
  values_[index_of(k)] = v;
}

std::span<const double> GridPath::nonnegative_values() const {
  return std::span<const double>(values_).subspan(spec_.steps_per_delay);
}

Segment::Segment(const GridPath& path, std::ptrdiff_t anchor)
    : path_(&path), anchor_(anchor) {
  if (anchor < 0 ||
      anchor > static_cast<std::ptrdiff_t>(path.spec().horizon_steps)) {
    throw std::out_of_range(
        "segment anchor must satisfy 0 <= k <= horizon_steps");
  }
}

std::span<const double> Segment::values() const {
  // Nodes anchor-n .. anchor are contiguous in storage starting at offset
  // (anchor - n) + n = anchor.
  return std::span<const double>(path_->values_)
      .subspan(static_cast<std::size_t>(anchor_),
               path_->spec().steps_per_delay + 1);
}

double Segment::at_offset(std::size_t j) const {
  if (j > path_->spec().steps_per_delay) {
    throw std::out_of_range("segment offset index exceeds n");
  }
  return values()[j];
}

double Segment::evaluate(double theta) const {
  const double tau_v = tau();
  const double guard = 1e-9 * tau_v;
  if (theta < -tau_v - guard || theta > guard) {
    throw std::domain_error("segment evaluated outside [-tau, 0]");
  }
  const std::size_t n = steps();
  double u = (theta + tau_v) / dt();
  if (u < 0.0) u = 0.0;
  if (u > static_cast<double>(n)) u = static_cast<double>(n);
  // Snap to the node when theta is a grid offset up to accumulated rounding.
  const double nearest = std::round(u);
  if (std::fabs(u - nearest) < 1e-6) {
    return at_offset(static_cast<std::size_t>(nearest));
  }
  const auto j = static_cast<std::size_t>(u);
  const double frac = u - static_cast<double>(j);
  return at_offset(j) + frac * (at_offset(j + 1) - at_offset(j));
}

double Segment::dt() const { return path_->spec().dt; }
double Segment::tau() const { return path_->spec().tau; }
std::size_t Segment::steps() const { return path_->spec().steps_per_delay; }

Segment segment_at(const GridPath& path, std::ptrdiff_t k) {
  return Segment(path, k);
}

}  // namespace sfde::path
