#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sfde::path {

// Uniform grid over [-tau, T] with spacing dt = tau / steps_per_delay and
// T an integer multiple of dt. Node k runs from -steps_per_delay (time -tau)
// to horizon_steps (time T).
struct GridSpec {
  double tau;
  std::size_t steps_per_delay;  // n
  double horizon;               // T
  double dt;                    // tau / n
  std::size_t horizon_steps;    // T / dt

  std::size_t total_nodes() const { return steps_per_delay + horizon_steps + 1; }
  double time_at(std::ptrdiff_t k) const {
    return static_cast<double>(k) * dt;
  }
};

// Validates tau > 0, n >= 1, T > 0 and T on the grid; a misaligned horizon is
// rejected with the nearest valid horizon named in the message.
GridSpec build_grid(double tau, std::size_t steps_per_delay, double horizon);

// Initial segment xi on [-tau, 0]: polynomial in theta, a constant, or a
// table on the segment grid.
class InitialCondition {
 public:
  static InitialCondition polynomial(std::vector<double> coefficients);
  static InitialCondition constant(double value);
  // values at offsets -tau + j * (tau/(values.size()-1)), j = 0..size-1
  static InitialCondition tabulated(std::vector<double> values, double tau);

  double operator()(double theta) const;

 private:
  enum class Kind { kPolynomial, kConstant, kTabulated };
  Kind kind_;
  std::vector<double> data_;
  double tau_ = 0.0;
};

class GridPath;

// View of the history window [t_k - tau, t_k] of a path, reindexed to
// theta in [-tau, 0]. Offset j = 0..n maps to theta = -tau + j * dt, so
// values().front() is the oldest point and values().back() the anchor.
class Segment {
 public:
  Segment(const GridPath& path, std::ptrdiff_t anchor);

  double at_offset(std::size_t j) const;
  double evaluate(double theta) const;  // linear interpolation off-grid
  std::span<const double> values() const;
  double dt() const;
  double tau() const;
  std::size_t steps() const;  // n
  std::ptrdiff_t anchor() const { return anchor_; }

 private:
  const GridPath* path_;
  std::ptrdiff_t anchor_;
};

// Solution values on the full grid [-tau, T]. Nodes k <= 0 are filled from
// the initial condition at construction; the solver appends forward in time
// and the path is read-only afterwards.
class GridPath {
 public:
  GridPath(GridSpec spec, const InitialCondition& xi);

  const GridSpec& spec() const { return spec_; }
  double value_at(std::ptrdiff_t k) const;
  void set_value(std::ptrdiff_t k, double v);

  // Values at nodes k = 0..horizon_steps.
  std::span<const double> nonnegative_values() const;
  std::span<const double> all_values() const { return values_; }

 private:
  friend class Segment;
  std::size_t index_of(std::ptrdiff_t k) const;

  GridSpec spec_;
  std::vector<double> values_;
};

Segment segment_at(const GridPath& path, std::ptrdiff_t k);

}  // namespace sfde::path
