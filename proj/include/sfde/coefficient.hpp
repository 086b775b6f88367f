#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfde/path.hpp"

namespace sfde::coefficient {

// Finite signed measure on [-tau, 0]: an absolutely continuous part
// (integrated with composite trapezoid weights on the segment grid) plus
// point atoms that must sit on grid offsets.
struct Atom {
  double offset;  // theta in [-tau, 0]
  double mass;
};

class Measure {
 public:
  static Measure lebesgue() { return uniform(1.0); }
  static Measure uniform(double density);
  // density values tabulated at offsets -tau + j * (tau/(table.size()-1))
  static Measure density_table(std::vector<double> table);
  static Measure atoms_only(std::vector<Atom> atoms);

  Measure& add_atom(double offset, double mass);

  // Quadrature weights w_j against segment values at offsets
  // theta_j = -tau + j * dt, j = 0..n. Atoms off the grid reject.
  std::vector<double> weights(std::size_t n, double tau) const;

  // Total variation of the discretized measure: sum |w_j|.
  double total_variation(std::size_t n, double tau) const;

  bool has_density() const { return density_kind_ != DensityKind::kNone; }
  const std::vector<Atom>& atoms() const { return atoms_; }

 private:
  enum class DensityKind { kNone, kUniform, kTable };
  DensityKind density_kind_ = DensityKind::kNone;
  double uniform_density_ = 0.0;
  std::vector<double> table_;
  std::vector<Atom> atoms_;

  double density_at(double theta, double tau) const;
};

// Scalar outer function sigma with first derivative and the global bounds the
// probe layer needs. custom_table has no declared bounds, which makes the
// coefficient constants unknown and turns probe assertions off.
class OuterFunction {
 public:
  static OuterFunction identity();
  static OuterFunction affine(double a, double b);  // a*x + b
  static OuterFunction sin_shift();                 // x + sin x
  static OuterFunction tanh_fn();
  static OuterFunction custom_table(std::vector<double> xs,
                                    std::vector<double> ys);

  double operator()(double x) const;
  double derivative(double x) const;

  std::optional<double> lipschitz() const;
  // Lipschitz constant restricted to [lo, hi], for working-range reports.
  std::optional<double> lipschitz_on(double lo, double hi) const;
  std::optional<double> second_derivative_bound() const;
  const std::string& name() const { return name_; }

 private:
  enum class Kind { kIdentity, kAffine, kSinShift, kTanh, kTable };
  Kind kind_ = Kind::kIdentity;
  double a_ = 1.0, b_ = 0.0;
  std::vector<double> xs_, ys_;
  std::string name_;
};

struct DeclaredConstants {
  double m1 = 0.0;  // Lipschitz bound in sup norm
  double m2 = 0.0;  // linear-growth bound
  double c = 0.0;   // four-point (second difference) bound
  bool known = true;
};

// Functional coefficient f on segments psi: [-tau,0] -> R. Three shapes:
//   integral_functional: sigma( integral of psi d nu )
//   point_delay:         g( psi(-tau) )
//   constant:            c
class FunctionalCoefficient {
 public:
  enum class Kind { kIntegralFunctional, kPointDelay, kConstant };

  static FunctionalCoefficient integral_functional(OuterFunction sigma,
                                                   Measure nu);
  static FunctionalCoefficient point_delay(OuterFunction g);
  static FunctionalCoefficient constant(double c);

  Kind kind() const { return kind_; }
  double constant_value() const { return constant_; }
  const OuterFunction& outer() const { return outer_; }
  const Measure& measure() const { return measure_; }

  // psi holds n+1 values at offsets -tau + j * dt (oldest first).
  double evaluate(std::span<const double> psi, double tau) const;
  double evaluate(const path::Segment& segment) const;

  DeclaredConstants declared_constants(std::size_t n, double tau) const;

 private:
  Kind kind_ = Kind::kConstant;
  double constant_ = 0.0;
  OuterFunction outer_;
  Measure measure_;
};

// Precomputed evaluation kernel for one grid shape: the inner integral
// becomes a fixed dot product, which is what the solver loop wants. For
// integral functionals the kernel records the min/max of the inner integral
// seen during the run, so reports can state the Lipschitz constant of the
// outer function on the range actually visited.
class BoundCoefficient {
 public:
  BoundCoefficient(const FunctionalCoefficient& f, std::size_t n, double tau);
  double operator()(std::span<const double> psi) const;

  bool has_inner_range() const { return inner_seen_; }
  double inner_min() const { return inner_min_; }
  double inner_max() const { return inner_max_; }
  const OuterFunction& outer() const { return *outer_; }

 private:
  FunctionalCoefficient::Kind kind_;
  double constant_;
  const OuterFunction* outer_;
  std::vector<double> weights_;
  // A single solve is sequential; the kernel is per-solve local state.
  mutable bool inner_seen_ = false;
  mutable double inner_min_ = 0.0;
  mutable double inner_max_ = 0.0;
};

// |f(psi2) - f(psi1)| / ||psi2 - psi1||_sup; 0 when the segments coincide.
double lipschitz_probe(const FunctionalCoefficient& f,
                       std::span<const double> psi1,
                       std::span<const double> psi2, double tau);

struct FourPointProbe {
  double lhs;
  double rhs;
  bool known;  // false when the coefficient has no declared constants
};

// Second-difference probe: lhs = |f(p1) - f(p2) - f(p3) + f(p4)|,
// rhs = M1 ||p1-p2-p3+p4|| + C ||p3-p4|| (||p1-p2-p3+p4|| + ||p2-p4||).
FourPointProbe four_point_probe(const FunctionalCoefficient& f,
                                std::span<const double> psi1,
                                std::span<const double> psi2,
                                std::span<const double> psi3,
                                std::span<const double> psi4, double tau);

}  // namespace sfde::coefficient
