#pragma once

// Continuum reference objects: closed-form test functions, the gradient
// sup-functional, Lipschitz constants, the nonlocal sup-functional, and
// distance fields to constraint sets.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "liplab/geometry.hpp"
#include "liplab/kernels.hpp"

namespace liplab {

enum class ReferenceKind { Linear, LShapePower, DistanceToBoundary, Custom };

std::string to_string(ReferenceKind k);

class ReferenceFunction {
public:
  // a . x; grad_sup = lip_const = |a|.
  static ReferenceFunction linear(std::vector<double> a);
  // On the L-shape:  x1^p on {x1,x2 >= 0},  sign(x2)|x2|^p on {x1,x2 <= 0},
  // 0 elsewhere. grad_sup = p, lip_const = max(sqrt(2), p).
  static ReferenceFunction lshape_power(double p);
  // Distance to the domain boundary; lip_const = 1, grad_sup left open so the
  // finite-difference estimator is exercised.
  static ReferenceFunction distance_to_boundary(const Domain& domain);
  static ReferenceFunction custom(std::function<double(std::span<const double>)> eval,
                                  std::optional<double> grad_sup = std::nullopt,
                                  std::optional<double> lip_const = std::nullopt);

  double operator()(std::span<const double> x) const { return eval_(x); }
  ReferenceKind kind() const { return kind_; }
  std::optional<double> grad_sup() const { return grad_sup_; }
  std::optional<double> lip_const() const { return lip_const_; }

private:
  ReferenceFunction() = default;
  ReferenceKind kind_ = ReferenceKind::Custom;
  std::function<double(std::span<const double>)> eval_;
  std::optional<double> grad_sup_, lip_const_;
};

// esssup |grad u|: the closed form when the reference carries one, otherwise
// the max of central finite-difference gradient magnitudes (step mesh_h/2,
// one-sided near the boundary) over the mesh, skipping ridge nodes where the
// one-sided derivatives jump by more than 0.5.
double continuum_functional(const ReferenceFunction& ref, const Domain& domain,
                            double mesh_h);

// Closed form when available; otherwise a certified lower bound from seeded
// random in-domain pairs plus all mesh-level near pairs.
double lipschitz_constant(const ReferenceFunction& ref, const Domain& domain,
                          int sample_n, uint64_t seed);

// (1/s) sup eta(|x-y|/s) |u(x)-u(y)| over lattice pairs with |x-y| <= s*R;
// a lower bound on the essential supremum, converging as pair_h -> 0.
double nonlocal_functional(const ReferenceFunction& ref, const Domain& domain,
                           const Kernel& kernel, double s, double pair_h);

// Geodesic distance field to the constraint samples.
GeodesicField distance_to_constraint(const Domain& domain,
                                     const ConstraintGeometry& constraint,
                                     double mesh_h);

} // namespace liplab
