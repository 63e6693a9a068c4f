#pragma once

// Edge-weight kernel profiles: non-increasing, compactly supported, positive
// at the origin, together with the constant sigma = sup_t t*eta(t).

#include <string>
#include <utility>
#include <vector>

namespace liplab {

enum class KernelKind { Indicator, Tent, TruncatedExponential, CustomTable };

std::string to_string(KernelKind k);

class Kernel {
public:
  // Built-ins: indicator = 1 on [0,1]; tent = max(1-t, 0);
  // truncated-exponential = exp(-t^2) on [0,2], 0 beyond.
  static Kernel indicator();
  static Kernel tent();
  static Kernel truncated_exponential();
  // Piecewise-linear table (t_i, eta_i), t_0 = 0, strictly increasing t,
  // zero beyond the last node. Throws naming the violated assumption.
  static Kernel custom_table(std::vector<std::pair<double, double>> table);
  // Skips assumption checks; for feeding validate_kernel with bad inputs.
  // `radius` may exceed the table range to model untruncated profiles.
  static Kernel custom_table_unchecked(std::vector<std::pair<double, double>> table,
                                       double radius);

  double operator()(double t) const;
  KernelKind kind() const { return kind_; }
  double radius() const { return radius_; }
  double sigma() const { return sigma_; } // cached at construction

private:
  Kernel() = default;
  void cache_sigma();
  KernelKind kind_ = KernelKind::Indicator;
  double radius_ = 1.0;
  double sigma_ = 1.0;
  std::vector<std::pair<double, double>> table_;
};

// Maximizes t*eta(t) over [0, radius] by a dense grid plus golden-section
// refinement of the best bracket; absolute error <= tol.
double sigma_eta(const Kernel& kernel, double tol);

struct KernelValidationReport {
  bool k1_positive_continuous_at_zero = false;
  bool k2_non_increasing = false;
  bool k3_compact_support = false;
  std::string detail;
  bool all_pass() const {
    return k1_positive_continuous_at_zero && k2_non_increasing && k3_compact_support;
  }
};

KernelValidationReport validate_kernel(const Kernel& kernel, int grid_n);

} // namespace liplab
