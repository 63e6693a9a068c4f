#include "liplab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace liplab {

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Indicator: return "indicator";
    case KernelKind::Tent: return "tent";
    case KernelKind::TruncatedExponential: return "truncated-exponential";
    case KernelKind::CustomTable: return "custom-table";
  }
  return "?";
}

double Kernel::operator()(double t) const {
  if (t < 0) t = -t;
  switch (kind_) {
    case KernelKind::Indicator:
      return t <= radius_ ? 1.0 : 0.0;
    case KernelKind::Tent:
      return std::max(1.0 - t, 0.0);
    case KernelKind::TruncatedExponential:
      return t <= radius_ ? std::exp(-t * t) : 0.0;
    case KernelKind::CustomTable: {
      if (table_.empty()) return 0.0;
      if (t > table_.back().first) {
        // untruncated tables (radius beyond the last node) extend constantly
        return t <= radius_ ? table_.back().second : 0.0;
      }
      auto it = std::lower_bound(table_.begin(), table_.end(), t,
                                 [](const auto& row, double x) { return row.first < x; });
      if (it == table_.begin()) return it->second;
      const auto [t1, v1] = *it;
      const auto [t0, v0] = *(it - 1);
      const double w = (t - t0) / (t1 - t0);
      return v0 + w * (v1 - v0);
    }
  }
  return 0.0;
}

Kernel Kernel::indicator() {
  Kernel k;
  k.kind_ = KernelKind::Indicator;
  k.radius_ = 1.0;
  k.cache_sigma();
  return k;
}

Kernel Kernel::tent() {
  Kernel k;
  k.kind_ = KernelKind::Tent;
  k.radius_ = 1.0;
  k.cache_sigma();
  return k;
}

Kernel Kernel::truncated_exponential() {
  Kernel k;
  k.kind_ = KernelKind::TruncatedExponential;
  k.radius_ = 2.0;
  k.cache_sigma();
  return k;
}

Kernel Kernel::custom_table(std::vector<std::pair<double, double>> table) {
  if (table.empty() || table.front().first != 0.0)
    throw std::invalid_argument("kernel assumption violated (K1): table must start at t=0");
  if (table.front().second <= 0.0)
    throw std::invalid_argument("kernel assumption violated (K1): eta(0) must be positive");
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (!(table[i].first > table[i - 1].first))
      throw std::invalid_argument("kernel: table t-values must be strictly increasing");
    if (table[i].second > table[i - 1].second + 1e-12)
      throw std::invalid_argument("kernel assumption violated (K2): table must be non-increasing");
    if (table[i].second < 0)
      throw std::invalid_argument("kernel: negative table value");
  }
  Kernel k;
  k.kind_ = KernelKind::CustomTable;
  k.table_ = std::move(table);
  k.radius_ = k.table_.back().first;
  if (!(k.radius_ < 1e15))
    throw std::invalid_argument("kernel assumption violated (K3): support must be bounded");
  k.cache_sigma();
  return k;
}

Kernel Kernel::custom_table_unchecked(std::vector<std::pair<double, double>> table,
                                      double radius) {
  Kernel k;
  k.kind_ = KernelKind::CustomTable;
  k.table_ = std::move(table);
  k.radius_ = radius;
  k.sigma_ = 0.0; // not meaningful for invalid profiles
  return k;
}

void Kernel::cache_sigma() { sigma_ = sigma_eta(*this, 1e-12); }

double sigma_eta(const Kernel& kernel, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("sigma_eta: tol must be positive");
  const double r = std::min(kernel.radius(), 1e15);
  auto f = [&kernel](double t) { return t * kernel(t); };
  const int n = 4096;
  double best_t = 0, best_v = 0;
  for (int i = 0; i <= n; ++i) {
    const double t = r * static_cast<double>(i) / n;
    const double v = f(t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  // golden-section on the bracket around the best grid node
  double a = std::max(0.0, best_t - r / n);
  double b = std::min(r, best_t + r / n);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    }
  }
  return std::max({best_v, fc, fd});
}

KernelValidationReport validate_kernel(const Kernel& kernel, int grid_n) {
  if (grid_n < 100) throw std::invalid_argument("validate_kernel: grid_n must be >= 100");
  KernelValidationReport rep;
  const double r = std::min(kernel.radius(), 1e15);
  const double span = 2.0 * r;
  const double at0 = kernel(0.0);

  // (K1) positive at 0 and no jump over the first grid steps
  const double step = span / grid_n;
  rep.k1_positive_continuous_at_zero =
      at0 > 0 && std::abs(kernel(step) - at0) <= 0.5 * at0 + 1e-9;
  if (at0 <= 0) rep.detail += "(K1) eta(0) not positive; ";

  // (K2) non-increasing on the grid
  rep.k2_non_increasing = true;
  double prev = at0;
  for (int i = 1; i <= grid_n; ++i) {
    const double v = kernel(span * static_cast<double>(i) / grid_n);
    if (v > prev + 1e-12) {
      rep.k2_non_increasing = false;
      rep.detail += "(K2) increasing segment; ";
      break;
    }
    prev = v;
  }

  // (K3) bounded support and zero beyond the radius
  rep.k3_compact_support = kernel.radius() < 1e15;
  if (rep.k3_compact_support) {
    for (int i = 0; i <= grid_n; ++i) {
      const double t = kernel.radius() * (1.0 + static_cast<double>(i + 1) / grid_n);
      if (kernel(t) != 0.0) {
        rep.k3_compact_support = false;
        break;
      }
    }
  }
  if (!rep.k3_compact_support) rep.detail += "(K3) support not compact; ";
  return rep;
}

} // namespace liplab
