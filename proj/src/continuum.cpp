#include "liplab/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace liplab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double signed_power(double x, double p) {
  return x >= 0 ? std::pow(x, p) : -std::pow(-x, p);
}
} // namespace

std::string to_string(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::Linear: return "linear";
    case ReferenceKind::LShapePower: return "lshape-power";
    case ReferenceKind::DistanceToBoundary: return "distance-to-boundary";
    case ReferenceKind::Custom: return "custom";
  }
  return "?";
}

ReferenceFunction ReferenceFunction::linear(std::vector<double> a) {
  if (a.empty()) throw std::invalid_argument("reference: empty direction");
  double norm2 = 0;
  for (const double c : a) norm2 += c * c;
  ReferenceFunction r;
  r.kind_ = ReferenceKind::Linear;
  r.grad_sup_ = std::sqrt(norm2);
  r.lip_const_ = r.grad_sup_;
  r.eval_ = [a = std::move(a)](std::span<const double> x) {
    double s = 0;
    for (std::size_t k = 0; k < a.size() && k < x.size(); ++k) s += a[k] * x[k];
    return s;
  };
  return r;
}

ReferenceFunction ReferenceFunction::lshape_power(double p) {
  if (!(p >= 1)) throw std::invalid_argument("reference: lshape power needs p >= 1");
  ReferenceFunction r;
  r.kind_ = ReferenceKind::LShapePower;
  r.grad_sup_ = p;
  r.lip_const_ = std::max(std::sqrt(2.0), p);
  r.eval_ = [p](std::span<const double> x) {
    if (x[0] >= 0 && x[1] >= 0) return std::pow(x[0], p);
    if (x[0] <= 0 && x[1] <= 0) return signed_power(x[1], p);
    return 0.0;
  };
  return r;
}

namespace {

double box_boundary_distance(const Domain& domain, std::span<const double> x) {
  double d = kInf;
  for (int k = 0; k < domain.dim(); ++k)
    d = std::min({d, x[k] - domain.lo()[k], domain.hi()[k] - x[k]});
  return std::max(d, 0.0);
}

double dist_to_closed_box2(double x, double y, double lx, double ly, double hx,
                           double hy) {
  const double dx = std::max({lx - x, x - hx, 0.0});
  const double dy = std::max({ly - y, y - hy, 0.0});
  return std::sqrt(dx * dx + dy * dy);
}

double point_seg_dist(double px, double py, double ax, double ay, double bx,
                      double by) {
  const double vx = bx - ax, vy = by - ay;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0 ? ((px - ax) * vx + (py - ay) * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

} // namespace

ReferenceFunction ReferenceFunction::distance_to_boundary(const Domain& domain) {
  ReferenceFunction r;
  r.kind_ = ReferenceKind::DistanceToBoundary;
  r.lip_const_ = 1.0;
  switch (domain.kind()) {
    case DomainKind::UnitBox:
    case DomainKind::ScaledBox:
      r.eval_ = [domain](std::span<const double> x) {
        return box_boundary_distance(domain, x);
      };
      break;
    case DomainKind::LShape:
      r.eval_ = [](std::span<const double> x) {
        const double outer = 1.0 - std::max(std::abs(x[0]), std::abs(x[1]));
        const double notch = dist_to_closed_box2(x[0], x[1], 0.0, -1.0, 1.0, 0.0);
        return std::max(std::min(outer, notch), 0.0);
      };
      break;
    case DomainKind::Polygon:
      r.eval_ = [poly = domain.polygon_vertices()](std::span<const double> x) {
        double best = kInf;
        const std::size_t m = poly.size() / 2;
        for (std::size_t i = 0, j = m - 1; i < m; j = i++)
          best = std::min(best, point_seg_dist(x[0], x[1], poly[2 * j], poly[2 * j + 1],
                                               poly[2 * i], poly[2 * i + 1]));
        return best;
      };
      break;
  }
  return r;
}

ReferenceFunction ReferenceFunction::custom(
    std::function<double(std::span<const double>)> eval, std::optional<double> grad_sup,
    std::optional<double> lip_const) {
  ReferenceFunction r;
  r.kind_ = ReferenceKind::Custom;
  r.eval_ = std::move(eval);
  r.grad_sup_ = grad_sup;
  r.lip_const_ = lip_const;
  return r;
}

double continuum_functional(const ReferenceFunction& ref, const Domain& domain,
                            double mesh_h) {
  if (ref.grad_sup()) return *ref.grad_sup();
  if (!(mesh_h > 0)) throw std::invalid_argument("continuum_functional: mesh_h must be positive");
  const int d = domain.dim();
  const double step = mesh_h / 2.0;
  std::vector<int64_t> counts(d);
  for (int k = 0; k < d; ++k)
    counts[k] = static_cast<int64_t>(
                    std::floor((domain.hi()[k] - domain.lo()[k]) / mesh_h + 1e-9)) + 1;
  std::vector<int64_t> idx(d, 0);
  std::vector<double> x(d), xp(d), xm(d);
  double worst = 0;
  while (true) {
    for (int k = 0; k < d; ++k) x[k] = domain.lo()[k] + idx[k] * mesh_h;
    if (domain.closure_inside(x)) {
      double grad2 = 0;
      bool usable = true;
      for (int k = 0; k < d && usable; ++k) {
        xp = x;
        xm = x;
        xp[k] = x[k] + step;
        xm[k] = x[k] - step;
        const bool has_p = domain.closure_inside(xp);
        const bool has_m = domain.closure_inside(xm);
        const double u0 = ref(x);
        double fwd = 0, bwd = 0;
        if (has_p) fwd = (ref(xp) - u0) / step;
        if (has_m) bwd = (u0 - ref(xm)) / step;
        double deriv;
        if (has_p && has_m) {
          if (std::abs(fwd - bwd) > 0.5) { // ridge of a non-smooth point
            usable = false;
            break;
          }
          deriv = (ref(xp) - ref(xm)) / (2.0 * step);
        } else if (has_p) {
          deriv = fwd;
        } else if (has_m) {
          deriv = bwd;
        } else {
          usable = false;
          break;
        }
        grad2 += deriv * deriv;
      }
      if (usable) worst = std::max(worst, std::sqrt(grad2));
    }
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == counts[axis]) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return worst;
}

double lipschitz_constant(const ReferenceFunction& ref, const Domain& domain,
                          int sample_n, uint64_t seed) {
  if (ref.lip_const()) return *ref.lip_const();
  if (sample_n < 2) throw std::invalid_argument("lipschitz_constant: sample_n must be >= 2");
  const int d = domain.dim();
  // seeded random in-domain points
  uint64_t s = seed ? seed : 1;
  auto next = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  };
  std::vector<double> pts;
  std::vector<double> p(d);
  int guard = 0;
  while (pts.size() < static_cast<std::size_t>(sample_n) * d && guard < sample_n * 10000) {
    ++guard;
    for (int k = 0; k < d; ++k)
      p[k] = domain.lo()[k] +
             (domain.hi()[k] - domain.lo()[k]) *
                 (static_cast<double>(next() >> 11) * 0x1.0p-53);
    if (domain.inside(p)) pts.insert(pts.end(), p.begin(), p.end());
  }
  const std::size_t n = pts.size() / d;
  double best = 0;
  auto ratio = [&](std::span<const double> a, std::span<const double> b) {
    const double dd = dist(a, b);
    if (dd == 0) return 0.0;
    return std::abs(ref(a) - ref(b)) / dd;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      best = std::max(best, ratio({pts.data() + i * d, static_cast<std::size_t>(d)},
                                  {pts.data() + j * d, static_cast<std::size_t>(d)}));
  // near pairs: every sample against small offsets, approximating the local slope
  const double h = 1e-4 * std::max(1.0, domain.shortest_side());
  std::vector<double> q(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      for (const double sgn : {-1.0, 1.0}) {
        for (int m = 0; m < d; ++m) q[m] = pts[i * d + m];
        q[k] += sgn * h;
        if (domain.inside(q))
          best = std::max(best, ratio({pts.data() + i * d, static_cast<std::size_t>(d)}, q));
      }
    }
  }
  return best;
}

double nonlocal_functional(const ReferenceFunction& ref, const Domain& domain,
                           const Kernel& kernel, double s, double pair_h) {
  if (!(s > 0)) throw std::invalid_argument("nonlocal_functional: s must be positive");
  if (!(pair_h <= s / 10.0 + 1e-15))
    throw std::invalid_argument("nonlocal_functional: pair_h must be <= s/10");
  const int d = domain.dim();
  const double radius = s * kernel.radius();

  // lattice nodes in the closure, with values
  std::vector<double> coords;
  std::vector<int64_t> counts(d);
  for (int k = 0; k < d; ++k)
    counts[k] = static_cast<int64_t>(
                    std::floor((domain.hi()[k] - domain.lo()[k]) / pair_h + 1e-9)) + 1;
  std::vector<int64_t> idx(d, 0);
  std::vector<double> p(d);
  while (true) {
    for (int k = 0; k < d; ++k) p[k] = domain.lo()[k] + idx[k] * pair_h;
    if (domain.closure_inside(p)) coords.insert(coords.end(), p.begin(), p.end());
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == counts[axis]) idx[axis--] = 0;
    if (axis < 0) break;
  }
  if (coords.empty()) return 0.0;
  const std::size_t n = coords.size() / d;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i)
    values[i] = ref(std::span<const double>(coords.data() + i * d, d));

  // bucket the nodes; cell pairs are pruned with a per-cell value envelope,
  // which is exact because the max-reduction is order-independent and the
  // kernel is non-increasing
  const double cell = std::max(radius / 5.0, pair_h);
  int64_t dims[3] = {1, 1, 1};
  for (int k = 0; k < d; ++k)
    dims[k] = static_cast<int64_t>(
                  std::floor((domain.hi()[k] - domain.lo()[k]) / cell)) + 1;
  const int64_t ncells = dims[0] * dims[1] * dims[2];
  std::vector<uint32_t> bucket(n), offsets(static_cast<std::size_t>(ncells) + 1, 0);
  auto cell_of = [&](const double* pt) {
    int64_t f = 0;
    for (int k = 0; k < d; ++k) {
      int64_t c = static_cast<int64_t>(std::floor((pt[k] - domain.lo()[k]) / cell));
      c = std::clamp<int64_t>(c, 0, dims[k] - 1);
      f = f * dims[k] + c;
    }
    return f;
  };
  for (std::size_t i = 0; i < n; ++i) {
    bucket[i] = static_cast<uint32_t>(cell_of(coords.data() + i * d));
    ++offsets[bucket[i] + 1];
  }
  for (std::size_t c = 1; c < offsets.size(); ++c) offsets[c] += offsets[c - 1];
  std::vector<uint32_t> items(n);
  {
    std::vector<uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < n; ++i) items[cursor[bucket[i]]++] = static_cast<uint32_t>(i);
  }
  std::vector<double> cell_min(ncells, kInf), cell_max(ncells, -kInf);
  for (std::size_t i = 0; i < n; ++i) {
    cell_min[bucket[i]] = std::min(cell_min[bucket[i]], values[i]);
    cell_max[bucket[i]] = std::max(cell_max[bucket[i]], values[i]);
  }

  const int64_t reach = static_cast<int64_t>(std::ceil(radius / cell));
  const double r2 = radius * radius;
  double worst = 0;
  auto flat = [&](const int64_t* c) {
    int64_t f = 0;
    for (int k = 0; k < d; ++k) f = f * dims[k] + c[k];
    return f;
  };
  int64_t ca[3] = {0, 0, 0};
  while (true) {
    const int64_t a = flat(ca);
    if (offsets[a + 1] > offsets[a]) {
      int64_t lo_c[3] = {0, 0, 0}, hi_c[3] = {0, 0, 0};
      for (int k = 0; k < d; ++k) {
        lo_c[k] = std::max<int64_t>(0, ca[k] - reach);
        hi_c[k] = std::min<int64_t>(dims[k] - 1, ca[k] + reach);
      }
      int64_t cb[3] = {lo_c[0], lo_c[1], lo_c[2]};
      while (true) {
        const int64_t b = flat(cb);
        if (b >= a && offsets[b + 1] > offsets[b]) {
          // minimal distance between the two cell boxes
          double dmin2 = 0;
          for (int k = 0; k < d; ++k) {
            const int64_t gap = std::abs(ca[k] - cb[k]) - 1;
            if (gap > 0) dmin2 += static_cast<double>(gap) * gap * cell * cell;
          }
          if (dmin2 <= r2) {
            const double envelope =
                std::max({cell_max[a] - cell_min[b], cell_max[b] - cell_min[a], 0.0});
            if (kernel(std::sqrt(dmin2) / s) * envelope > worst) {
              const bool flat_kernel = kernel.kind() == KernelKind::Indicator;
              for (uint32_t ta = offsets[a]; ta < offsets[a + 1]; ++ta) {
                const uint32_t i = items[ta];
                const std::span<const double> pi(coords.data() + i * d, d);
                for (uint32_t tb = (a == b ? ta + 1 : offsets[b]); tb < offsets[b + 1]; ++tb) {
                  const uint32_t j = items[tb];
                  const double d2 = sq_dist(pi, {coords.data() + j * d, static_cast<std::size_t>(d)});
                  if (d2 > r2) continue;
                  if (flat_kernel) {
                    worst = std::max(worst, std::abs(values[i] - values[j]));
                    continue;
                  }
                  const double w = kernel(std::sqrt(d2) / s);
                  if (w > 0) worst = std::max(worst, w * std::abs(values[i] - values[j]));
                }
              }
            }
          }
        }
        int axis = d - 1;
        while (axis >= 0 && ++cb[axis] > hi_c[axis]) cb[axis] = lo_c[axis], --axis;
        if (axis < 0) break;
      }
    }
    int axis = d - 1;
    while (axis >= 0 && ++ca[axis] == dims[axis]) ca[axis--] = 0;
    if (axis < 0) break;
  }
  return worst / s;
}

GeodesicField distance_to_constraint(const Domain& domain,
                                     const ConstraintGeometry& constraint,
                                     double mesh_h) {
  if (constraint.continuum_samples.empty())
    throw std::invalid_argument("distance_to_constraint: continuum samples required");
  return geodesic_distance_field(domain, constraint.continuum_samples, mesh_h);
}

} // namespace liplab
