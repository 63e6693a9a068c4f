#include "liplab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_set>

namespace liplab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dist(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(sq_dist(a, b));
}

std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::UnitBox: return "unit-box";
    case DomainKind::ScaledBox: return "scaled-box";
    case DomainKind::LShape: return "l-shape";
    case DomainKind::Polygon: return "polygon";
  }
  return "?";
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Grid: return "grid";
    case Provenance::Uniform: return "uniform";
    case Provenance::Halton: return "halton";
    case Provenance::Explicit: return "explicit";
  }
  return "?";
}

// --- Domain -----------------------------------------------------------------

Domain Domain::unit_box(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("domain: dim must be in [1,3]");
  Domain d;
  d.kind_ = DomainKind::UnitBox;
  d.dim_ = dim;
  d.lo_.assign(dim, 0.0);
  d.hi_.assign(dim, 1.0);
  return d;
}

Domain Domain::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size() || lo.size() > 3)
    throw std::invalid_argument("domain: bad box corners");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw std::invalid_argument("domain: empty box side");
  Domain d;
  d.kind_ = DomainKind::ScaledBox;
  d.dim_ = static_cast<int>(lo.size());
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

Domain Domain::l_shape() {
  Domain d;
  d.kind_ = DomainKind::LShape;
  d.dim_ = 2;
  d.lo_ = {-1.0, -1.0};
  d.hi_ = {1.0, 1.0};
  return d;
}

Domain Domain::polygon(std::vector<double> vertices_flat) {
  if (vertices_flat.size() < 6 || vertices_flat.size() % 2 != 0)
    throw std::invalid_argument("domain: polygon needs >= 3 vertices");
  Domain d;
  d.kind_ = DomainKind::Polygon;
  d.dim_ = 2;
  d.poly_ = std::move(vertices_flat);
  d.lo_ = {kInf, kInf};
  d.hi_ = {-kInf, -kInf};
  for (std::size_t i = 0; i < d.poly_.size(); i += 2) {
    d.lo_[0] = std::min(d.lo_[0], d.poly_[i]);
    d.lo_[1] = std::min(d.lo_[1], d.poly_[i + 1]);
    d.hi_[0] = std::max(d.hi_[0], d.poly_[i]);
    d.hi_[1] = std::max(d.hi_[1], d.poly_[i + 1]);
  }
  return d;
}

double Domain::shortest_side() const {
  double s = kInf;
  for (int i = 0; i < dim_; ++i) s = std::min(s, hi_[i] - lo_[i]);
  return s;
}

double Domain::volume_bbox() const {
  double v = 1;
  for (int i = 0; i < dim_; ++i) v *= hi_[i] - lo_[i];
  return v;
}

namespace {

// Even-odd crossing test; returns true for strictly interior points, false on
// (or numerically on) the boundary is not guaranteed -- callers pair it with
// an edge-distance test.
bool polygon_crossing(const std::vector<double>& poly, double x, double y) {
  bool in = false;
  const std::size_t m = poly.size() / 2;
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const double xi = poly[2 * i], yi = poly[2 * i + 1];
    const double xj = poly[2 * j], yj = poly[2 * j + 1];
    if ((yi > y) != (yj > y)) {
      const double t = (y - yi) / (yj - yi);
      if (x < xi + t * (xj - xi)) in = !in;
    }
  }
  return in;
}

double point_segment_sq_dist(double px, double py, double ax, double ay,
                             double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double wx = px - ax, wy = py - ay;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = wx - t * vx, dy = wy - t * vy;
  return dx * dx + dy * dy;
}

double polygon_boundary_sq_dist(const std::vector<double>& poly, double x, double y) {
  double best = kInf;
  const std::size_t m = poly.size() / 2;
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    best = std::min(best, point_segment_sq_dist(x, y, poly[2 * i], poly[2 * i + 1],
                                                poly[2 * j], poly[2 * j + 1]));
  }
  return best;
}

} // namespace

bool Domain::inside(std::span<const double> x) const {
  switch (kind_) {
    case DomainKind::UnitBox:
    case DomainKind::ScaledBox: {
      for (int i = 0; i < dim_; ++i)
        if (!(x[i] > lo_[i] && x[i] < hi_[i])) return false;
      return true;
    }
    case DomainKind::LShape: {
      if (!(std::max(std::abs(x[0]), std::abs(x[1])) < 1.0)) return false;
      return !(x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= -1.0 && x[1] <= 0.0);
    }
    case DomainKind::Polygon: {
      const double eps2 = 1e-24;
      if (polygon_boundary_sq_dist(poly_, x[0], x[1]) <= eps2) return false;
      return polygon_crossing(poly_, x[0], x[1]);
    }
  }
  return false;
}

bool Domain::closure_inside(std::span<const double> x) const {
  switch (kind_) {
    case DomainKind::UnitBox:
    case DomainKind::ScaledBox: {
      for (int i = 0; i < dim_; ++i)
        if (!(x[i] >= lo_[i] && x[i] <= hi_[i])) return false;
      return true;
    }
    case DomainKind::LShape: {
      // Closure keeps the notch edges {0} x [-1,0] and [0,1] x {0} but not the
      // right/bottom faces of the removed quadrant.
      if (!(std::max(std::abs(x[0]), std::abs(x[1])) <= 1.0)) return false;
      return !(x[0] > 0.0 && x[0] <= 1.0 && x[1] >= -1.0 && x[1] < 0.0);
    }
    case DomainKind::Polygon: {
      const double diam = std::max(hi_[0] - lo_[0], hi_[1] - lo_[1]);
      const double eps = 1e-12 * std::max(1.0, diam);
      if (polygon_boundary_sq_dist(poly_, x[0], x[1]) <= eps * eps) return true;
      return polygon_crossing(poly_, x[0], x[1]);
    }
  }
  return false;
}

bool Domain::segment_in_closure(std::span<const double> a,
                                std::span<const double> b, double step) const {
  const double len = dist(a, b);
  const int m = std::max(1, static_cast<int>(std::ceil(len / std::max(step, 1e-300))));
  std::vector<double> p(dim_);
  for (int i = 0; i <= m; ++i) {
    const double t = static_cast<double>(i) / m;
    for (int k = 0; k < dim_; ++k) p[k] = a[k] + t * (b[k] - a[k]);
    if (!closure_inside(p)) return false;
  }
  return true;
}

// --- PointCloud ---------------------------------------------------------------

PointCloud::PointCloud(int dim, std::vector<double> coords_flat, Provenance prov,
                       std::optional<uint64_t> seed)
    : dim_(dim), coords_(std::move(coords_flat)), prov_(prov), seed_(seed) {
  if (dim_ < 1) throw std::invalid_argument("cloud: dim must be positive");
  if (coords_.size() % dim_ != 0)
    throw std::invalid_argument("cloud: coordinate count not divisible by dim");
  const std::size_t n = size();
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto less = [&](uint32_t a, uint32_t b) {
    for (int k = 0; k < dim_; ++k) {
      const double xa = coords_[a * dim_ + k], xb = coords_[b * dim_ + k];
      if (xa != xb) return xa < xb;
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < n; ++i) {
    if (!less(order[i - 1], order[i]) && !less(order[i], order[i - 1]))
      throw std::invalid_argument("cloud: duplicate point");
  }
}

ConstraintGeometry::ConstraintGeometry(int d, std::vector<double> samples,
                                       std::vector<uint32_t> indices)
    : dim(d), continuum_samples(std::move(samples)), discrete_indices(std::move(indices)) {
  std::vector<uint32_t> sorted = discrete_indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("constraint: duplicate discrete index");
}

// --- Sampling -----------------------------------------------------------------

PointCloud sample_grid(const Domain& domain, double h) {
  if (!(h > 0)) throw std::invalid_argument("sample_grid: h must be positive");
  if (!(h < domain.shortest_side()))
    throw std::invalid_argument("sample_grid: h must be below the shortest bounding-box side");
  const int d = domain.dim();
  std::vector<int64_t> counts(d);
  for (int k = 0; k < d; ++k)
    counts[k] = static_cast<int64_t>(std::floor((domain.hi()[k] - domain.lo()[k]) / h + 1e-9)) + 1;
  std::vector<double> coords;
  std::vector<int64_t> idx(d, 0);
  std::vector<double> p(d);
  // lexicographic order over lattice multi-indices
  while (true) {
    for (int k = 0; k < d; ++k) p[k] = domain.lo()[k] + idx[k] * h;
    if (domain.closure_inside(p)) coords.insert(coords.end(), p.begin(), p.end());
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == counts[axis]) idx[axis--] = 0;
    if (axis < 0) break;
  }
  if (coords.empty()) throw std::runtime_error("sample_grid: empty cloud");
  return PointCloud(d, std::move(coords), Provenance::Grid);
}

namespace {

double unit_double(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct Splitmix64 {
  uint64_t s;
  uint64_t next() {
    uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

struct CoordHash {
  std::size_t operator()(const std::vector<double>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (double x : v) {
      uint64_t b;
      static_assert(sizeof(b) == sizeof(x));
      std::memcpy(&b, &x, sizeof(b));
      h = (h ^ b) * 1099511628211ull;
    }
    return h;
  }
};

} // namespace

PointCloud sample_uniform(const Domain& domain, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_uniform: n must be >= 1");
  const int d = domain.dim();
  Splitmix64 rng{seed};
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(n) * d);
  std::unordered_set<std::vector<double>, CoordHash> seen;
  std::vector<double> p(d);
  uint64_t attempts = 0, accepted = 0;
  while (accepted < static_cast<uint64_t>(n)) {
    ++attempts;
    for (int k = 0; k < d; ++k)
      p[k] = domain.lo()[k] + unit_double(rng.next()) * (domain.hi()[k] - domain.lo()[k]);
    if (domain.inside(p) && seen.insert(p).second) {
      coords.insert(coords.end(), p.begin(), p.end());
      ++accepted;
    }
    if (attempts % 1000000 == 0 &&
        static_cast<double>(accepted) / static_cast<double>(attempts) < 1e-6)
      throw std::runtime_error("sample_uniform: degenerate domain");
  }
  return PointCloud(d, std::move(coords), Provenance::Uniform, seed);
}

namespace {
double van_der_corput(uint64_t i, uint64_t base) {
  double x = 0.0, f = 1.0 / static_cast<double>(base);
  while (i > 0) {
    x += f * static_cast<double>(i % base);
    i /= base;
    f /= static_cast<double>(base);
  }
  return x;
}
} // namespace

PointCloud sample_halton(const Domain& domain, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_halton: n must be >= 1");
  const int d = domain.dim();
  static const uint64_t bases[3] = {2, 3, 5};
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(n) * d);
  std::vector<double> p(d);
  uint64_t i = seed % 100003; // seed shifts the start index
  uint64_t accepted = 0, attempts = 0;
  while (accepted < static_cast<uint64_t>(n)) {
    ++i;
    ++attempts;
    for (int k = 0; k < d; ++k)
      p[k] = domain.lo()[k] + van_der_corput(i, bases[k]) * (domain.hi()[k] - domain.lo()[k]);
    if (domain.inside(p)) {
      coords.insert(coords.end(), p.begin(), p.end());
      ++accepted;
    }
    if (attempts % 1000000 == 0 &&
        static_cast<double>(accepted) / static_cast<double>(attempts) < 1e-6)
      throw std::runtime_error("sample_halton: degenerate domain");
  }
  return PointCloud(d, std::move(coords), Provenance::Halton, seed);
}

namespace {

void append_segment_samples(std::span<const double> a, std::span<const double> b,
                            double spacing, std::vector<double>& out) {
  const double len = dist(a, b);
  const int m = std::max(1, static_cast<int>(std::ceil(len / spacing)));
  for (int i = 0; i <= m; ++i) {
    const double t = static_cast<double>(i) / m;
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back(a[k] + t * (b[k] - a[k]));
  }
}

std::vector<double> dedup_points(std::vector<double> flat, int dim) {
  std::vector<double> out;
  std::unordered_set<std::vector<double>, CoordHash> seen;
  std::vector<double> p(dim);
  for (std::size_t i = 0; i + dim <= flat.size(); i += dim) {
    p.assign(flat.begin() + i, flat.begin() + i + dim);
    if (seen.insert(p).second) out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

} // namespace

std::vector<double> sample_boundary(const Domain& domain, double spacing) {
  if (!(spacing > 0)) throw std::invalid_argument("sample_boundary: spacing must be positive");
  const int d = domain.dim();
  std::vector<double> out;
  switch (domain.kind()) {
    case DomainKind::UnitBox:
    case DomainKind::ScaledBox: {
      if (d == 1) {
        out = {domain.lo()[0], domain.hi()[0]};
        return out;
      }
      // lattice over each face
      for (int axis = 0; axis < d; ++axis) {
        for (int side = 0; side < 2; ++side) {
          const double fixed = side == 0 ? domain.lo()[axis] : domain.hi()[axis];
          std::vector<int> other;
          for (int k = 0; k < d; ++k)
            if (k != axis) other.push_back(k);
          std::vector<int64_t> counts(other.size());
          for (std::size_t k = 0; k < other.size(); ++k)
            counts[k] = std::max<int64_t>(
                1, static_cast<int64_t>(std::ceil((domain.hi()[other[k]] - domain.lo()[other[k]]) / spacing)));
          std::vector<int64_t> idx(other.size(), 0);
          while (true) {
            std::vector<double> p(d);
            p[axis] = fixed;
            for (std::size_t k = 0; k < other.size(); ++k)
              p[other[k]] = domain.lo()[other[k]] +
                            (domain.hi()[other[k]] - domain.lo()[other[k]]) *
                                (static_cast<double>(idx[k]) / counts[k]);
            out.insert(out.end(), p.begin(), p.end());
            // include the far endpoint of each face axis
            int ax = static_cast<int>(other.size()) - 1;
            while (ax >= 0 && ++idx[ax] > counts[ax]) idx[ax--] = 0;
            if (ax < 0) break;
          }
        }
      }
      return dedup_points(std::move(out), d);
    }
    case DomainKind::LShape: {
      const double v[] = {1, 0, 0, 0, 0, -1, -1, -1, -1, 1, 1, 1, 1, 0};
      for (int i = 0; i + 3 < 14; i += 2) {
        const double a[2] = {v[i], v[i + 1]};
        const double b[2] = {v[i + 2], v[i + 3]};
        append_segment_samples({a, 2}, {b, 2}, spacing, out);
      }
      return dedup_points(std::move(out), 2);
    }
    case DomainKind::Polygon: {
      const std::vector<double>& poly = domain.polygon_vertices();
      const std::size_t m = poly.size() / 2;
      for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
        const double a[2] = {poly[2 * j], poly[2 * j + 1]};
        const double b[2] = {poly[2 * i], poly[2 * i + 1]};
        append_segment_samples({a, 2}, {b, 2}, spacing, out);
      }
      return dedup_points(std::move(out), 2);
    }
  }
  return out;
}

// --- GridIndex -----------------------------------------------------------------

GridIndex::GridIndex(const PointCloud& cloud, double cell)
    : cloud_(&cloud), cell_(cell), dim_(cloud.dim()) {
  if (cloud.size() == 0) throw std::invalid_argument("grid index: empty cloud");
  if (!(cell_ > 0)) throw std::invalid_argument("grid index: cell must be positive");
  lo_.assign(dim_, kInf);
  std::vector<double> hi(dim_, -kInf);
  const std::size_t n = cloud.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto p = cloud.point(i);
    for (int k = 0; k < dim_; ++k) {
      lo_[k] = std::min(lo_[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  dims_.assign(dim_, 1);
  int64_t ncells = 1;
  for (int k = 0; k < dim_; ++k) {
    dims_[k] = std::max<int64_t>(1, static_cast<int64_t>(std::floor((hi[k] - lo_[k]) / cell_)) + 1);
    ncells *= dims_[k];
  }
  std::vector<uint32_t> bucket_of(n);
  offsets_.assign(static_cast<std::size_t>(ncells) + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = cloud.point(i);
    int64_t c[3] = {0, 0, 0};
    for (int k = 0; k < dim_; ++k) c[k] = cell_coord(p[k], k);
    bucket_of[i] = static_cast<uint32_t>(flat_cell(c));
    ++offsets_[bucket_of[i] + 1];
  }
  for (std::size_t c = 1; c < offsets_.size(); ++c) offsets_[c] += offsets_[c - 1];
  items_.resize(n);
  std::vector<uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) items_[cursor[bucket_of[i]]++] = static_cast<uint32_t>(i);
}

int64_t GridIndex::cell_coord(double x, int axis) const {
  int64_t c = static_cast<int64_t>(std::floor((x - lo_[axis]) / cell_));
  return std::clamp<int64_t>(c, 0, dims_[axis] - 1);
}

int64_t GridIndex::flat_cell(const int64_t* c) const {
  int64_t f = 0;
  for (int k = 0; k < dim_; ++k) f = f * dims_[k] + c[k];
  return f;
}

template <typename F>
void GridIndex::for_cells_in_ring(const int64_t* c0, int64_t ring, F&& f) const {
  int64_t c[3] = {0, 0, 0};
  const int64_t r = ring;
  auto chebyshev = [&](const int64_t* c0v, const int64_t* cv) {
    int64_t m = 0;
    for (int k = 0; k < dim_; ++k) m = std::max(m, std::abs(c0v[k] - cv[k]));
    return m;
  };
  int64_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  for (int k = 0; k < dim_; ++k) {
    lo[k] = std::max<int64_t>(0, c0[k] - r);
    hi[k] = std::min<int64_t>(dims_[k] - 1, c0[k] + r);
    if (lo[k] > hi[k]) return;
  }
  if (dim_ == 1) {
    for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0])
      if (chebyshev(c0, c) == r) f(flat_cell(c));
  } else if (dim_ == 2) {
    for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0])
      for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1])
        if (chebyshev(c0, c) == r) f(flat_cell(c));
  } else {
    for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0])
      for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1])
        for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2])
          if (chebyshev(c0, c) == r) f(flat_cell(c));
  }
}

uint32_t GridIndex::nearest(std::span<const double> q) const {
  int64_t c0[3] = {0, 0, 0};
  int64_t max_off = 0;
  for (int k = 0; k < dim_; ++k) {
    const int64_t raw = static_cast<int64_t>(std::floor((q[k] - lo_[k]) / cell_));
    c0[k] = raw; // unclamped center keeps ring distance bounds valid
    max_off += std::abs(raw) + dims_[k];
  }
  double best_d2 = kInf;
  uint32_t best_i = 0;
  bool found = false;
  for (int64_t ring = 0;; ++ring) {
    bool any = false;
    for_cells_in_ring(c0, ring, [&](int64_t cell) {
      any = true;
      for (uint32_t t = offsets_[cell]; t < offsets_[cell + 1]; ++t) {
        const uint32_t i = items_[t];
        const double d2 = sq_dist(cloud_->point(i), q);
        if (d2 < best_d2 || (d2 == best_d2 && i < best_i)) {
          best_d2 = d2;
          best_i = i;
          found = true;
        }
      }
    });
    if (found) {
      const double reach = static_cast<double>(ring) * cell_;
      if (best_d2 <= reach * reach) break;
    }
    if (!any && ring > max_off) break; // rings exhausted the grid
  }
  return best_i;
}

void GridIndex::within(std::span<const double> q, double radius,
                       std::vector<uint32_t>& out) const {
  out.clear();
  const double r2 = radius * radius;
  int64_t clo[3] = {0, 0, 0}, chi[3] = {0, 0, 0};
  for (int k = 0; k < dim_; ++k) {
    clo[k] = std::max<int64_t>(0, static_cast<int64_t>(std::floor((q[k] - radius - lo_[k]) / cell_)));
    chi[k] = std::min<int64_t>(dims_[k] - 1, static_cast<int64_t>(std::floor((q[k] + radius - lo_[k]) / cell_)));
    if (clo[k] > chi[k]) return;
  }
  int64_t c[3] = {clo[0], clo[1], clo[2]};
  while (true) {
    const int64_t cell = flat_cell(c);
    for (uint32_t t = offsets_[cell]; t < offsets_[cell + 1]; ++t) {
      const uint32_t i = items_[t];
      if (sq_dist(cloud_->point(i), q) <= r2) out.push_back(i);
    }
    int axis = dim_ - 1;
    while (axis >= 0 && ++c[axis] > chi[axis]) c[axis] = clo[axis], --axis;
    if (axis < 0) break;
  }
  std::sort(out.begin(), out.end());
}

// --- Metric quantities -----------------------------------------------------------

double fill_distance(const Domain& domain, const PointCloud& cloud, double probe_h) {
  if (cloud.size() == 0) throw std::invalid_argument("fill_distance: empty cloud");
  if (!(probe_h > 0)) throw std::invalid_argument("fill_distance: probe_h must be positive");
  const int d = domain.dim();
  const double est = std::pow(domain.volume_bbox() / static_cast<double>(cloud.size()),
                              1.0 / d);
  GridIndex index(cloud, std::max(est, 1e-12));
  std::vector<int64_t> counts(d);
  for (int k = 0; k < d; ++k)
    counts[k] = static_cast<int64_t>(std::floor((domain.hi()[k] - domain.lo()[k]) / probe_h + 1e-9)) + 1;
  std::vector<int64_t> idx(d, 0);
  std::vector<double> p(d);
  double worst = 0;
  while (true) {
    for (int k = 0; k < d; ++k) p[k] = domain.lo()[k] + idx[k] * probe_h;
    if (domain.closure_inside(p)) {
      const uint32_t i = index.nearest(p);
      worst = std::max(worst, sq_dist(cloud.point(i), p));
    }
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == counts[axis]) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return std::sqrt(worst);
}

std::vector<uint32_t> closest_point_projection(const PointCloud& cloud,
                                               std::span<const double> queries_flat) {
  if (cloud.size() == 0) throw std::invalid_argument("projection: empty cloud");
  const int d = cloud.dim();
  const double est = std::pow(1.0 + static_cast<double>(cloud.size()), -1.0 / d);
  // cell from cloud extent
  double span_max = 1e-12;
  for (int k = 0; k < d; ++k) {
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      lo = std::min(lo, cloud.point(i)[k]);
      hi = std::max(hi, cloud.point(i)[k]);
    }
    span_max = std::max(span_max, hi - lo);
  }
  GridIndex index(cloud, std::max(span_max * est, 1e-12));
  std::vector<uint32_t> out;
  out.reserve(queries_flat.size() / d);
  for (std::size_t q = 0; q + d <= queries_flat.size(); q += d)
    out.push_back(index.nearest(queries_flat.subspan(q, d)));
  return out;
}

double hausdorff_distance(std::span<const double> a_flat,
                          std::span<const double> b_flat, int dim) {
  if (a_flat.empty() || b_flat.empty())
    throw std::invalid_argument("hausdorff: empty set");
  auto one_sided = [dim](std::span<const double> xs, std::span<const double> ys) {
    double worst = 0;
    for (std::size_t i = 0; i + dim <= xs.size(); i += dim) {
      double best = kInf;
      for (std::size_t j = 0; j + dim <= ys.size(); j += dim)
        best = std::min(best, sq_dist(xs.subspan(i, dim), ys.subspan(j, dim)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::sqrt(std::max(one_sided(a_flat, b_flat), one_sided(b_flat, a_flat)));
}

// --- Lattice geodesics --------------------------------------------------------

namespace {

struct MeshGraph {
  LatticeMesh mesh;
  std::vector<uint32_t> offsets;   // CSR
  std::vector<uint32_t> neighbor;
  std::vector<double> length;
};

std::vector<std::vector<int>> stencil_directions(int dim, int k) {
  std::vector<std::vector<int>> dirs;
  std::vector<int> v(dim, -k);
  while (true) {
    bool zero = true;
    for (int x : v) zero &= x == 0;
    if (!zero) {
      int g = 0;
      for (int x : v) g = std::gcd(g, std::abs(x));
      if (g == 1) dirs.push_back(v);
    }
    int axis = dim - 1;
    while (axis >= 0 && ++v[axis] > k) v[axis--] = -k;
    if (axis < 0) break;
  }
  return dirs;
}

double stencil_overestimation(const std::vector<std::vector<int>>& dirs, int dim) {
  if (dim == 1) return 1.0;
  std::vector<std::vector<double>> units;
  units.reserve(dirs.size());
  for (const auto& v : dirs) {
    double n = 0;
    for (int x : v) n += static_cast<double>(x) * x;
    n = std::sqrt(n);
    std::vector<double> u(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] / n;
    units.push_back(std::move(u));
  }
  auto worst_for = [&](const std::vector<double>& q) {
    double best = -1;
    for (const auto& u : units) {
      double dot = 0;
      for (std::size_t i = 0; i < q.size(); ++i) dot += q[i] * u[i];
      best = std::max(best, dot);
    }
    return std::acos(std::clamp(best, -1.0, 1.0));
  };
  double gap = 0;
  if (dim == 2) {
    const int m = 4096;
    for (int i = 0; i < m; ++i) {
      const double a = 2.0 * M_PI * i / m;
      gap = std::max(gap, worst_for({std::cos(a), std::sin(a)}));
    }
  } else {
    const int m = 20000; // Fibonacci sphere
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / m;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * i;
      gap = std::max(gap, worst_for({r * std::cos(a), r * std::sin(a), z}));
    }
  }
  return 1.0 / std::cos(gap);
}

MeshGraph build_mesh_graph(const Domain& domain, double h, int k) {
  if (!(h > 0)) throw std::invalid_argument("mesh: spacing must be positive");
  if (k < 1 || k > 3) throw std::invalid_argument("mesh: stencil must be in [1,3]");
  MeshGraph g;
  LatticeMesh& mesh = g.mesh;
  mesh.dim = domain.dim();
  mesh.h = h;
  mesh.stencil = k;
  mesh.lo = domain.lo();
  mesh.dims.assign(mesh.dim, 0);
  int64_t ncells = 1;
  for (int a = 0; a < mesh.dim; ++a) {
    mesh.dims[a] = static_cast<int64_t>(std::floor((domain.hi()[a] - domain.lo()[a]) / h + 1e-9)) + 1;
    ncells *= mesh.dims[a];
  }
  mesh.node_at.assign(static_cast<std::size_t>(ncells), -1);
  std::vector<double> p(mesh.dim);
  std::vector<int64_t> idx(mesh.dim, 0);
  while (true) {
    for (int a = 0; a < mesh.dim; ++a) p[a] = mesh.lo[a] + idx[a] * h;
    if (domain.closure_inside(p)) {
      int64_t f = 0;
      for (int a = 0; a < mesh.dim; ++a) f = f * mesh.dims[a] + idx[a];
      mesh.node_at[f] = static_cast<int32_t>(mesh.size());
      mesh.coords.insert(mesh.coords.end(), p.begin(), p.end());
    }
    int axis = mesh.dim - 1;
    while (axis >= 0 && ++idx[axis] == mesh.dims[axis]) idx[axis--] = 0;
    if (axis < 0) break;
  }
  const auto dirs = stencil_directions(mesh.dim, k);
  mesh.overestimation_bound = stencil_overestimation(dirs, mesh.dim);

  const std::size_t n = mesh.size();
  // recover each node's lattice index from its coordinates
  auto cell_of_node = [&](std::size_t i, int64_t* c) {
    auto pt = mesh.point(i);
    for (int a = 0; a < mesh.dim; ++a)
      c[a] = static_cast<int64_t>(std::llround((pt[a] - mesh.lo[a]) / h));
  };
  auto node_at_cell = [&](const int64_t* c) -> int32_t {
    int64_t f = 0;
    for (int a = 0; a < mesh.dim; ++a) {
      if (c[a] < 0 || c[a] >= mesh.dims[a]) return -1;
      f = f * mesh.dims[a] + c[a];
    }
    return mesh.node_at[f];
  };
  std::vector<double> dir_len(dirs.size());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    double s = 0;
    for (int x : dirs[d]) s += static_cast<double>(x) * x;
    dir_len[d] = std::sqrt(s) * h;
  }
  g.offsets.assign(n + 1, 0);
  std::vector<std::pair<uint32_t, double>> scratch;
  std::vector<std::vector<std::pair<uint32_t, double>>> adj(n);
  int64_t c[3] = {0, 0, 0}, t[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    cell_of_node(i, c);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      for (int a = 0; a < mesh.dim; ++a) t[a] = c[a] + dirs[d][a];
      const int32_t j = node_at_cell(t);
      if (j < 0 || static_cast<std::size_t>(j) <= i) continue; // undirected, build once
      if (!domain.segment_in_closure(mesh.point(i), mesh.point(j), h * 0.5)) continue;
      adj[i].push_back({static_cast<uint32_t>(j), dir_len[d]});
      adj[j].push_back({static_cast<uint32_t>(i), dir_len[d]});
    }
  }
  for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + adj[i].size();
  g.neighbor.resize(g.offsets[n]);
  g.length.resize(g.offsets[n]);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    uint32_t o = g.offsets[i];
    for (auto& [j, len] : adj[i]) {
      g.neighbor[o] = j;
      g.length[o] = len;
      ++o;
    }
  }
  return g;
}

// Multi-source Dijkstra; dist must be pre-sized to n and pre-initialized with
// +inf except at the seeds.
void dijkstra(const MeshGraph& g, std::vector<double>& dist,
              std::priority_queue<std::pair<double, uint32_t>,
                                  std::vector<std::pair<double, uint32_t>>,
                                  std::greater<>>& heap,
              double cutoff = kInf) {
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    if (d > cutoff) break;
    for (uint32_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      const uint32_t v = g.neighbor[e];
      const double nd = d + g.length[e];
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.push({nd, v});
      }
    }
  }
}

} // namespace

int32_t LatticeMesh::nearest_node(std::span<const double> q) const {
  // expanding Chebyshev rings around q's cell
  int64_t c0[3] = {0, 0, 0};
  int64_t reach = 0;
  for (int a = 0; a < dim; ++a) {
    c0[a] = static_cast<int64_t>(std::floor((q[a] - lo[a]) / h + 0.5));
    reach = std::max(reach, dims[a] + std::abs(c0[a]));
  }
  double best_d2 = kInf;
  int32_t best = -1;
  for (int64_t ring = 0; ring <= reach; ++ring) {
    int64_t lo_c[3] = {0, 0, 0}, hi_c[3] = {0, 0, 0};
    bool possible = true;
    for (int a = 0; a < dim; ++a) {
      lo_c[a] = std::max<int64_t>(0, c0[a] - ring);
      hi_c[a] = std::min<int64_t>(dims[a] - 1, c0[a] + ring);
      if (lo_c[a] > hi_c[a]) possible = false;
    }
    if (possible) {
      int64_t c[3] = {lo_c[0], dim > 1 ? lo_c[1] : 0, dim > 2 ? lo_c[2] : 0};
      while (true) {
        int64_t cheb = 0;
        for (int a = 0; a < dim; ++a) cheb = std::max(cheb, std::abs(c[a] - c0[a]));
        if (cheb == ring) {
          int64_t f = 0;
          for (int a = 0; a < dim; ++a) f = f * dims[a] + c[a];
          const int32_t id = node_at[f];
          if (id >= 0) {
            const double d2 = sq_dist(point(static_cast<std::size_t>(id)), q);
            if (d2 < best_d2) {
              best_d2 = d2;
              best = id;
            }
          }
        }
        int axis = dim - 1;
        while (axis >= 0 && ++c[axis] > hi_c[axis]) c[axis] = lo_c[axis], --axis;
        if (axis < 0) break;
      }
    }
    if (best >= 0 && best_d2 <= std::pow(static_cast<double>(ring) * h, 2)) break;
  }
  return best;
}

double GeodesicField::value_at(std::span<const double> q) const {
  const int32_t id = mesh->nearest_node(q);
  return id < 0 ? kInf : values[static_cast<std::size_t>(id)];
}

GeodesicField geodesic_distance_field(const Domain& domain,
                                      std::span<const double> sources_flat,
                                      double mesh_h, int stencil) {
  const int d = domain.dim();
  if (sources_flat.empty() || sources_flat.size() % d != 0)
    throw std::invalid_argument("geodesic field: bad source list");
  for (std::size_t s = 0; s < sources_flat.size(); s += d)
    if (!domain.closure_inside(sources_flat.subspan(s, d)))
      throw std::invalid_argument("geodesic field: source outside domain closure");

  MeshGraph g = build_mesh_graph(domain, mesh_h, stencil);
  const std::size_t n = g.mesh.size();
  std::vector<double> dist(n, kInf);
  std::priority_queue<std::pair<double, uint32_t>,
                      std::vector<std::pair<double, uint32_t>>, std::greater<>>
      heap;

  for (std::size_t s = 0; s < sources_flat.size(); s += d) {
    auto src = sources_flat.subspan(s, d);
    int64_t c0[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a)
      c0[a] = static_cast<int64_t>(std::floor((src[a] - g.mesh.lo[a]) / mesh_h + 0.5));
    bool seeded = false;
    const int64_t reach = stencil + 1;
    int64_t lo_c[3] = {0, 0, 0}, hi_c[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
      lo_c[a] = std::max<int64_t>(0, c0[a] - reach);
      hi_c[a] = std::min<int64_t>(g.mesh.dims[a] - 1, c0[a] + reach);
    }
    int64_t c[3] = {lo_c[0], d > 1 ? lo_c[1] : 0, d > 2 ? lo_c[2] : 0};
    while (true) {
      int64_t f = 0;
      for (int a = 0; a < d; ++a) f = f * g.mesh.dims[a] + c[a];
      const int32_t id = g.mesh.node_at[f];
      if (id >= 0) {
        auto node = g.mesh.point(static_cast<std::size_t>(id));
        if (domain.segment_in_closure(src, node, mesh_h * 0.5)) {
          const double init = liplab::dist(src, node);
          if (init < dist[id]) {
            dist[id] = init;
            heap.push({init, static_cast<uint32_t>(id)});
            seeded = true;
          }
        }
      }
      int axis = d - 1;
      while (axis >= 0 && ++c[axis] > hi_c[axis]) c[axis] = lo_c[axis], --axis;
      if (axis < 0) break;
    }
    if (!seeded) {
      const int32_t id = g.mesh.nearest_node(src);
      if (id >= 0) {
        const double init = liplab::dist(src, g.mesh.point(static_cast<std::size_t>(id)));
        if (init < dist[id]) {
          dist[id] = init;
          heap.push({init, static_cast<uint32_t>(id)});
        }
      }
    }
  }

  dijkstra(g, dist, heap);

  GeodesicField field;
  field.mesh = std::make_shared<LatticeMesh>(std::move(g.mesh));
  field.values = std::move(dist);
  field.unreached = static_cast<std::size_t>(
      std::count(field.values.begin(), field.values.end(), kInf));
  return field;
}

double domain_condition_ratio(const Domain& domain, double delta, double mesh_h,
                              int stencil) {
  if (!(mesh_h <= delta / 10.0 + 1e-15))
    throw std::invalid_argument("domain_condition_ratio: mesh_h must be <= delta/10");
  MeshGraph g = build_mesh_graph(domain, mesh_h, stencil);
  const std::size_t n = g.mesh.size();
  const int d = g.mesh.dim;
  const int64_t rad_cells = static_cast<int64_t>(std::ceil(delta / mesh_h));

  auto cell_of_node = [&](std::size_t i, int64_t* c) {
    auto pt = g.mesh.point(i);
    for (int a = 0; a < d; ++a)
      c[a] = static_cast<int64_t>(std::llround((pt[a] - g.mesh.lo[a]) / mesh_h));
  };

  // pairs whose straight segment stays in the closure have ratio exactly 1
  std::vector<std::vector<uint32_t>> blocked(n);
  int64_t c[3] = {0, 0, 0}, t[3] = {0, 0, 0};
  bool any_blocked = false;
  for (std::size_t i = 0; i < n; ++i) {
    cell_of_node(i, c);
    int64_t lo_c[3] = {0, 0, 0}, hi_c[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
      lo_c[a] = std::max<int64_t>(0, c[a] - rad_cells);
      hi_c[a] = std::min<int64_t>(g.mesh.dims[a] - 1, c[a] + rad_cells);
    }
    t[0] = lo_c[0];
    t[1] = d > 1 ? lo_c[1] : 0;
    t[2] = d > 2 ? lo_c[2] : 0;
    while (true) {
      int64_t f = 0;
      for (int a = 0; a < d; ++a) f = f * g.mesh.dims[a] + t[a];
      const int32_t j = g.mesh.node_at[f];
      if (j >= 0 && static_cast<std::size_t>(j) > i) {
        auto pi = g.mesh.point(i);
        auto pj = g.mesh.point(static_cast<std::size_t>(j));
        if (liplab::dist(pi, pj) < delta &&
            !domain.segment_in_closure(pi, pj, mesh_h * 0.5)) {
          blocked[i].push_back(static_cast<uint32_t>(j));
          any_blocked = true;
        }
      }
      int axis = d - 1;
      while (axis >= 0 && ++t[axis] > hi_c[axis]) t[axis] = lo_c[axis], --axis;
      if (axis < 0) break;
    }
  }
  if (!any_blocked) return 1.0;

  double worst = 1.0;
  std::vector<double> dist_arr(n, kInf);
  std::vector<uint32_t> touched;
  const double cap = 8.0 * delta;
  for (std::size_t i = 0; i < n; ++i) {
    if (blocked[i].empty()) continue;
    std::priority_queue<std::pair<double, uint32_t>,
                        std::vector<std::pair<double, uint32_t>>, std::greater<>>
        heap;
    dist_arr[i] = 0;
    touched.clear();
    touched.push_back(static_cast<uint32_t>(i));
    heap.push({0.0, static_cast<uint32_t>(i)});
    std::size_t pending = blocked[i].size();
    while (!heap.empty() && pending > 0) {
      auto [dd, u] = heap.top();
      heap.pop();
      if (dd > dist_arr[u]) continue;
      if (dd > cap) break;
      for (const uint32_t tgt : blocked[i])
        if (tgt == u) { --pending; break; }
      for (uint32_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
        const uint32_t v = g.neighbor[e];
        const double nd = dd + g.length[e];
        if (nd < dist_arr[v]) {
          if (dist_arr[v] == kInf) touched.push_back(v);
          dist_arr[v] = nd;
          heap.push({nd, v});
        }
      }
    }
    for (const uint32_t j : blocked[i]) {
      const double euclid = liplab::dist(g.mesh.point(i), g.mesh.point(j));
      worst = std::max(worst, dist_arr[j] / euclid); // +inf if unreached in cap
    }
    for (const uint32_t u : touched) dist_arr[u] = kInf;
  }
  return worst;
}

double geodesic_diameter(const Domain& domain, double mesh_h, int stencil) {
  MeshGraph g = build_mesh_graph(domain, mesh_h, stencil);
  const std::size_t n = g.mesh.size();
  if (n == 0) throw std::runtime_error("geodesic_diameter: empty mesh");
  const int d = g.mesh.dim;

  // seeds: nodes adjacent to the boundary (missing or blocked unit neighbor)
  std::vector<uint32_t> seeds;
  int64_t c[3] = {0, 0, 0}, t[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    auto pt = g.mesh.point(i);
    for (int a = 0; a < d; ++a)
      c[a] = static_cast<int64_t>(std::llround((pt[a] - g.mesh.lo[a]) / mesh_h));
    bool boundary = false;
    int64_t off[3] = {-1, -1, -1};
    while (!boundary) {
      bool zero = true;
      for (int a = 0; a < d; ++a) zero &= off[a] == 0;
      if (!zero) {
        bool outside = false;
        int64_t f = 0;
        for (int a = 0; a < d; ++a) {
          t[a] = c[a] + off[a];
          if (t[a] < 0 || t[a] >= g.mesh.dims[a]) outside = true;
          else f = f * g.mesh.dims[a] + t[a];
        }
        if (outside || g.mesh.node_at[f] < 0) boundary = true;
      }
      int axis = d - 1;
      while (axis >= 0 && ++off[axis] > 1) off[axis--] = -1;
      if (axis < 0) break;
    }
    if (boundary) seeds.push_back(static_cast<uint32_t>(i));
  }
  if (seeds.empty()) seeds.push_back(0);

  double diameter = 0;
  std::vector<double> dist_arr;
  for (const uint32_t s : seeds) {
    dist_arr.assign(n, kInf);
    std::priority_queue<std::pair<double, uint32_t>,
                        std::vector<std::pair<double, uint32_t>>, std::greater<>>
        heap;
    dist_arr[s] = 0;
    heap.push({0.0, s});
    dijkstra(g, dist_arr, heap);
    for (const double v : dist_arr) {
      if (v == kInf) throw std::runtime_error("geodesic_diameter: disconnected mesh");
      diameter = std::max(diameter, v);
    }
  }
  return diameter;
}

} // namespace liplab
