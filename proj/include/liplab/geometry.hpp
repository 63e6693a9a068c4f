#pragma once

// Domains, point clouds, projections, and the metric quantities (fill
// distance, Hausdorff distance, lattice geodesics) used by every experiment.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace liplab {

double sq_dist(std::span<const double> a, std::span<const double> b);
double dist(std::span<const double> a, std::span<const double> b);

enum class DomainKind { UnitBox, ScaledBox, LShape, Polygon };

std::string to_string(DomainKind k);

/// Bounded open region of R^d given by membership predicates and a bounding
/// box. The L-shape is the fixed planar domain
///   { max(|x1|,|x2|) < 1 }  minus  [0,1] x [-1,0].
class Domain {
public:
  static Domain unit_box(int dim);
  static Domain box(std::vector<double> lo, std::vector<double> hi);
  static Domain l_shape();
  // Simple polygon, d = 2; vertices in order, not self-intersecting.
  static Domain polygon(std::vector<double> vertices_flat);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  double shortest_side() const;
  double volume_bbox() const;
  const std::vector<double>& polygon_vertices() const { return poly_; }

  bool inside(std::span<const double> x) const;         // open-set membership
  bool closure_inside(std::span<const double> x) const; // closure membership

  // Segment test used by the lattice geodesics: all sample points of [a,b]
  // (spacing <= step) lie in the closure.
  bool segment_in_closure(std::span<const double> a, std::span<const double> b,
                          double step) const;

private:
  Domain() = default;
  DomainKind kind_ = DomainKind::UnitBox;
  int dim_ = 0;
  std::vector<double> lo_, hi_;
  std::vector<double> poly_; // flat x,y pairs for Polygon
};

enum class Provenance { Grid, Uniform, Halton, Explicit };

std::string to_string(Provenance p);

/// Ordered list of d-dimensional points; duplicate-free by construction.
class PointCloud {
public:
  PointCloud() = default;
  PointCloud(int dim, std::vector<double> coords_flat, Provenance prov,
             std::optional<uint64_t> seed = std::nullopt);

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& coords() const { return coords_; }
  Provenance provenance() const { return prov_; }
  std::optional<uint64_t> seed() const { return seed_; }

private:
  int dim_ = 0;
  std::vector<double> coords_;
  Provenance prov_ = Provenance::Explicit;
  std::optional<uint64_t> seed_;
};

/// Constraint set O as a finite dense sample list plus the matching vertex
/// indices O_n of a point cloud.
struct ConstraintGeometry {
  int dim = 0;
  std::vector<double> continuum_samples; // flat; may be empty
  std::vector<uint32_t> discrete_indices;

  ConstraintGeometry() = default;
  ConstraintGeometry(int d, std::vector<double> samples,
                     std::vector<uint32_t> indices);
};

// --- Sampling -------------------------------------------------------------

PointCloud sample_grid(const Domain& domain, double h);
PointCloud sample_uniform(const Domain& domain, int n, uint64_t seed);
PointCloud sample_halton(const Domain& domain, int n, uint64_t seed);

// Dense samples of the closure boundary at (at most) the given spacing.
// Returns flat coordinates; duplicates removed.
std::vector<double> sample_boundary(const Domain& domain, double spacing);

// --- Bucket grid for nearest-neighbor / radius queries ---------------------

class GridIndex {
public:
  GridIndex(const PointCloud& cloud, double cell);

  // Smallest index attaining the minimum distance (ties -> smallest index);
  // identical to a linear scan.
  uint32_t nearest(std::span<const double> q) const;

  // All indices i with |x_i - q| <= radius (inclusive), ascending order.
  void within(std::span<const double> q, double radius,
              std::vector<uint32_t>& out) const;

private:
  const PointCloud* cloud_;
  double cell_;
  int dim_;
  std::vector<double> lo_;
  std::vector<int64_t> dims_;
  std::vector<uint32_t> offsets_;  // CSR buckets
  std::vector<uint32_t> items_;
  int64_t cell_coord(double x, int axis) const;
  int64_t flat_cell(const int64_t* c) const;
  template <typename F> void for_cells_in_ring(const int64_t* c, int64_t ring, F&& f) const;
};

// --- Metric quantities ------------------------------------------------------

// Lattice lower bound for the fill distance sup_x min_y |x-y|; the true
// supremum exceeds the returned value by at most probe_h*sqrt(d)/2.
double fill_distance(const Domain& domain, const PointCloud& cloud,
                     double probe_h);

std::vector<uint32_t> closest_point_projection(const PointCloud& cloud,
                                               std::span<const double> queries_flat);

double hausdorff_distance(std::span<const double> a_flat,
                          std::span<const double> b_flat, int dim);

// --- Lattice geodesics ------------------------------------------------------

/// Axis-aligned lattice over the domain closure with a k-neighborhood stencil
/// whose edges keep only segments that stay inside the closure. Shortest
/// paths on it overestimate the geodesic distance by at most
/// sec(theta_max/2), theta_max = maximal angular gap of the stencil.
struct LatticeMesh {
  int dim = 0;
  double h = 0;
  int stencil = 2;
  std::vector<double> lo;
  std::vector<int64_t> dims;      // lattice extents per axis
  std::vector<int32_t> node_at;   // dense cell -> node id (-1 if none)
  std::vector<double> coords;     // flat node coordinates
  double overestimation_bound = 1.0;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  int32_t nearest_node(std::span<const double> q) const;
};

struct GeodesicField {
  std::shared_ptr<const LatticeMesh> mesh;
  std::vector<double> values;     // +inf where unreached
  std::size_t unreached = 0;

  double value_at(std::span<const double> q) const;
};

GeodesicField geodesic_distance_field(const Domain& domain,
                                      std::span<const double> sources_flat,
                                      double mesh_h, int stencil = 2);

double domain_condition_ratio(const Domain& domain, double delta,
                              double mesh_h, int stencil = 2);

double geodesic_diameter(const Domain& domain, double mesh_h, int stencil = 2);

} // namespace liplab
