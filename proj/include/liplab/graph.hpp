#pragma once

// Weighted geometric graphs at scale s, the discrete sup-functional, edge
// costs, graph distances, and the piecewise-constant extension.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liplab/geometry.hpp"
#include "liplab/kernels.hpp"

namespace liplab {

/// Vertex-indexed real vector; +inf entries mark unreachable vertices.
using GraphFunction = std::vector<double>;

struct GraphEdge {
  uint32_t i, j; // i < j
  double dist;
  double omega;  // eta(dist/scale), > 0
  double cost;   // scale / omega
};

class GeometricGraph {
public:
  GeometricGraph(PointCloud cloud, Kernel kernel, double scale,
                 std::vector<GraphEdge> edges);

  const PointCloud& cloud() const { return cloud_; }
  const Kernel& kernel() const { return kernel_; }
  double scale() const { return scale_; }
  std::size_t vertex_count() const { return cloud_.size(); }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  // CSR adjacency; neighbor(i) yields (vertex, edge id) pairs.
  std::span<const uint32_t> neighbors(std::size_t v) const {
    return {adj_vertex_.data() + adj_offsets_[v],
            adj_vertex_.data() + adj_offsets_[v + 1]};
  }
  std::span<const uint32_t> incident_edges(std::size_t v) const {
    return {adj_edge_.data() + adj_offsets_[v],
            adj_edge_.data() + adj_offsets_[v + 1]};
  }

private:
  PointCloud cloud_;
  Kernel kernel_;
  double scale_;
  std::vector<GraphEdge> edges_;
  std::vector<uint32_t> adj_offsets_, adj_vertex_, adj_edge_;
};

struct LabelSet {
  ConstraintGeometry geometry;
  std::vector<double> values; // one per discrete index
  std::optional<double> lipschitz_bound;

  LabelSet() = default;
  LabelSet(ConstraintGeometry geom, std::vector<double> vals,
           std::optional<double> lip = std::nullopt);
};

// Exactly the pairs with |x-y| <= scale * R_eta and eta(|x-y|/scale) > 0;
// identical to the all-pairs construction.
GeometricGraph build_graph(const PointCloud& cloud, const Kernel& kernel,
                           double scale);

// (1/scale) * max over edges of omega * |u_i - u_j|; 0 for edgeless graphs.
double discrete_functional(const GeometricGraph& graph, const GraphFunction& u);

// discrete_functional if |u - g| <= constraint_tol on every labeled vertex,
// +inf otherwise.
double constrained_functional(const GeometricGraph& graph, const GraphFunction& u,
                              const LabelSet& labels, double constraint_tol);

// Multi-source shortest-path distances with edge cost scale/omega;
// +inf marks unreachable vertices.
GraphFunction graph_distance(const GeometricGraph& graph,
                             std::span<const uint32_t> source_indices);

struct ConnectivityReport {
  std::size_t reachable_count = 0;
  std::vector<uint32_t> unreachable_indices;
  bool all_reachable() const { return unreachable_indices.empty(); }
};

ConnectivityReport connectivity(const GeometricGraph& graph,
                                std::span<const uint32_t> source_indices);

// u at the closest vertex of each query point (Voronoi-cell extension).
std::vector<double> evaluate_extension(const GeometricGraph& graph,
                                       const GraphFunction& u,
                                       std::span<const double> queries_flat);

} // namespace liplab
