#include "liplab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace liplab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

GeometricGraph::GeometricGraph(PointCloud cloud, Kernel kernel, double scale,
                               std::vector<GraphEdge> edges)
    : cloud_(std::move(cloud)), kernel_(std::move(kernel)), scale_(scale),
      edges_(std::move(edges)) {
  const std::size_t n = cloud_.size();
  adj_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++adj_offsets_[e.i + 1];
    ++adj_offsets_[e.j + 1];
  }
  for (std::size_t v = 1; v <= n; ++v) adj_offsets_[v] += adj_offsets_[v - 1];
  adj_vertex_.resize(adj_offsets_[n]);
  adj_edge_.resize(adj_offsets_[n]);
  std::vector<uint32_t> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (uint32_t id = 0; id < edges_.size(); ++id) {
    const auto& e = edges_[id];
    adj_vertex_[cursor[e.i]] = e.j;
    adj_edge_[cursor[e.i]++] = id;
    adj_vertex_[cursor[e.j]] = e.i;
    adj_edge_[cursor[e.j]++] = id;
  }
}

LabelSet::LabelSet(ConstraintGeometry geom, std::vector<double> vals,
                   std::optional<double> lip)
    : geometry(std::move(geom)), values(std::move(vals)), lipschitz_bound(lip) {
  if (values.size() != geometry.discrete_indices.size())
    throw std::invalid_argument("labels: one value per constraint index required");
  for (const double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("labels: values must be finite");
}

GeometricGraph build_graph(const PointCloud& cloud, const Kernel& kernel,
                           double scale) {
  if (!(scale > 0)) throw std::invalid_argument("build_graph: scale must be positive");
  if (cloud.size() < 2) throw std::invalid_argument("build_graph: cloud size must be >= 2");
  const double radius = scale * kernel.radius();
  // floor the bucket size so sub-spacing scales cannot blow up the grid
  double extent = 1e-12;
  for (int k = 0; k < cloud.dim(); ++k) {
    double lo = cloud.point(0)[k], hi = lo;
    for (std::size_t i = 1; i < cloud.size(); ++i) {
      lo = std::min(lo, cloud.point(i)[k]);
      hi = std::max(hi, cloud.point(i)[k]);
    }
    extent = std::max(extent, hi - lo);
  }
  GridIndex index(cloud, std::max(radius, extent / 2048.0));
  std::vector<GraphEdge> edges;
  std::vector<uint32_t> hits;
  const std::size_t n = cloud.size();
  for (uint32_t i = 0; i < n; ++i) {
    index.within(cloud.point(i), radius, hits);
    for (const uint32_t j : hits) {
      if (j <= i) continue;
      const double d = dist(cloud.point(i), cloud.point(j));
      const double omega = kernel(d / scale);
      if (omega > 0) edges.push_back({i, j, d, omega, scale / omega});
    }
  }
  return GeometricGraph(cloud, kernel, scale, std::move(edges));
}

double discrete_functional(const GeometricGraph& graph, const GraphFunction& u) {
  if (u.size() != graph.vertex_count())
    throw std::invalid_argument("functional: function/graph size mismatch");
  double worst = 0;
  for (const auto& e : graph.edges())
    worst = std::max(worst, e.omega * std::abs(u[e.i] - u[e.j]));
  return worst / graph.scale();
}

double constrained_functional(const GeometricGraph& graph, const GraphFunction& u,
                              const LabelSet& labels, double constraint_tol) {
  const auto& idx = labels.geometry.discrete_indices;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= graph.vertex_count())
      throw std::invalid_argument("constrained_functional: label index out of range");
    if (std::abs(u[idx[k]] - labels.values[k]) > constraint_tol) return kInf;
  }
  return discrete_functional(graph, u);
}

GraphFunction graph_distance(const GeometricGraph& graph,
                             std::span<const uint32_t> source_indices) {
  if (source_indices.empty())
    throw std::invalid_argument("graph_distance: sources must be non-empty");
  const std::size_t n = graph.vertex_count();
  GraphFunction d(n, kInf);
  std::priority_queue<std::pair<double, uint32_t>,
                      std::vector<std::pair<double, uint32_t>>, std::greater<>>
      heap;
  for (const uint32_t s : source_indices) {
    if (s >= n) throw std::invalid_argument("graph_distance: source index out of range");
    d[s] = 0;
    heap.push({0.0, s});
  }
  const auto& edges = graph.edges();
  while (!heap.empty()) {
    auto [du, u] = heap.top();
    heap.pop();
    if (du > d[u]) continue;
    const auto nbr = graph.neighbors(u);
    const auto eid = graph.incident_edges(u);
    for (std::size_t t = 0; t < nbr.size(); ++t) {
      const double nd = du + edges[eid[t]].cost;
      if (nd < d[nbr[t]]) {
        d[nbr[t]] = nd;
        heap.push({nd, nbr[t]});
      }
    }
  }
  return d;
}

ConnectivityReport connectivity(const GeometricGraph& graph,
                                std::span<const uint32_t> source_indices) {
  const std::size_t n = graph.vertex_count();
  std::vector<char> seen(n, 0);
  std::vector<uint32_t> stack;
  for (const uint32_t s : source_indices) {
    if (s >= n) throw std::invalid_argument("connectivity: source index out of range");
    if (!seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const uint32_t u = stack.back();
    stack.pop_back();
    for (const uint32_t v : graph.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  ConnectivityReport rep;
  for (uint32_t v = 0; v < n; ++v) {
    if (seen[v]) ++rep.reachable_count;
    else rep.unreachable_indices.push_back(v);
  }
  return rep;
}

std::vector<double> evaluate_extension(const GeometricGraph& graph,
                                       const GraphFunction& u,
                                       std::span<const double> queries_flat) {
  if (u.size() != graph.vertex_count())
    throw std::invalid_argument("extension: function/graph size mismatch");
  const auto proj = closest_point_projection(graph.cloud(), queries_flat);
  std::vector<double> out(proj.size());
  for (std::size_t q = 0; q < proj.size(); ++q) out[q] = u[proj[q]];
  return out;
}

} // namespace liplab
