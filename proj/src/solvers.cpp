#include "liplab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace liplab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::Disconnected: return "disconnected";
  }
  return "?";
}

std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::Empirical: return "empirical";
    case NormKind::VoronoiWeighted: return "voronoi-weighted";
  }
  return "?";
}

namespace {

// Root of f(t) = max_y w(u_y - t) + min_y w(u_y - t); f is continuous and
// strictly decreasing, with a root inside [min u_y, max u_y].
double local_infinity_solve(const GeometricGraph& graph, const GraphFunction& u,
                            uint32_t v) {
  const auto nbr = graph.neighbors(v);
  const auto eid = graph.incident_edges(v);
  const auto& edges = graph.edges();
  double lo = kInf, hi = -kInf;
  double wmin = kInf, wmax = -kInf;
  for (std::size_t t = 0; t < nbr.size(); ++t) {
    lo = std::min(lo, u[nbr[t]]);
    hi = std::max(hi, u[nbr[t]]);
    wmin = std::min(wmin, edges[eid[t]].omega);
    wmax = std::max(wmax, edges[eid[t]].omega);
  }
  if (wmin == wmax) return 0.5 * (lo + hi); // equal weights: f is affine

  auto f = [&](double t) {
    double fmax = -kInf, fmin = kInf;
    for (std::size_t k = 0; k < nbr.size(); ++k) {
      const double w = edges[eid[k]].omega;
      const double val = w * (u[nbr[k]] - t);
      fmax = std::max(fmax, val);
      fmin = std::min(fmin, val);
    }
    return fmax + fmin;
  };
  double a = lo, b = hi;
  const double width_tol = 1e-14 * std::max({1.0, std::abs(lo), std::abs(hi)});
  while (b - a > width_tol) {
    const double mid = 0.5 * (a + b);
    if (f(mid) > 0) a = mid;
    else b = mid;
  }
  return 0.5 * (a + b);
}

} // namespace

SolveReport infinity_harmonic(const GeometricGraph& graph, const LabelSet& labels,
                              double tol, int max_sweeps) {
  if (labels.geometry.discrete_indices.empty())
    throw std::invalid_argument("infinity_harmonic: at least one label required");
  if (!(tol > 0)) throw std::invalid_argument("infinity_harmonic: tol must be positive");
  const std::size_t n = graph.vertex_count();

  std::vector<char> is_label(n, 0);
  GraphFunction u(n, 0.0);
  for (std::size_t k = 0; k < labels.geometry.discrete_indices.size(); ++k) {
    const uint32_t i = labels.geometry.discrete_indices[k];
    if (i >= n) throw std::invalid_argument("infinity_harmonic: label index out of range");
    is_label[i] = 1;
    u[i] = labels.values[k];
  }

  SolveReport rep;
  const auto conn = connectivity(graph, labels.geometry.discrete_indices);
  if (!conn.all_reachable()) {
    rep.solution = std::move(u);
    rep.status = SolveStatus::Disconnected;
    rep.residual = kInf;
    rep.objective = kInf;
    return rep;
  }

  const double stop = tol / 8.0;
  double delta_prev = kInf;
  double rho = 1.0;
  rep.status = SolveStatus::MaxIterations;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double delta = 0;
    for (uint32_t v = 0; v < n; ++v) {
      if (is_label[v] || graph.neighbors(v).empty()) continue;
      const double t = local_infinity_solve(graph, u, v);
      delta = std::max(delta, std::abs(t - u[v]));
      u[v] = t;
    }
    // windowed contraction estimate -> extrapolated remaining error
    if (delta_prev > 0 && delta_prev < kInf)
      rho = 0.5 * rho + 0.5 * std::min(delta / delta_prev, 1.0);
    delta_prev = delta;
    const double err_est =
        (rho < 1.0) ? delta * rho / (1.0 - rho) : (delta == 0 ? 0.0 : kInf);
    rep.residual = std::max(delta, err_est);
    if (rep.residual <= stop) {
      rep.status = SolveStatus::Converged;
      ++sweep;
      break;
    }
  }
  rep.iterations = sweep;
  rep.solution = std::move(u);
  rep.objective = constrained_functional(graph, rep.solution, labels, 0.0);
  return rep;
}

namespace {

// One Dijkstra per labeled vertex; rows are folded into the caller's
// accumulators instead of being materialized as a matrix.
template <typename RowFn>
void for_each_label_distance_row(const GeometricGraph& graph, const LabelSet& labels,
                                 RowFn&& row_fn) {
  for (std::size_t k = 0; k < labels.geometry.discrete_indices.size(); ++k) {
    const uint32_t src = labels.geometry.discrete_indices[k];
    const GraphFunction d = graph_distance(graph, {&src, 1});
    row_fn(k, d);
  }
}

} // namespace

double optimal_lipschitz_constant(const GeometricGraph& graph, const LabelSet& labels) {
  const auto& idx = labels.geometry.discrete_indices;
  if (idx.empty())
    throw std::invalid_argument("optimal_lipschitz_constant: labels required");
  if (idx.size() == 1) return 0.0;
  double best = 0;
  for_each_label_distance_row(graph, labels, [&](std::size_t k, const GraphFunction& d) {
    for (std::size_t m = 0; m < idx.size(); ++m) {
      if (m == k) continue;
      const double dd = d[idx[m]];
      if (!std::isfinite(dd))
        throw std::runtime_error("optimal_lipschitz_constant: labeled pair disconnected");
      best = std::max(best, std::abs(labels.values[k] - labels.values[m]) / dd);
    }
  });
  return best;
}

GraphFunction mcshane_extension(const GeometricGraph& graph, const LabelSet& labels,
                                McShaneSide side) {
  const double lstar = optimal_lipschitz_constant(graph, labels);
  const std::size_t n = graph.vertex_count();
  GraphFunction out(n, side == McShaneSide::Lower ? -kInf : kInf);
  for_each_label_distance_row(graph, labels, [&](std::size_t k, const GraphFunction& d) {
    const double g = labels.values[k];
    if (side == McShaneSide::Lower) {
      for (std::size_t v = 0; v < n; ++v)
        out[v] = std::max(out[v], g - lstar * d[v]);
    } else {
      for (std::size_t v = 0; v < n; ++v)
        out[v] = std::min(out[v], g + lstar * d[v]);
    }
  });
  return out;
}

double graph_norm(const GeometricGraph& graph, const GraphFunction& u, double p,
                  NormKind norm_kind, const Domain* domain, double probe_h) {
  if (!(p >= 1) || !std::isfinite(p))
    throw std::invalid_argument("graph_norm: p must be in [1, inf)");
  const std::size_t n = graph.vertex_count();
  if (u.size() != n) throw std::invalid_argument("graph_norm: size mismatch");
  std::vector<double> w;
  if (norm_kind == NormKind::Empirical) {
    w.assign(n, 1.0 / static_cast<double>(n));
  } else {
    if (domain == nullptr || !(probe_h > 0))
      throw std::invalid_argument("graph_norm: voronoi weighting needs a domain and probe_h");
    // Voronoi cell volumes estimated by projecting a probe lattice
    std::vector<int64_t> counts(n, 0);
    const int d = domain->dim();
    std::vector<int64_t> steps(d);
    for (int a = 0; a < d; ++a)
      steps[a] = static_cast<int64_t>(
                     std::floor((domain->hi()[a] - domain->lo()[a]) / probe_h + 1e-9)) + 1;
    GridIndex index(graph.cloud(), std::max(probe_h, std::pow(domain->volume_bbox() / n, 1.0 / d)));
    std::vector<int64_t> ix(d, 0);
    std::vector<double> pt(d);
    int64_t total = 0;
    while (true) {
      for (int a = 0; a < d; ++a) pt[a] = domain->lo()[a] + ix[a] * probe_h;
      if (domain->closure_inside(pt)) {
        ++counts[index.nearest(pt)];
        ++total;
      }
      int axis = d - 1;
      while (axis >= 0 && ++ix[axis] == steps[axis]) ix[axis--] = 0;
      if (axis < 0) break;
    }
    if (total == 0) throw std::runtime_error("graph_norm: empty probe lattice");
    w.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::pow(std::abs(u[i]), p);
  return std::pow(acc, 1.0 / p);
}

GroundStateReport ground_state(const GeometricGraph& graph, const LabelSet& labels,
                               double p, NormKind norm_kind, const Domain* domain,
                               double probe_h) {
  const auto& idx = labels.geometry.discrete_indices;
  if (idx.empty()) throw std::invalid_argument("ground_state: constraint set required");
  for (const double g : labels.values)
    if (g != 0.0) throw std::invalid_argument("ground_state: constraint values must all be zero");
  if (idx.size() >= graph.vertex_count())
    throw std::invalid_argument("ground_state: at least one unconstrained vertex required");

  GraphFunction d = graph_distance(graph, idx);
  for (std::size_t v = 0; v < d.size(); ++v) {
    if (!std::isfinite(d[v]))
      throw std::runtime_error("ground_state: vertex " + std::to_string(v) +
                               " unreachable from the constraint set");
  }
  const double norm = graph_norm(graph, d, p, norm_kind, domain, probe_h);
  if (!(norm > 0)) throw std::runtime_error("ground_state: distance function vanishes");
  GroundStateReport rep;
  rep.p = p;
  rep.norm_kind = norm_kind;
  rep.state.resize(d.size());
  for (std::size_t v = 0; v < d.size(); ++v) rep.state[v] = d[v] / norm;
  rep.eigenvalue = discrete_functional(graph, rep.state);
  return rep;
}

} // namespace liplab
