#pragma once

// Minimizers of the constrained Lipschitz learning problem: graph
// infinity-harmonic extension, the optimal Lipschitz constant certificate,
// extremal extensions in the graph metric, and graph ground states.

#include <optional>
#include <string>

#include "liplab/graph.hpp"

namespace liplab {

enum class SolveStatus { Converged, MaxIterations, Disconnected };

std::string to_string(SolveStatus s);

struct SolveReport {
  GraphFunction solution;
  double objective = 0;  // constrained functional value of the solution
  int iterations = 0;    // full sweeps
  double residual = 0;   // estimated remaining sup-error
  SolveStatus status = SolveStatus::Converged;
};

// Gauss-Seidel in fixed vertex order; the per-vertex local problem
//   max_y w (u_y - t) + min_y w (u_y - t) = 0
// is solved by bisection on [min u_y, max u_y] (closed form when all incident
// weights coincide). Stops once the extrapolated sup-error, estimated from
// the observed sweep contraction factor, falls below tol/8.
SolveReport infinity_harmonic(const GeometricGraph& graph, const LabelSet& labels,
                              double tol, int max_sweeps);

// L* = max over labeled pairs |g_p - g_q| / d_graph(p, q); the minimum value
// of the constrained functional. Throws if a labeled pair is disconnected.
double optimal_lipschitz_constant(const GeometricGraph& graph, const LabelSet& labels);

enum class McShaneSide { Lower, Upper };

// Extremal extensions in the graph metric:
//   lower: max_p (g_p - L* d(x,p)),  upper: min_p (g_p + L* d(x,p)).
GraphFunction mcshane_extension(const GeometricGraph& graph, const LabelSet& labels,
                                McShaneSide side);

enum class NormKind { Empirical, VoronoiWeighted };

std::string to_string(NormKind k);

struct GroundStateReport {
  GraphFunction state;   // normalized
  double eigenvalue = 0; // functional value of the normalized state
  double p = 2;
  NormKind norm_kind = NormKind::Empirical;
};

// Requires g = 0 on the constraint set. The state is the graph distance to
// the constraint vertices normalized in the chosen discrete L^p norm; its
// functional value is 1/||d||_p. The Voronoi-weighted norm uses cell volumes
// estimated by probe-lattice counting over `domain` at spacing probe_h.
GroundStateReport ground_state(const GeometricGraph& graph, const LabelSet& labels,
                               double p, NormKind norm_kind,
                               const Domain* domain = nullptr, double probe_h = 0);

// Discrete p-norm of an arbitrary graph function under the same weighting.
double graph_norm(const GeometricGraph& graph, const GraphFunction& u, double p,
                  NormKind norm_kind, const Domain* domain = nullptr,
                  double probe_h = 0);

} // namespace liplab
