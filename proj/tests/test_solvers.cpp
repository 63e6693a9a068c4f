#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include "liplab/solvers.hpp"
#include "oracles.hpp"

using namespace liplab;

namespace {

PointCloud chain5() {
  return PointCloud(1, {0.0, 0.25, 0.5, 0.75, 1.0}, Provenance::Explicit);
}

LabelSet make_labels(int dim, std::vector<uint32_t> idx, std::vector<double> vals) {
  return LabelSet(ConstraintGeometry(dim, {}, std::move(idx)), std::move(vals));
}

struct Instance {
  GeometricGraph graph;
  LabelSet labels;
};

std::optional<Instance> random_instance(std::mt19937_64& rng, std::size_t n,
                                        const Kernel& kernel, double scale) {
  const auto cloud = oracles::random_cloud_in_box(2, n, 0.0, 1.0, rng);
  GeometricGraph g = build_graph(cloud, kernel, scale);
  uint32_t a = static_cast<uint32_t>(rng() % n);
  uint32_t b = static_cast<uint32_t>(rng() % n);
  if (a == b) b = (b + 1) % n;
  std::vector<uint32_t> idx = {std::min(a, b), std::max(a, b)};
  const std::vector<uint32_t> srcs = idx;
  if (!connectivity(g, srcs).all_reachable()) return std::nullopt;
  std::vector<double> vals = {oracles::u01(rng) * 2 - 1, oracles::u01(rng) * 2 - 1};
  return Instance{std::move(g), make_labels(2, std::move(idx), std::move(vals))};
}

} // namespace

TEST_SUITE_BEGIN("solvers");

TEST_CASE("infinity harmonic interpolates linearly on a uniform chain") {
  const auto g = build_graph(chain5(), Kernel::indicator(), 0.3);
  const auto labels = make_labels(1, {0, 4}, {0.0, 1.0});
  const double tol = 1e-10;
  const auto rep = infinity_harmonic(g, labels, tol, 100000);
  REQUIRE(rep.status == SolveStatus::Converged);
  CHECK(rep.residual <= tol);
  for (int i = 0; i < 5; ++i)
    CHECK(rep.solution[i] == doctest::Approx(0.25 * i).epsilon(10 * tol + 1e-9));
}

TEST_CASE("constant labels give the constant solution") {
  const auto g = build_graph(chain5(), Kernel::indicator(), 0.3);
  const auto labels = make_labels(1, {0, 4}, {3.5, 3.5});
  const auto rep = infinity_harmonic(g, labels, 1e-12, 10000);
  REQUIRE(rep.status == SolveStatus::Converged);
  for (const double v : rep.solution) CHECK(v == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(rep.objective == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("disconnected instances are reported") {
  const auto g = build_graph(chain5(), Kernel::indicator(), 0.2); // edgeless
  const auto labels = make_labels(1, {0}, {1.0});
  const auto rep = infinity_harmonic(g, labels, 1e-8, 1000);
  CHECK(rep.status == SolveStatus::Disconnected);
}

TEST_CASE("sweep budget exhaustion is reported") {
  const auto g = build_graph(chain5(), Kernel::indicator(), 0.3);
  const auto labels = make_labels(1, {0, 4}, {0.0, 1.0});
  const auto rep = infinity_harmonic(g, labels, 1e-13, 1);
  CHECK(rep.status == SolveStatus::MaxIterations);
}

TEST_CASE("optimal lipschitz constant on the 3-point chain") {
  const PointCloud cloud(1, {0.0, 0.5, 1.0}, Provenance::Explicit);
  const auto g = build_graph(cloud, Kernel::indicator(), 0.6);
  const auto labels = make_labels(1, {0, 2}, {0.0, 1.0});
  CHECK(optimal_lipschitz_constant(g, labels) ==
        doctest::Approx(1.0 / 1.2).epsilon(1e-12));

  const auto single = make_labels(1, {1}, {4.0});
  CHECK(optimal_lipschitz_constant(g, single) == 0.0);
}

TEST_CASE("optimal lipschitz constant rejects disconnected label pairs") {
  const PointCloud cloud(1, {0.0, 0.25, 5.0}, Provenance::Explicit);
  const auto g = build_graph(cloud, Kernel::indicator(), 0.3);
  const auto labels = make_labels(1, {0, 2}, {0.0, 1.0});
  CHECK_THROWS(optimal_lipschitz_constant(g, labels));
}

TEST_CASE("solver value matches the certificate on random instances") {
  std::mt19937_64 rng(404);
  int seen = 0;
  while (seen < 10) {
    auto inst = random_instance(rng, 15, Kernel::tent(), 0.5);
    if (!inst) continue;
    ++seen;
    const double tol = 1e-9;
    const auto rep = infinity_harmonic(inst->graph, inst->labels, tol, 200000);
    REQUIRE(rep.status == SolveStatus::Converged);
    const double lstar = optimal_lipschitz_constant(inst->graph, inst->labels);
    CHECK(std::abs(rep.objective - lstar) <= tol);
  }
}

TEST_CASE("mcshane extensions on the 3-point chain") {
  const PointCloud cloud(1, {0.0, 0.5, 1.0}, Provenance::Explicit);
  const auto g = build_graph(cloud, Kernel::indicator(), 0.6);
  const auto labels = make_labels(1, {0, 2}, {0.0, 1.0});
  const auto upper = mcshane_extension(g, labels, McShaneSide::Upper);
  const auto lower = mcshane_extension(g, labels, McShaneSide::Lower);
  CHECK(upper[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lower[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(upper[0] == 0.0);
  CHECK(upper[2] == 1.0);
  CHECK(lower[0] == 0.0);
  CHECK(lower[2] == 1.0);
  const double lstar = optimal_lipschitz_constant(g, labels);
  CHECK(std::abs(constrained_functional(g, upper, labels, 0.0) - lstar) <= 1e-12);
  CHECK(std::abs(constrained_functional(g, lower, labels, 0.0) - lstar) <= 1e-12);

  const auto constant = make_labels(1, {0, 2}, {2.0, 2.0});
  for (const auto side : {McShaneSide::Lower, McShaneSide::Upper}) {
    const auto u = mcshane_extension(g, constant, side);
    for (const double v : u) CHECK(v == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("comparison principle and mcshane sandwich") {
  std::mt19937_64 rng(2718);
  int seen = 0;
  while (seen < 100) {
    auto inst = random_instance(rng, 14, Kernel::tent(), 0.55);
    if (!inst) continue;
    ++seen;
    const double tol = 1e-8;
    const auto rep = infinity_harmonic(inst->graph, inst->labels, tol, 200000);
    REQUIRE(rep.status == SolveStatus::Converged);
    const double gmin = *std::min_element(inst->labels.values.begin(),
                                          inst->labels.values.end());
    const double gmax = *std::max_element(inst->labels.values.begin(),
                                          inst->labels.values.end());
    const auto lower = mcshane_extension(inst->graph, inst->labels, McShaneSide::Lower);
    const auto upper = mcshane_extension(inst->graph, inst->labels, McShaneSide::Upper);
    for (std::size_t v = 0; v < rep.solution.size(); ++v) {
      CHECK(rep.solution[v] >= gmin - tol);
      CHECK(rep.solution[v] <= gmax + tol);
      CHECK(lower[v] <= rep.solution[v] + 10 * tol);
      CHECK(rep.solution[v] <= upper[v] + 10 * tol);
    }
  }
}

TEST_CASE("objective scales linearly with the labels") {
  std::mt19937_64 rng(31415);
  int seen = 0;
  while (seen < 10) {
    auto inst = random_instance(rng, 12, Kernel::tent(), 0.55);
    if (!inst) continue;
    ++seen;
    const double tol = 1e-10;
    const auto rep1 = infinity_harmonic(inst->graph, inst->labels, tol, 200000);
    LabelSet doubled = inst->labels;
    for (double& v : doubled.values) v *= 2.0;
    const auto rep2 = infinity_harmonic(inst->graph, doubled, tol, 200000);
    REQUIRE(rep1.status == SolveStatus::Converged);
    REQUIRE(rep2.status == SolveStatus::Converged);
    CHECK(rep2.objective == doctest::Approx(2.0 * rep1.objective).epsilon(1e-6));

    auto argmax_edges = [&](const GraphFunction& u) {
      std::vector<std::size_t> out;
      const double phi = discrete_functional(inst->graph, u) * inst->graph.scale();
      const auto& es = inst->graph.edges();
      for (std::size_t e = 0; e < es.size(); ++e)
        if (es[e].omega * std::abs(u[es[e].i] - u[es[e].j]) >= phi * (1 - 1e-9))
          out.push_back(e);
      return out;
    };
    if (rep1.objective > 1e-9)
      CHECK(argmax_edges(rep1.solution) == argmax_edges(rep2.solution));
  }
}

TEST_CASE("solver runs are bit-reproducible") {
  std::mt19937_64 rng(5150);
  auto inst = random_instance(rng, 20, Kernel::tent(), 0.5);
  REQUIRE(inst);
  const auto a = infinity_harmonic(inst->graph, inst->labels, 1e-9, 100000);
  const auto b = infinity_harmonic(inst->graph, inst->labels, 1e-9, 100000);
  REQUIRE(a.solution.size() == b.solution.size());
  CHECK(std::memcmp(a.solution.data(), b.solution.data(),
                    a.solution.size() * sizeof(double)) == 0);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("ground state of the 5-chain") {
  const auto g = build_graph(chain5(), Kernel::indicator(), 0.3);
  const auto labels = make_labels(1, {0, 4}, {0.0, 0.0});
  const auto rep = ground_state(g, labels, 2.0, NormKind::Empirical);
  // d = (0, 0.3, 0.6, 0.3, 0)
  const double norm = std::sqrt((0.09 + 0.36 + 0.09) / 5.0);
  CHECK(rep.eigenvalue == doctest::Approx(1.0 / norm).epsilon(1e-12));
  CHECK(rep.state[2] == doctest::Approx(0.6 / norm).epsilon(1e-12));
  double acc = 0;
  for (const double v : rep.state) acc += v * v;
  CHECK(std::sqrt(acc / 5.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.eigenvalue == discrete_functional(g, rep.state));
}

TEST_CASE("ground state rejects nonzero constraints and disconnection") {
  const auto g = build_graph(chain5(), Kernel::indicator(), 0.3);
  CHECK_THROWS(ground_state(g, make_labels(1, {0}, {1.0}), 2.0, NormKind::Empirical));

  const PointCloud cloud(1, {0.0, 0.25, 5.0}, Provenance::Explicit);
  const auto g2 = build_graph(cloud, Kernel::indicator(), 0.3);
  try {
    ground_state(g2, make_labels(1, {0}, {0.0}), 2.0, NormKind::Empirical);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos); // names the vertex
  }
}

TEST_CASE("single interior vertex eigenvalue") {
  const PointCloud cloud(1, {0.0, 0.2}, Provenance::Explicit);
  const auto g = build_graph(cloud, Kernel::indicator(), 0.4); // cost 0.4
  const auto rep = ground_state(g, make_labels(1, {0}, {0.0}), 1.0, NormKind::Empirical);
  CHECK(rep.eigenvalue == doctest::Approx(2.0 / 0.4).epsilon(1e-12));
}

TEST_CASE("ground state dominates random feasible points on tiny graphs") {
  std::mt19937_64 rng(1234);
  int instances = 0;
  while (instances < 10) {
    const std::size_t n = 4 + rng() % 3; // up to 6 vertices
    const auto cloud = oracles::random_cloud_in_box(2, n, 0.0, 1.0, rng);
    const auto g = build_graph(cloud, Kernel::tent(), 0.8);
    const std::vector<uint32_t> cons = {0};
    if (!connectivity(g, cons).all_reachable()) continue;
    ++instances;
    const GraphFunction d = graph_distance(g, cons);
    CHECK(discrete_functional(g, d) == doctest::Approx(1.0).epsilon(1e-12));
    for (int trial = 0; trial < 1000; ++trial) {
      GraphFunction u(n, 0.0);
      for (std::size_t v = 1; v < n; ++v) u[v] = oracles::u01(rng) * 2 - 1;
      double gamma = std::numeric_limits<double>::infinity();
      for (const auto& e : g.edges()) {
        const double du = std::abs(u[e.i] - u[e.j]);
        if (du > 0) gamma = std::min(gamma, e.cost / du);
      }
      if (!std::isfinite(gamma)) continue;
      gamma *= 0.999999;
      for (std::size_t v = 0; v < n; ++v) CHECK(gamma * u[v] <= d[v]);
    }
  }
}

TEST_CASE("voronoi-weighted norm stays close to the empirical norm on grids") {
  const Domain dom = Domain::unit_box(2);
  const auto cloud = sample_grid(dom, 0.1);
  const auto g = build_graph(cloud, Kernel::indicator(), 0.15);
  GraphFunction u(cloud.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = cloud.point(i)[0];
  const double emp = graph_norm(g, u, 2.0, NormKind::Empirical);
  const double vor = graph_norm(g, u, 2.0, NormKind::VoronoiWeighted, &dom, 0.01);
  CHECK(vor == doctest::Approx(emp).epsilon(0.05));
}

TEST_SUITE_END();

TEST_CASE("voronoi-weighted ground states are normalized in their own norm") {
  const Domain dom = Domain::unit_box(2);
  const auto cloud = sample_grid(dom, 0.125);
  const auto g = build_graph(cloud, Kernel::indicator(), 0.13);
  std::vector<uint32_t> idx;
  for (uint32_t v = 0; v < cloud.size(); ++v) {
    const auto p = cloud.point(v);
    if (p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0) idx.push_back(v);
  }
  const LabelSet labels(ConstraintGeometry(2, {}, idx),
                        std::vector<double>(idx.size(), 0.0));
  const auto rep =
      ground_state(g, labels, 2.0, NormKind::VoronoiWeighted, &dom, 0.02);
  CHECK(graph_norm(g, rep.state, 2.0, NormKind::VoronoiWeighted, &dom, 0.02) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.eigenvalue == discrete_functional(g, rep.state));
}

TEST_CASE("weighted local solve against hand arithmetic") {
  // One free vertex at the origin with three labeled neighbors whose weights
  // under the tent kernel at scale 1 are (0.5, 0.2, 0.45). The local equation
  //   max_y w (u_y - t) + min_y w (u_y - t) = 0
  // changes its argmax inside the bracket and has root t = 4/13.
  const PointCloud cloud(1, {0.0, 0.5, -0.8, -0.55}, Provenance::Explicit);
  const auto g = build_graph(cloud, Kernel::tent(), 1.0);
  const auto labels = make_labels(1, {1, 2, 3}, {0.5, 1.0, 0.0});
  const auto rep = infinity_harmonic(g, labels, 1e-12, 1000);
  REQUIRE(rep.status == SolveStatus::Converged);
  CHECK(rep.solution[0] == doctest::Approx(4.0 / 13.0).epsilon(1e-11));
}

TEST_CASE("mcshane objectives equal the certificate at machine precision") {
  std::mt19937_64 rng(8086);
  int seen = 0;
  while (seen < 25) {
    auto inst = random_instance(rng, 12, Kernel::tent(), 0.55);
    if (!inst) continue;
    ++seen;
    const double lstar = optimal_lipschitz_constant(inst->graph, inst->labels);
    for (const auto side : {McShaneSide::Lower, McShaneSide::Upper}) {
      const auto u = mcshane_extension(inst->graph, inst->labels, side);
      const double phi = constrained_functional(inst->graph, u, inst->labels, 1e-9);
      CHECK(std::abs(phi - lstar) <= 1e-12 * std::max(1.0, lstar));
    }
  }
}

TEST_CASE("gauss-seidel agrees with a jacobi grid-search oracle") {
  // the infinity-harmonic fixed point is unique, so synchronous value
  // iteration with an independent grid-search local solve must land on the
  // same function
  std::mt19937_64 rng(24601);
  int seen = 0;
  while (seen < 5) {
    auto inst = random_instance(rng, 10, Kernel::tent(), 0.6);
    if (!inst) continue;
    ++seen;
    const auto rep = infinity_harmonic(inst->graph, inst->labels, 1e-11, 200000);
    REQUIRE(rep.status == SolveStatus::Converged);

    const std::size_t n = inst->graph.vertex_count();
    std::vector<char> fixed(n, 0);
    GraphFunction u(n, 0.0);
    for (std::size_t k = 0; k < inst->labels.geometry.discrete_indices.size(); ++k) {
      fixed[inst->labels.geometry.discrete_indices[k]] = 1;
      u[inst->labels.geometry.discrete_indices[k]] = inst->labels.values[k];
    }
    auto local_grid_solve = [&](const GraphFunction& w, uint32_t v) {
      const auto nbr = inst->graph.neighbors(v);
      const auto eid = inst->graph.incident_edges(v);
      double lo = w[nbr[0]], hi = w[nbr[0]];
      for (const uint32_t y : nbr) {
        lo = std::min(lo, w[y]);
        hi = std::max(hi, w[y]);
      }
      auto f = [&](double t) {
        double fmax = -1e300, fmin = 1e300;
        for (std::size_t k = 0; k < nbr.size(); ++k) {
          const double val = inst->graph.edges()[eid[k]].omega * (w[nbr[k]] - t);
          fmax = std::max(fmax, val);
          fmin = std::min(fmin, val);
        }
        return fmax + fmin;
      };
      // refine a bracket by scanning ever finer grids
      double a = lo, b = hi;
      for (int level = 0; level < 8; ++level) {
        const int m = 64;
        double best_a = a, best_b = b;
        for (int i = 0; i < m; ++i) {
          const double t0 = a + (b - a) * i / m;
          const double t1 = a + (b - a) * (i + 1) / m;
          if (f(t0) >= 0 && f(t1) <= 0) {
            best_a = t0;
            best_b = t1;
            break;
          }
        }
        a = best_a;
        b = best_b;
      }
      return 0.5 * (a + b);
    };
    for (int it = 0; it < 4000; ++it) {
      GraphFunction next = u;
      for (uint32_t v = 0; v < n; ++v)
        if (!fixed[v] && !inst->graph.neighbors(v).empty())
          next[v] = local_grid_solve(u, v);
      u = std::move(next);
    }
    for (std::size_t v = 0; v < n; ++v)
      CHECK(u[v] == doctest::Approx(rep.solution[v]).epsilon(1e-6));
  }
}
