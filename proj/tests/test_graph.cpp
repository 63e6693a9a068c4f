#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "liplab/graph.hpp"
#include "oracles.hpp"

using namespace liplab;

namespace {

PointCloud chain5() {
  return PointCloud(1, {0.0, 0.25, 0.5, 0.75, 1.0}, Provenance::Explicit);
}

LabelSet make_labels(int dim, std::vector<uint32_t> idx, std::vector<double> vals) {
  return LabelSet(ConstraintGeometry(dim, {}, std::move(idx)), std::move(vals));
}

} // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("edge set of a 1d triple") {
  const PointCloud cloud(1, {0.0, 0.4, 0.8}, Provenance::Explicit);
  const auto g = build_graph(cloud, Kernel::indicator(), 0.5);
  REQUIRE(g.edges().size() == 2);
  CHECK(g.edges()[0].i == 0);
  CHECK(g.edges()[0].j == 1);
  CHECK(g.edges()[0].omega == 1.0);
  CHECK(g.edges()[0].cost == 0.5);
  CHECK(g.edges()[1].i == 1);
  CHECK(g.edges()[1].j == 2);

  const auto isolated = build_graph(cloud, Kernel::indicator(), 0.3);
  CHECK(isolated.edges().empty());
}

TEST_CASE("spatial-index construction equals the all-pairs oracle") {
  std::mt19937_64 rng(2024);
  const auto cloud = oracles::random_cloud_in_box(2, 200, 0.0, 1.0, rng);
  const auto g = build_graph(cloud, Kernel::tent(), 0.13);
  auto expected = oracles::all_pairs_edges(cloud, Kernel::tent(), 0.13);
  REQUIRE(g.edges().size() == expected.size());
  auto sorted = g.edges();
  auto key = [](const GraphEdge& e) { return std::pair{e.i, e.j}; };
  std::sort(sorted.begin(), sorted.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::sort(expected.begin(), expected.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    CHECK(sorted[k].i == expected[k].i);
    CHECK(sorted[k].j == expected[k].j);
    CHECK(sorted[k].dist == expected[k].dist);
    CHECK(sorted[k].omega == expected[k].omega);
    CHECK(sorted[k].cost == expected[k].cost);
  }
}

TEST_CASE("edge cost satisfies the sigma lower bound") {
  std::mt19937_64 rng(31);
  const auto cloud = oracles::random_cloud_in_box(2, 120, 0.0, 1.0, rng);
  for (const Kernel& k : {Kernel::indicator(), Kernel::tent()}) {
    const auto g = build_graph(cloud, k, 0.2);
    for (const auto& e : g.edges()) {
      CHECK(e.cost > 0);
      CHECK(e.cost >= e.dist / k.sigma() - 1e-12);
      CHECK(e.omega <= k(0.0));
    }
  }
}

TEST_CASE("discrete functional on the 1d triple") {
  const PointCloud cloud(1, {0.0, 0.4, 0.8}, Provenance::Explicit);
  const auto g = build_graph(cloud, Kernel::indicator(), 0.5);
  CHECK(discrete_functional(g, {0.0, 1.0, 1.0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(discrete_functional(g, {3.0, 3.0, 3.0}) == 0.0);
}

TEST_CASE("discrete functional equals the all-pairs oracle") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 25; ++rep) {
    const auto cloud = oracles::random_cloud_in_box(2, 40, 0.0, 1.0, rng);
    const auto g = build_graph(cloud, Kernel::tent(), 0.3);
    GraphFunction u(cloud.size());
    for (auto& v : u) v = oracles::u01(rng) * 4 - 2;
    CHECK(discrete_functional(g, u) ==
          oracles::all_pairs_functional(cloud, Kernel::tent(), 0.3, u));
  }
}

TEST_CASE("constrained functional") {
  const PointCloud cloud(1, {0.0, 0.4, 0.8}, Provenance::Explicit);
  const auto g = build_graph(cloud, Kernel::indicator(), 0.5);
  const auto labels = make_labels(1, {0, 2}, {0.0, 1.0});
  GraphFunction ok = {0.0, 0.7, 1.0};
  CHECK(constrained_functional(g, ok, labels, 0.0) == discrete_functional(g, ok));
  GraphFunction bad = {0.0, 0.7, 1.2};
  CHECK(std::isinf(constrained_functional(g, bad, labels, 0.1)));
  GraphFunction perturbed = {0.0, 0.9, 1.0}; // exact on labels, free elsewhere
  CHECK(std::isfinite(constrained_functional(g, perturbed, labels, 0.0)));
}

TEST_CASE("graph distance on the 5-chain") {
  const auto g = build_graph(chain5(), Kernel::indicator(), 0.3);
  const std::vector<uint32_t> src = {0};
  const auto d = graph_distance(g, src);
  const GraphFunction expected = {0.0, 0.3, 0.6, 0.8999999999999999, 1.2};
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(d[i] == doctest::Approx(0.3 * i).epsilon(1e-12));

  std::vector<uint32_t> all = {0, 1, 2, 3, 4};
  const auto zero = graph_distance(g, all);
  for (const double v : zero) CHECK(v == 0.0);
}

TEST_CASE("graph distance equals bellman-ford on random instances") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    const auto cloud = oracles::random_cloud_in_box(2, 10, 0.0, 1.0, rng);
    const auto g = build_graph(cloud, Kernel::tent(), 0.35);
    std::vector<uint32_t> src = {static_cast<uint32_t>(rng() % 10)};
    const auto got = graph_distance(g, src);
    const auto expected = oracles::bellman_ford(g, src);
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (std::isinf(expected[i])) CHECK(std::isinf(got[i]));
      else CHECK(got[i] == expected[i]);
    }
  }
}

TEST_CASE("connectivity reports") {
  const auto g = build_graph(chain5(), Kernel::indicator(), 0.3);
  const std::vector<uint32_t> src = {0};
  CHECK(connectivity(g, src).all_reachable());

  const auto isolated = build_graph(chain5(), Kernel::indicator(), 0.2);
  const auto rep = connectivity(isolated, src);
  CHECK(rep.reachable_count == 1);
  CHECK(rep.unreachable_indices.size() == 4);

  // two clusters far apart
  const PointCloud clusters(1, {0.0, 0.1, 5.0, 5.1}, Provenance::Explicit);
  const auto g2 = build_graph(clusters, Kernel::indicator(), 0.15);
  const auto rep2 = connectivity(g2, src);
  CHECK(rep2.reachable_count == 2);
  CHECK(rep2.unreachable_indices == std::vector<uint32_t>{2, 3});
}

TEST_CASE("extension evaluates at the nearest vertex") {
  const PointCloud cloud(1, {0.0, 1.0}, Provenance::Explicit);
  const auto g = build_graph(cloud, Kernel::indicator(), 1.5);
  const GraphFunction u = {0.0, 5.0};
  CHECK(evaluate_extension(g, u, std::vector<double>{0.3}) == std::vector<double>{0.0});
  CHECK(evaluate_extension(g, u, std::vector<double>{0.0}) == std::vector<double>{0.0});
  CHECK(evaluate_extension(g, u, std::vector<double>{0.9}) == std::vector<double>{5.0});
}

TEST_CASE("extension identity on lattices hitting every voronoi cell") {
  std::mt19937_64 rng(123);
  for (int rep = 0; rep < 100; ++rep) {
    const auto cloud = oracles::random_cloud_in_box(2, 20, 0.0, 1.0, rng);
    const double s = 0.4;
    const auto g = build_graph(cloud, Kernel::tent(), s);
    GraphFunction u(cloud.size());
    for (auto& v : u) v = oracles::u01(rng) * 2 - 1;

    // refined lattice; refine until every cell is hit
    double lh = 0.05;
    std::vector<uint32_t> proj;
    std::vector<double> lattice;
    for (int tries = 0; tries < 6; ++tries) {
      lattice.clear();
      for (double x = 0; x <= 1.0 + 1e-12; x += lh)
        for (double y = 0; y <= 1.0 + 1e-12; y += lh) {
          lattice.push_back(x);
          lattice.push_back(y);
        }
      proj = closest_point_projection(cloud, lattice);
      std::vector<char> hit(cloud.size(), 0);
      for (const uint32_t v : proj) hit[v] = 1;
      if (std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; })) break;
      lh /= 2;
    }
    // sup over query pairs of eta(|p(x)-p(y)|/s)|u(p(x))-u(p(y))| / s equals
    // the discrete functional; the weight depends only on projected vertices,
    // so the sup reduces to hit-vertex pairs
    std::vector<char> hit(cloud.size(), 0);
    for (const uint32_t v : proj) hit[v] = 1;
    REQUIRE(std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; }));
    double sup = 0;
    for (uint32_t a = 0; a < cloud.size(); ++a)
      for (uint32_t b = a + 1; b < cloud.size(); ++b) {
        const double w = Kernel::tent()(dist(cloud.point(a), cloud.point(b)) / s);
        sup = std::max(sup, w * std::abs(u[a] - u[b]));
      }
    CHECK(sup / s == discrete_functional(g, u));
  }
}

TEST_CASE("extension identity holds literally over query pairs") {
  // small instance: evaluate the sup over all query pairs directly
  std::mt19937_64 rng(5);
  const auto cloud = oracles::random_cloud_in_box(2, 6, 0.0, 1.0, rng);
  const double s = 0.5;
  const auto g = build_graph(cloud, Kernel::indicator(), s);
  GraphFunction u(cloud.size());
  for (auto& v : u) v = oracles::u01(rng);
  std::vector<double> lattice;
  for (double x = 0; x <= 1.0 + 1e-12; x += 0.02)
    for (double y = 0; y <= 1.0 + 1e-12; y += 0.02) {
      lattice.push_back(x);
      lattice.push_back(y);
    }
  const auto proj = closest_point_projection(cloud, lattice);
  std::vector<char> hit(cloud.size(), 0);
  for (const uint32_t v : proj) hit[v] = 1;
  REQUIRE(std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; }));
  const auto vals = evaluate_extension(g, u, lattice);
  double sup = 0;
  for (std::size_t a = 0; a < proj.size(); ++a)
    for (std::size_t b = a + 1; b < proj.size(); ++b) {
      const double w = Kernel::indicator()(
          dist(cloud.point(proj[a]), cloud.point(proj[b])) / s);
      sup = std::max(sup, w * std::abs(vals[a] - vals[b]));
    }
  CHECK(sup / s == discrete_functional(g, u));
}

TEST_CASE("functional properties: homogeneity, translation, triangle") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    const auto cloud = oracles::random_cloud_in_box(2, 25, 0.0, 1.0, rng);
    const auto g = build_graph(cloud, Kernel::tent(), 0.3);
    GraphFunction u(cloud.size()), v(cloud.size());
    for (auto& x : u) x = oracles::u01(rng) * 2 - 1;
    for (auto& x : v) x = oracles::u01(rng) * 2 - 1;
    const double fu = discrete_functional(g, u);
    const double fv = discrete_functional(g, v);

    for (const double c : {-2.0, -1.0, 0.5, 3.0}) {
      GraphFunction cu(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) cu[i] = c * u[i];
      CHECK(discrete_functional(g, cu) ==
            doctest::Approx(std::abs(c) * fu).epsilon(1e-12));
    }
    GraphFunction shifted(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) shifted[i] = u[i] + 17.25;
    CHECK(discrete_functional(g, shifted) == doctest::Approx(fu).epsilon(1e-12));

    GraphFunction sum(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) sum[i] = u[i] + v[i];
    CHECK(discrete_functional(g, sum) <= fu + fv + 1e-12);
  }
}

TEST_CASE("edge-cost duality") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const auto cloud = oracles::random_cloud_in_box(2, 20, 0.0, 1.0, rng);
    const auto g = build_graph(cloud, Kernel::tent(), 0.3);
    if (g.edges().empty()) continue;
    GraphFunction u(cloud.size());
    for (auto& x : u) x = oracles::u01(rng);
    // scale u so no edge sits at the threshold
    const double phi = discrete_functional(g, u);
    if (phi == 0) continue;
    GraphFunction w(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] * (0.9 / phi);
    CHECK(discrete_functional(g, w) <= 1.0);
    for (const auto& e : g.edges())
      CHECK(std::abs(w[e.i] - w[e.j]) <= e.cost);
    for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] * (1.1 / phi);
    bool violated = false;
    for (const auto& e : g.edges())
      violated |= std::abs(w[e.i] - w[e.j]) > e.cost;
    CHECK(discrete_functional(g, w) > 1.0);
    CHECK(violated);
  }
}

TEST_CASE("graph distance is tight and a metric") {
  std::mt19937_64 rng(21);
  int connected_seen = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const auto cloud = oracles::random_cloud_in_box(2, 30, 0.0, 1.0, rng);
    const auto g = build_graph(cloud, Kernel::tent(), 0.45);
    std::vector<uint32_t> src = {0};
    if (!connectivity(g, src).all_reachable()) continue;
    ++connected_seen;
    const auto d = graph_distance(g, src);
    // every shortest-path edge is tight, so the functional value is 1
    CHECK(discrete_functional(g, d) == doctest::Approx(1.0).epsilon(1e-12));
    // triangle inequality over sampled triples via a second source
    std::vector<uint32_t> src2 = {5};
    const auto d2 = graph_distance(g, src2);
    for (std::size_t i = 0; i < d.size(); i += 3)
      CHECK(d[i] <= d[5] + d2[i] + 1e-12);
  }
  CHECK(connected_seen > 20);
}

TEST_SUITE_END();

TEST_CASE("three-dimensional graphs match the oracles") {
  std::mt19937_64 rng(333);
  const auto cloud = oracles::random_cloud_in_box(3, 60, 0.0, 1.0, rng);
  const auto g = build_graph(cloud, Kernel::tent(), 0.4);
  const auto expected = oracles::all_pairs_edges(cloud, Kernel::tent(), 0.4);
  REQUIRE(g.edges().size() == expected.size());
  std::vector<uint32_t> src = {0};
  const auto got = graph_distance(g, src);
  const auto bf = oracles::bellman_ford(g, src);
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (std::isinf(bf[i])) CHECK(std::isinf(got[i]));
    else CHECK(got[i] == bf[i]);
  }
}
