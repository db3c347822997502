#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mcr/exact.hpp"

using namespace mcr;

namespace {

ProblemInstance random_small_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cost_dist(0.1, 1.0);
  const int n = 4 + static_cast<int>(rng() % 5);  // 4..8
  // random connected graph: spanning tree + a few extras, capped at 16 edges
  std::vector<Edge> edges;
  for (NodeId v = 1; v < n; ++v)
    edges.push_back({static_cast<NodeId>(rng() % static_cast<std::uint64_t>(v)), v,
                     cost_dist(rng)});
  int extras = static_cast<int>(rng() % 4);
  for (int i = 0; i < extras && edges.size() < 16; ++i) {
    NodeId u = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(n));
    NodeId v = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(n));
    if (u == v) continue;
    bool dup = false;
    for (const auto& e : edges)
      if ((e.u == std::min(u, v) && e.v == std::max(u, v)) ||
          (e.u == std::max(u, v) && e.v == std::min(u, v)))
        dup = true;
    if (!dup) edges.push_back({u, v, cost_dist(rng)});
  }
  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(n, edges);
  inst.source = 0;
  const double levels[] = {1.0, 0.5, 0.25};
  int k = 1 + static_cast<int>(rng() % 3);
  std::vector<NodeId> pool;
  for (NodeId v = 1; v < n; ++v) pool.push_back(v);
  std::shuffle(pool.begin(), pool.end(), rng);
  for (int i = 0; i < k; ++i)
    inst.demands.entries.emplace_back(pool[static_cast<size_t>(i)], levels[rng() % 3]);
  return inst;
}

}  // namespace

TEST_CASE("brute force on a hand triangle") {
  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(3, {{0, 1, 5.0}, {0, 2, 1.0}, {1, 2, 1.0}});
  inst.source = 0;
  inst.demands.entries = {{1, 1.0}};
  Solution sol = brute_force(inst);
  CHECK(sol.cost == doctest::Approx(2.0));
  CHECK(sol.tree.parent.at(2) == 0);
  CHECK(sol.tree.parent.at(1) == 2);
}

TEST_CASE("brute force on a single edge") {
  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(2, {{0, 1, 0.7}});
  inst.source = 0;
  inst.demands.entries = {{1, 0.5}};
  CHECK(brute_force(inst).cost == doctest::Approx(0.35));
}

TEST_CASE("brute force reproduces the worked-example total") {
  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(
      6, {{0, 1, 2.0}, {1, 3, 2.0}, {1, 4, 1.0}, {0, 2, 2.0}, {2, 5, 1.0}});
  inst.source = 0;
  inst.demands.entries = {{3, 4.0}, {4, 2.0}, {5, 1.0}};
  CHECK(brute_force(inst).cost == doctest::Approx(21.0));
}

TEST_CASE("brute force rejects large edge sets") {
  GenConfig cfg;
  cfg.node_count = 14;
  cfg.user_count = 2;
  cfg.degree = 4;  // 28 edges
  cfg.seed = 1;
  CHECK_THROWS_AS(brute_force(generate_instance(cfg)), SolverError);
}

TEST_CASE("dp equals brute force on 200 random small instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    ProblemInstance inst = random_small_instance(rng);
    Solution bf = brute_force(inst);
    Solution dp = dreyfus_wagner(inst);
    CHECK(dp.cost == doctest::Approx(bf.cost).epsilon(1e-9));
  }
}

TEST_CASE("dp on a star") {
  // source 0 - center 1 - destinations 2 (x=1.0), 3 (x=0.5), unit costs
  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}});
  inst.source = 0;
  inst.demands.entries = {{2, 1.0}, {3, 0.5}};
  CHECK(dreyfus_wagner(inst).cost == doctest::Approx(2.5));
}

TEST_CASE("dp with one destination is the weighted shortest path") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    GenConfig cfg;
    cfg.node_count = 12;
    cfg.user_count = 1;
    cfg.seed = rng();
    ProblemInstance inst = generate_instance(cfg);
    Solution dp = dreyfus_wagner(inst);
    // Bellman-Ford distances as the reference
    std::vector<double> dist(12, 1e18);
    dist[static_cast<size_t>(inst.source)] = 0;
    for (int i = 0; i < 12; ++i)
      for (const auto& e : inst.graph.edges()) {
        dist[static_cast<size_t>(e.v)] =
            std::min(dist[static_cast<size_t>(e.v)], dist[static_cast<size_t>(e.u)] + e.cost);
        dist[static_cast<size_t>(e.u)] =
            std::min(dist[static_cast<size_t>(e.u)], dist[static_cast<size_t>(e.v)] + e.cost);
      }
    const auto& [dest, demand] = inst.demands.entries.front();
    CHECK(dp.cost == doctest::Approx(dist[static_cast<size_t>(dest)] * demand));
  }
}

TEST_CASE("dp solutions validate cleanly") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    GenConfig cfg;
    cfg.node_count = 16;
    cfg.user_count = 5;
    cfg.seed = rng();
    ProblemInstance inst = generate_instance(cfg);
    Solution dp = dreyfus_wagner(inst);
    ValidationReport report = validate(inst.graph, dp.tree, inst.source, inst.demands);
    CHECK(report.ok());
    CHECK(dp.cost ==
          doctest::Approx(tree_cost(inst.graph, dp.tree, inst.demands)).epsilon(1e-9));
  }
}

TEST_CASE("demand scaling covariance") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    ProblemInstance inst = random_small_instance(rng);
    Solution base = dreyfus_wagner(inst);
    ProblemInstance scaled = inst;
    const double lambda = 3.5;
    for (auto& [node, demand] : scaled.demands.entries) demand *= lambda;
    Solution scaled_sol = dreyfus_wagner(scaled);
    CHECK(scaled_sol.cost == doctest::Approx(lambda * base.cost).epsilon(1e-9));
    CHECK(scaled_sol.tree.parent == base.tree.parent);
  }
}

TEST_CASE("unreachable terminal is identified") {
  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  inst.source = 0;
  inst.demands.entries = {{1, 1.0}, {3, 0.5}};
  CHECK_THROWS_WITH_AS(dreyfus_wagner(inst), "terminal 3 unreachable from source",
                       InfeasibleError);
}
