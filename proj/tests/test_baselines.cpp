#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcr/baselines.hpp"

using namespace mcr;

TEST_CASE("dijkstra overlay charges shared edges once at the larger demand") {
  // Both users route through the chain 0-1-2; user 3 demands 1.0, user 4
  // demands 0.5, each hangs off node 2.
  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(
      5, {{0, 1, 0.4}, {1, 2, 0.3}, {2, 3, 0.2}, {2, 4, 0.2}});
  inst.source = 0;
  inst.demands.entries = {{3, 1.0}, {4, 0.5}};
  Solution sol = dijkstra_reuse(inst);
  // shared trunk (0.7) at 1.0; leaf edges at own demands
  CHECK(sol.cost == doctest::Approx(0.7 * 1.0 + 0.2 * 1.0 + 0.2 * 0.5));
}

TEST_CASE("single user: every baseline matches the optimum") {
  GenConfig cfg;
  cfg.node_count = 14;
  cfg.user_count = 1;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    ProblemInstance inst = generate_instance(cfg);
    double dp = dreyfus_wagner(inst).cost;
    CHECK(dijkstra_reuse(inst).cost == doctest::Approx(dp));
    CHECK(sequential_greedy(inst).cost == doctest::Approx(dp));
    GaConfig ga;
    ga.seed = seed;
    CHECK(genetic_algorithm(inst, ga).cost == doctest::Approx(dp));
    BcoConfig bco;
    bco.seed = seed;
    CHECK(bee_colony(inst, bco).cost == doctest::Approx(dp));
  }
}

TEST_CASE("greedy reuses a high-demand trunk") {
  // 1.0-demand user at 3 via 0-1-2-3; 0.5-demand users at 4 and 5 hang off
  // node 2: only their leaf edges add cost. Direct detours are pricier.
  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(6, {{0, 1, 0.2},
                                            {1, 2, 0.2},
                                            {2, 3, 0.2},
                                            {2, 4, 0.1},
                                            {2, 5, 0.1},
                                            {0, 4, 0.9},
                                            {0, 5, 0.9}});
  inst.source = 0;
  inst.demands.entries = {{3, 1.0}, {4, 0.5}, {5, 0.5}};
  Solution greedy = sequential_greedy(inst);
  Solution bf = brute_force(inst);
  CHECK(greedy.cost == doctest::Approx(0.6 + 0.05 + 0.05));
  CHECK(greedy.cost == doctest::Approx(bf.cost));
}

TEST_CASE("greedy dominates dijkstra on most instances and never beats dp") {
  GenConfig cfg;
  cfg.node_count = 30;
  cfg.user_count = 12;
  int greedy_not_worse = 0;
  const int trials = 100;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    cfg.seed = seed * 31 + 1;
    ProblemInstance inst = generate_instance(cfg);
    double dp = dreyfus_wagner(inst).cost;
    double greedy = sequential_greedy(inst).cost;
    double dij = dijkstra_reuse(inst).cost;
    CHECK(greedy >= dp - 1e-9);
    CHECK(dij >= dp - 1e-9);
    if (greedy <= dij + 1e-12) ++greedy_not_worse;
  }
  CHECK(greedy_not_worse >= 80);
}

TEST_CASE("ga with zero generations returns the best initial chromosome") {
  GenConfig cfg;
  cfg.node_count = 16;
  cfg.user_count = 5;
  cfg.seed = 9;
  ProblemInstance inst = generate_instance(cfg);
  GaConfig ga;
  ga.generations = 0;
  ga.seed = 4;
  Solution sol = genetic_algorithm(inst, ga);
  CHECK(sol.cost >= dreyfus_wagner(inst).cost - 1e-9);
  CHECK(validate(inst.graph, sol.tree, inst.source, inst.demands).ok());
}

TEST_CASE("bco with zero iterations returns the best initial solution") {
  GenConfig cfg;
  cfg.node_count = 16;
  cfg.user_count = 5;
  cfg.seed = 12;
  ProblemInstance inst = generate_instance(cfg);
  BcoConfig bco;
  bco.iterations = 0;
  bco.seed = 4;
  Solution sol = bee_colony(inst, bco);
  CHECK(sol.cost >= dreyfus_wagner(inst).cost - 1e-9);
  CHECK(validate(inst.graph, sol.tree, inst.source, inst.demands).ok());
}

TEST_CASE("seeded determinism for every baseline") {
  GenConfig cfg;
  cfg.node_count = 20;
  cfg.user_count = 6;
  cfg.seed = 33;
  ProblemInstance inst = generate_instance(cfg);
  GaConfig ga;
  ga.seed = 5;
  ga.generations = 30;
  BcoConfig bco;
  bco.seed = 5;
  bco.iterations = 30;
  CHECK(genetic_algorithm(inst, ga).tree.parent ==
        genetic_algorithm(inst, ga).tree.parent);
  CHECK(bee_colony(inst, bco).tree.parent == bee_colony(inst, bco).tree.parent);
  CHECK(sequential_greedy(inst).tree.parent == sequential_greedy(inst).tree.parent);
  CHECK(dijkstra_reuse(inst).cost == dijkstra_reuse(inst).cost);
}

TEST_CASE("ga and bco solutions validate and sit between dp and chance") {
  GenConfig cfg;
  cfg.node_count = 30;
  cfg.user_count = 12;
  double dp_sum = 0, ga_sum = 0;
  const int trials = 20;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    cfg.seed = seed * 7 + 3;
    ProblemInstance inst = generate_instance(cfg);
    double dp = dreyfus_wagner(inst).cost;
    GaConfig ga;
    ga.seed = seed;
    ga.generations = 60;
    Solution sol = genetic_algorithm(inst, ga);
    CHECK(validate(inst.graph, sol.tree, inst.source, inst.demands).ok());
    dp_sum += dp;
    ga_sum += sol.cost;
  }
  CHECK(ga_sum >= dp_sum - 1e-9);
  CHECK(ga_sum <= 1.05 * dp_sum);  // within 5% of optimal on average
}

TEST_CASE("unreachable destination raises infeasibility") {
  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  inst.source = 0;
  inst.demands.entries = {{3, 1.0}};
  CHECK_THROWS_AS(dijkstra_reuse(inst), InfeasibleError);
  CHECK_THROWS_AS(sequential_greedy(inst), InfeasibleError);
}
