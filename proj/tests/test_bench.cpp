#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "mcr/bench.hpp"

using namespace mcr;

TEST_CASE("suite names round-trip and bad names are rejected") {
  for (auto kind : {SuiteKind::NodeSweep, SuiteKind::DegreeSweep, SuiteKind::UserSweep,
                    SuiteKind::Incremental, SuiteKind::Ablation})
    CHECK(parse_suite(suite_name(kind)) == kind);
  CHECK_THROWS_AS(parse_suite("edge-sweep"), BenchError);
}

TEST_CASE("cost-delay score arithmetic") {
  CHECK(cost_delay_score(1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cost_delay_score(6.781, std::pow(10.0, 1.812)) ==
        doctest::Approx(15.374).epsilon(1e-9));
  CHECK(cost_delay_score(7.418, std::pow(10.0, -0.712)) ==
        doctest::Approx(14.124).epsilon(1e-9));
  // Sub-second runtimes subtract from the score.
  CHECK(cost_delay_score(5.0, 0.001) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("reference score table is internally consistent") {
  // (mean cost, mean log10 runtime, mean score) per node count and solver;
  // the score column must equal 2*cost + log10_runtime within the
  // publication rounding of the sources (each value rounded to 1e-3).
  struct Ref {
    int n;
    const char* solver;
    double cost, delay, score;
  };
  const Ref refs[] = {
      {30, "bruteforce", 6.781, 1.812, 15.374},
      {30, "ga", 7.168, 1.977, 16.314},
      {30, "bco", 6.834, 1.593, 15.261},
      {30, "dijkstra", 8.437, -3.098, 13.776},
      {30, "greedy", 7.418, -0.712, 14.124},
      {30, "gpn", 7.200, -0.585, 13.816},
      {35, "bruteforce", 7.296, 1.843, 16.436},
      {35, "ga", 7.755, 2.045, 17.554},
      {35, "bco", 7.357, 1.646, 16.359},
      {35, "dijkstra", 9.255, -3.065, 15.445},
      {35, "greedy", 7.995, -0.677, 15.313},
      {35, "gpn", 7.808, -0.554, 15.063},
      {40, "bruteforce", 7.680, 1.903, 17.263},
      {40, "ga", 8.063, 2.083, 18.208},
      {40, "bco", 7.744, 1.688, 17.175},
      {40, "dijkstra", 9.729, -3.022, 16.436},
      {40, "greedy", 8.501, -0.657, 16.345},
      {40, "gpn", 8.158, -0.535, 15.782},
      {45, "bruteforce", 7.853, 1.973, 17.680},
      {45, "ga", 8.336, 2.120, 18.793},
      {45, "bco", 7.933, 1.713, 17.579},
      {45, "dijkstra", 9.942, -3.011, 16.873},
      {45, "greedy", 8.624, -0.654, 16.595},
      {45, "gpn", 8.389, -0.519, 16.259},
      {50, "bruteforce", 8.207, 2.029, 18.444},
      {50, "ga", 8.817, 0.942, 18.575},
      {50, "bco", 8.521, 0.544, 17.587},
      {50, "dijkstra", 10.758, -2.994, 18.523},
      {50, "greedy", 9.251, -0.627, 17.875},
      {50, "gpn", 8.781, -0.515, 17.048},
  };
  CHECK(std::size(refs) == 30);
  for (const auto& r : refs) CHECK(std::abs(2.0 * r.cost + r.delay - r.score) <= 0.005);

  // Within each node count, optimal cost is the bruteforce row and the
  // shortest-path heuristic is the most expensive tree.
  for (int n = 30; n <= 50; n += 5) {
    double best = 1e9, dij = 0;
    for (const auto& r : refs)
      if (r.n == n) {
        best = std::min(best, r.cost);
        if (std::string(r.solver) == "dijkstra") dij = r.cost;
      }
    for (const auto& r : refs)
      if (r.n == n && std::string(r.solver) == "bruteforce")
        CHECK(r.cost == doctest::Approx(best));
    CHECK(dij == doctest::Approx(best * 1.15).epsilon(0.15));  // clearly above optimum
  }
}

TEST_CASE("row seeds are deterministic and spread") {
  CHECK(row_seed(42, "n=30", 0) == row_seed(42, "n=30", 0));
  std::set<std::uint64_t> seeds;
  for (int i = 0; i < 100; ++i) {
    seeds.insert(row_seed(42, "n=30", i));
    seeds.insert(row_seed(42, "n=35", i));
    seeds.insert(row_seed(43, "n=30", i));
  }
  CHECK(seeds.size() == 300);
}

TEST_CASE("node sweep emits ordered, recomputable rows") {
  SuiteConfig cfg;
  cfg.suite = SuiteKind::NodeSweep;
  cfg.instances_per_point = 2;
  cfg.solvers = {"dijkstra", "greedy"};
  cfg.seed = 42;

  auto rows = run_suite(cfg);
  REQUIRE(rows.size() == 5 * 2 * 2);  // 5 node counts x 2 instances x 2 solvers

  std::vector<std::string> points;
  for (const auto& r : rows) {
    if (points.empty() || points.back() != r.point) points.push_back(r.point);
    CHECK(r.feasible);
    CHECK(r.cost > 0.0);
    CHECK(r.score ==
          doctest::Approx(2.0 * r.cost + r.log10_runtime).epsilon(1e-9));
    CHECK(r.log10_runtime ==
          doctest::Approx(std::log10(r.runtime_seconds)).epsilon(1e-9));
  }
  CHECK(points == std::vector<std::string>{"n=30", "n=35", "n=40", "n=45", "n=50"});

  // Costs and seeds are reproducible run to run; runtimes are not.
  auto again = run_suite(cfg);
  REQUIRE(again.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].point == rows[i].point);
    CHECK(again[i].instance_seed == rows[i].instance_seed);
    CHECK(again[i].solver == rows[i].solver);
    CHECK(again[i].cost == rows[i].cost);
  }

  // Thread parallelism keeps row order and values.
  cfg.threads = 4;
  auto parallel = run_suite(cfg);
  REQUIRE(parallel.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(parallel[i].solver == rows[i].solver);
    CHECK(parallel[i].cost == rows[i].cost);
  }
}

TEST_CASE("greedy never loses to the shortest-path baseline by much") {
  SuiteConfig cfg;
  cfg.suite = SuiteKind::UserSweep;
  cfg.instances_per_point = 1;
  cfg.solvers = {"dp", "dijkstra"};
  cfg.seed = 7;
  auto rows = run_suite(cfg);
  // dp rows must never cost more than dijkstra rows on the same instance.
  for (size_t i = 0; i + 1 < rows.size(); i += 2) {
    REQUIRE(rows[i].solver == "dp");
    REQUIRE(rows[i + 1].solver == "dijkstra");
    REQUIRE(rows[i].instance_seed == rows[i + 1].instance_seed);
    CHECK(rows[i].cost <= rows[i + 1].cost + 1e-9);
  }
}

TEST_CASE("csv export has a fixed header and full precision") {
  SuiteConfig cfg;
  cfg.suite = SuiteKind::NodeSweep;
  cfg.instances_per_point = 1;
  cfg.solvers = {"dijkstra"};
  auto rows = run_suite(cfg);
  auto csv = rows_to_csv(rows);
  CHECK(csv.rfind("point,instance_seed,solver,cost,runtime_seconds,log10_runtime,"
                  "score,feasible\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(rows.size()));

  auto summary = summary_block(rows);
  CHECK(summary.find("n=30") != std::string::npos);
  CHECK(summary.find("dijkstra") != std::string::npos);
}

TEST_CASE("warm greedy extends a base tree without touching it") {
  GenConfig gen;
  gen.node_count = 30;
  gen.user_count = 12;
  gen.seed = 19;
  auto inst = generate_instance(gen);

  ProblemInstance base_inst = inst;
  base_inst.demands.entries.assign(inst.demands.entries.begin(),
                                   inst.demands.entries.begin() + 9);
  auto base = dreyfus_wagner(base_inst);

  auto warm = greedy_warm(inst, base.tree);
  CHECK(warm.solver_tag == "greedy-warm");
  CHECK(warm.runtime_seconds > 0.0);
  CHECK(validate(inst.graph, warm.tree, inst.source, inst.demands).ok());
  for (const auto& [child, parent] : base.tree.parent) {
    REQUIRE(warm.tree.parent.count(child) == 1);
    CHECK(warm.tree.parent.at(child) == parent);
  }
  // Warm attachment can never beat the cold optimum on the full demand set.
  auto cold = dreyfus_wagner(inst);
  CHECK(warm.cost >= cold.cost - 1e-9);
}

TEST_CASE("incremental experiment compares cold and warm solves") {
  SuiteConfig cfg;
  cfg.suite = SuiteKind::Incremental;
  cfg.instances_per_point = 1;
  cfg.seed = 5;
  auto rows = incremental_run(cfg);
  REQUIRE(rows.size() == 3 * 2);  // added=1..3, {dp-cold, greedy-warm}

  for (size_t i = 0; i + 1 < rows.size(); i += 2) {
    REQUIRE(rows[i].solver == "dp-cold");
    REQUIRE(rows[i + 1].solver == "greedy-warm");
    CHECK(rows[i].point == rows[i + 1].point);
    CHECK(rows[i + 1].cost >= rows[i].cost - 1e-9);
    CHECK(rows[i].feasible);
    CHECK(rows[i + 1].feasible);
  }
  std::vector<std::string> points;
  for (const auto& r : rows)
    if (points.empty() || points.back() != r.point) points.push_back(r.point);
  CHECK(points == std::vector<std::string>{"added=1", "added=2", "added=3"});
}

TEST_CASE("ablation model configs cover the four variants") {
  auto full = ablation_model_config("full");
  CHECK(full.encoder == EncoderVariant::Gat);
  CHECK(full.aggregator == AggregatorVariant::Lstm);
  CHECK(full.scorer == ScorerVariant::Attention);
  CHECK(ablation_model_config("gcn").encoder == EncoderVariant::Gcn);
  CHECK(ablation_model_config("no-lstm").aggregator == AggregatorVariant::None);
  CHECK(ablation_model_config("mlp").scorer == ScorerVariant::Mlp);
  CHECK_THROWS_AS(ablation_model_config("transformer"), BenchError);
}

TEST_CASE("dot export is deterministic and structurally sound") {
  GenConfig gen;
  gen.node_count = 8;
  gen.user_count = 3;
  gen.seed = 2;
  auto inst = attach_virtual_hub(generate_instance(gen));
  auto sol = dijkstra_reuse(inst);

  auto dot = export_dot(inst, {{"tree", sol.tree}});
  CHECK(dot == export_dot(inst, {{"tree", sol.tree}}));
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("doublecircle") != std::string::npos);  // source marker
  CHECK(dot.find("dashed") != std::string::npos);        // hub edges
  CHECK(dot.back() == '\n');

  // No trees: still a valid graph with just the instance.
  auto bare = export_dot(inst, {});
  CHECK(bare.rfind("digraph", 0) == 0);
  CHECK(bare.find("tree") == std::string::npos);
}
