#pragma once

#include <cstdint>

#include "mcr/exact.hpp"
#include "mcr/flow_tree.hpp"
#include "mcr/graph.hpp"

namespace mcr {

struct GaConfig {
  int population = 50;
  int generations = 200;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;
  int tournament_size = 3;
  std::uint64_t seed = 0;
};

struct BcoConfig {
  int colony_size = 30;
  double employed_fraction = 0.5;
  int scout_limit = 20;  // stagnant trials before a scout reset
  int iterations = 200;
  std::uint64_t seed = 0;
};

/// Independent cost-weighted shortest path per user, overlaid; each shared
/// edge is charged once at the maximum demand among the users crossing it.
/// Paths are chosen without any reuse-aware metric.
Solution dijkstra_reuse(const ProblemInstance& instance);

/// Users in descending demand order; each attaches to the current tree by
/// a demand-weighted shortest path under the incremental metric
/// e(u,v) * max(0, x_k - f(u,v)).
Solution sequential_greedy(const ProblemInstance& instance);

/// Attaches users to `base` in the given order (ties in fitness handled by
/// the caller). Shared by the greedy baseline, GA/BCO fitness, and warm
/// incremental runs.
Solution attach_in_order(const ProblemInstance& instance,
                         const std::vector<NodeId>& order,
                         const MulticastTree& base);

Solution genetic_algorithm(const ProblemInstance& instance, const GaConfig& config);

Solution bee_colony(const ProblemInstance& instance, const BcoConfig& config);

}  // namespace mcr
