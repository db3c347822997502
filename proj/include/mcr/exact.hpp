#pragma once

#include <string>

#include "mcr/flow_tree.hpp"
#include "mcr/graph.hpp"

namespace mcr {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleError : public SolverError {
 public:
  using SolverError::SolverError;
};

struct Solution {
  MulticastTree tree;
  double cost = 0.0;
  std::string solver_tag;
  double runtime_seconds = 0.0;
  bool is_tree = true;  // dijkstra overlays may fail to be trees
  FlowAssignment flows;
};

/// Enumerates every edge subset. Budget |E| <= 20.
/// Ties: lowest cost, then fewest edges, then lexicographic edge list.
Solution brute_force(const ProblemInstance& instance);

/// Demand-weighted Dreyfus-Wagner subset dynamic program. Budget K <= 16.
/// Every edge separating terminal set S from the root carries the maximum
/// demand in S, so each DP state gets a well-defined per-edge multiplier.
Solution dreyfus_wagner(const ProblemInstance& instance);

}  // namespace mcr
