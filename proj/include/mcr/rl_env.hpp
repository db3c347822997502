#pragma once

#include <vector>

#include "mcr/flow_tree.hpp"
#include "mcr/graph.hpp"

namespace mcr {

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvConfig {
  double gamma = 0.99;
  int max_steps_per_episode = 0;  // 0 = 2 * node_count
  bool use_virtual_hub = true;
};

struct RoutingState {
  std::vector<char> inflow;            // node -> in V_inflow
  std::vector<NodeId> partial_path;    // P_t; last element is u_t
  std::vector<NodeId> user_queue;      // remaining users, demand-descending
  NodeId active_user = -1;
  double active_demand = 0.0;
  int step_count = 0;
};

struct StepOutcome {
  double reward = 0.0;
  bool episode_done = false;  // current user's path complete
  bool all_done = false;      // all users routed
  bool forced = false;        // hub fallback injected by the step-limit guard
};

/// Episodic multicast construction: one episode per user, users processed
/// in descending demand order; an episode grows a path from the user until
/// it touches the inflow set, which then absorbs the path.
class RoutingEnv {
 public:
  RoutingEnv(const ProblemInstance& instance, const EnvConfig& config);

  /// Warm start: the base tree's nodes seed the inflow set and only users
  /// outside it are routed. Pre-existing edges are never modified.
  RoutingEnv(const ProblemInstance& instance, const EnvConfig& config,
             MulticastTree base);

  void reset();
  const RoutingState& state() const { return state_; }
  const ProblemInstance& instance() const { return *instance_; }
  const EnvConfig& config() const { return config_; }
  const MulticastTree& tree() const { return tree_; }
  bool done() const { return done_; }

  /// Neighbors of the current node not already on the partial path.
  std::vector<NodeId> valid_actions() const;

  StepOutcome step(NodeId action);

  /// Steps the environment along the hub to the source when the step limit
  /// is hit; rewards are charged as usual.
  StepOutcome force_hub_transition();

  int max_steps() const { return max_steps_; }

 private:
  void begin_next_episode();
  StepOutcome apply(NodeId action, bool forced);

  const ProblemInstance* instance_;
  EnvConfig config_;
  MulticastTree base_;
  int max_steps_ = 0;
  RoutingState state_;
  MulticastTree tree_;
  bool done_ = false;
};

}  // namespace mcr
