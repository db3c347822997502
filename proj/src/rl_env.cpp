#include "mcr/rl_env.hpp"

#include <algorithm>

namespace mcr {

RoutingEnv::RoutingEnv(const ProblemInstance& instance, const EnvConfig& config)
    : RoutingEnv(instance, config, MulticastTree{.root = instance.source, .parent = {}}) {}

RoutingEnv::RoutingEnv(const ProblemInstance& instance, const EnvConfig& config,
                       MulticastTree base)
    : instance_(&instance), config_(config), base_(std::move(base)) {
  if (config.gamma <= 0.0 || config.gamma >= 1.0)
    throw EnvError("gamma must be in (0,1)");
  if (config.use_virtual_hub && !instance.graph.has_virtual_hub())
    throw EnvError("config requires a virtual hub but the instance has none");
  if (instance.demands.entries.empty()) throw EnvError("instance has no destinations");
  if (base_.root != instance.source) throw EnvError("base tree root must be the source");
  max_steps_ = config.max_steps_per_episode > 0 ? config.max_steps_per_episode
                                                : 2 * instance.graph.node_count();
  reset();
}

void RoutingEnv::reset() {
  state_ = RoutingState{};
  state_.inflow.assign(static_cast<size_t>(instance_->graph.node_count()), 0);
  state_.inflow[static_cast<size_t>(instance_->source)] = 1;
  for (NodeId v : base_.nodes()) state_.inflow[static_cast<size_t>(v)] = 1;
  auto entries = instance_->demands.entries;
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [d, x] : entries) state_.user_queue.push_back(d);
  tree_ = base_;
  done_ = false;
  begin_next_episode();
}

void RoutingEnv::begin_next_episode() {
  while (!state_.user_queue.empty()) {
    NodeId user = state_.user_queue.front();
    state_.user_queue.erase(state_.user_queue.begin());
    if (state_.inflow[static_cast<size_t>(user)]) continue;  // already connected
    state_.active_user = user;
    state_.active_demand = instance_->demands.demand_of(user);
    state_.partial_path = {user};
    state_.step_count = 0;
    return;
  }
  state_.active_user = -1;
  state_.partial_path.clear();
  done_ = true;
}

std::vector<NodeId> RoutingEnv::valid_actions() const {
  if (done_) throw EnvError("no active episode");
  NodeId u = state_.partial_path.back();
  std::vector<NodeId> out;
  if (config_.use_virtual_hub && u == *instance_->graph.hub_id()) {
    // From the hub the path must rejoin the inflow set, so the episode
    // terminates on the next step and the hub is never interior to an
    // unfinished path.
    for (int v = 0; v < static_cast<int>(state_.inflow.size()); ++v)
      if (state_.inflow[static_cast<size_t>(v)]) out.push_back(v);
    return out;
  }
  for (const auto& [v, c] : instance_->graph.neighbors(u)) {
    if (std::find(state_.partial_path.begin(), state_.partial_path.end(), v) ==
        state_.partial_path.end())
      out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

StepOutcome RoutingEnv::step(NodeId action) {
  auto actions = valid_actions();
  if (std::find(actions.begin(), actions.end(), action) == actions.end())
    throw EnvError("invalid action " + std::to_string(action));
  return apply(action, /*forced=*/false);
}

StepOutcome RoutingEnv::apply(NodeId action, bool forced) {
  NodeId u = state_.partial_path.back();
  auto cost = instance_->graph.edge_cost(u, action);
  if (!cost) throw EnvError("action is not adjacent to the current node");

  StepOutcome out;
  out.forced = forced;
  out.reward = -state_.active_demand * (*cost);
  ++state_.step_count;

  if (state_.inflow[static_cast<size_t>(action)]) {
    // Episode terminates: merge the completed path into the tree.
    std::vector<NodeId> path = state_.partial_path;
    path.push_back(action);
    tree_ = merge_path(tree_, path);
    for (NodeId v : path) state_.inflow[static_cast<size_t>(v)] = 1;
    out.episode_done = true;
    begin_next_episode();
    out.all_done = done_;
  } else {
    state_.partial_path.push_back(action);
  }
  return out;
}

StepOutcome RoutingEnv::force_hub_transition() {
  if (!config_.use_virtual_hub)
    throw EnvError("dead end: episode cannot proceed without a virtual hub");
  NodeId hub = *instance_->graph.hub_id();
  NodeId u = state_.partial_path.back();
  if (u == hub) return apply(instance_->source, /*forced=*/true);
  return apply(hub, /*forced=*/true);
}

}  // namespace mcr
