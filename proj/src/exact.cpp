#include "mcr/exact.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <functional>
#include <limits>
#include <queue>
#include <set>

namespace mcr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Union-find over node ids.
struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(static_cast<size_t>(n)) {
    for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
  }
  int find(int v) { return p[static_cast<size_t>(v)] == v ? v : p[static_cast<size_t>(v)] = find(p[static_cast<size_t>(v)]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p[static_cast<size_t>(a)] = b;
    return true;
  }
};

// Orients an undirected edge set from the source; returns nullopt if the
// set is not a single tree spanning source and all destinations with
// destination-only leaves.
std::optional<MulticastTree> orient_as_tree(const ProblemInstance& inst,
                                            const std::vector<std::pair<NodeId, NodeId>>& edges) {
  std::set<NodeId> nodes{inst.source};
  for (auto [u, v] : edges) {
    nodes.insert(u);
    nodes.insert(v);
  }
  if (edges.size() + 1 != nodes.size()) return std::nullopt;
  Dsu dsu(inst.graph.node_count());
  for (auto [u, v] : edges)
    if (!dsu.unite(u, v)) return std::nullopt;
  for (NodeId v : nodes)
    if (dsu.find(v) != dsu.find(inst.source)) return std::nullopt;
  for (const auto& [d, x] : inst.demands.entries)
    if (!nodes.count(d)) return std::nullopt;

  std::map<NodeId, std::vector<NodeId>> adj;
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  MulticastTree tree;
  tree.root = inst.source;
  std::vector<NodeId> stack{inst.source};
  std::set<NodeId> seen{inst.source};
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : adj[u])
      if (seen.insert(v).second) {
        tree.parent[v] = u;
        stack.push_back(v);
      }
  }
  auto fwd = tree.children();
  for (NodeId v : nodes)
    if (v != tree.root && fwd.find(v) == fwd.end() && !inst.demands.has(v))
      return std::nullopt;  // relay leaf
  return tree;
}

std::vector<std::pair<NodeId, NodeId>> sorted_edge_list(const MulticastTree& t) {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& [c, p] : t.parent)
    out.emplace_back(std::min(c, p), std::max(c, p));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Solution brute_force(const ProblemInstance& instance) {
  const auto t0 = Clock::now();
  const auto& all_edges = instance.graph.edges();
  const size_t m = all_edges.size();
  if (m > 20) throw SolverError("brute_force edge budget exceeded (|E| > 20); use dp");

  Solution best;
  best.cost = kInf;
  best.solver_tag = "bruteforce";
  std::vector<std::pair<NodeId, NodeId>> best_key;
  bool found = false;

  if (instance.demands.entries.empty()) {
    best.cost = 0.0;
    best.tree.root = instance.source;
    best.runtime_seconds = seconds_since(t0);
    return best;
  }

  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<std::pair<NodeId, NodeId>> subset;
    for (size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) subset.emplace_back(all_edges[i].u, all_edges[i].v);
    auto tree = orient_as_tree(instance, subset);
    if (!tree) continue;
    double cost = tree_cost(instance.graph, *tree, instance.demands);
    auto key = sorted_edge_list(*tree);
    bool better = !found || cost < best.cost ||
                  (cost == best.cost &&
                   (key.size() < best_key.size() ||
                    (key.size() == best_key.size() && key < best_key)));
    if (better) {
      found = true;
      best.cost = cost;
      best.tree = std::move(*tree);
      best_key = std::move(key);
    }
  }
  if (!found) throw InfeasibleError("no feasible multicast tree exists");
  best.flows = compute_flows(best.tree, instance.demands);
  best.runtime_seconds = seconds_since(t0);
  return best;
}

Solution dreyfus_wagner(const ProblemInstance& instance) {
  const auto t0 = Clock::now();
  const auto& g = instance.graph;
  const int n = g.node_count();
  const auto& dest = instance.demands.entries;
  const int k = static_cast<int>(dest.size());
  if (k > 16) throw SolverError("dreyfus_wagner terminal budget exceeded (K > 16)");

  Solution sol;
  sol.solver_tag = "dp";
  if (k == 0) {
    sol.tree.root = instance.source;
    sol.runtime_seconds = seconds_since(t0);
    return sol;
  }

  const std::uint32_t full = (1u << k) - 1;
  // dp[S][v]: optimal cost of a tree connecting all terminals in S to v,
  // with each edge weighted by the maximum demand below it.
  std::vector<std::vector<double>> dp(full + 1, std::vector<double>(static_cast<size_t>(n), kInf));
  struct Pred {
    enum Kind : std::uint8_t { None, Grow, Merge } kind = None;
    NodeId from = -1;         // Grow: previous anchor on the path
    std::uint32_t split = 0;  // Merge: one side of the partition
  };
  std::vector<std::vector<Pred>> pred(full + 1, std::vector<Pred>(static_cast<size_t>(n)));

  std::vector<double> max_demand(full + 1, 0.0);
  for (std::uint32_t s = 1; s <= full; ++s) {
    int i = std::countr_zero(s);
    max_demand[s] = std::max(max_demand[s & (s - 1)], dest[static_cast<size_t>(i)].second);
  }

  for (int i = 0; i < k; ++i) dp[1u << i][static_cast<size_t>(dest[static_cast<size_t>(i)].first)] = 0.0;

  using QE = std::pair<double, NodeId>;
  for (std::uint32_t s = 1; s <= full; ++s) {
    auto& row = dp[s];
    auto& prow = pred[s];
    if (std::popcount(s) >= 2) {
      // Merge: partitions must contain the lowest terminal on one side.
      const std::uint32_t low = s & (~s + 1);
      for (std::uint32_t s1 = (s - 1) & s; s1; s1 = (s1 - 1) & s) {
        if (!(s1 & low)) continue;
        const auto& a = dp[s1];
        const auto& b = dp[s ^ s1];
        for (int v = 0; v < n; ++v) {
          double cand = a[static_cast<size_t>(v)] + b[static_cast<size_t>(v)];
          if (cand < row[static_cast<size_t>(v)]) {
            row[static_cast<size_t>(v)] = cand;
            prow[static_cast<size_t>(v)] = {Pred::Merge, -1, s1};
          }
        }
      }
    }
    // Grow: Dijkstra relaxation with per-edge multiplier max_demand[s].
    const double w = max_demand[s];
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    for (int v = 0; v < n; ++v)
      if (row[static_cast<size_t>(v)] < kInf) pq.push({row[static_cast<size_t>(v)], v});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > row[static_cast<size_t>(u)]) continue;
      for (const auto& [v, c] : g.neighbors(u)) {
        double cand = d + c * w;
        if (cand < row[static_cast<size_t>(v)]) {
          row[static_cast<size_t>(v)] = cand;
          prow[static_cast<size_t>(v)] = {Pred::Grow, u, 0};
          pq.push({cand, v});
        }
      }
    }
  }

  if (dp[full][static_cast<size_t>(instance.source)] >= kInf) {
    for (int i = 0; i < k; ++i)
      if (dp[1u << i][static_cast<size_t>(instance.source)] >= kInf)
        throw InfeasibleError("terminal " + std::to_string(dest[static_cast<size_t>(i)].first) +
                              " unreachable from source");
    throw InfeasibleError("no feasible multicast tree exists");
  }

  // Reconstruct the undirected edge set.
  std::set<std::pair<NodeId, NodeId>> edge_set;
  std::function<void(std::uint32_t, NodeId)> rebuild = [&](std::uint32_t s, NodeId v) {
    while (true) {
      const Pred& p = pred[s][static_cast<size_t>(v)];
      if (p.kind == Pred::Grow) {
        edge_set.insert({std::min(v, p.from), std::max(v, p.from)});
        v = p.from;
      } else if (p.kind == Pred::Merge) {
        rebuild(p.split, v);
        rebuild(s ^ p.split, v);
        return;
      } else {
        return;
      }
    }
  };
  rebuild(full, instance.source);

  // Orient from source; drop any relay leaves left by degenerate ties.
  std::map<NodeId, std::vector<NodeId>> adj;
  for (auto [u, v] : edge_set) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  MulticastTree tree;
  tree.root = instance.source;
  std::vector<NodeId> stack{instance.source};
  std::set<NodeId> seen{instance.source};
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : adj[u])
      if (seen.insert(v).second) {
        tree.parent[v] = u;
        stack.push_back(v);
      }
  }
  bool pruned = true;
  while (pruned) {
    pruned = false;
    auto fwd = tree.children();
    for (auto it = tree.parent.begin(); it != tree.parent.end();) {
      NodeId v = it->first;
      if (fwd.find(v) == fwd.end() && !instance.demands.has(v)) {
        it = tree.parent.erase(it);
        pruned = true;
      } else {
        ++it;
      }
    }
  }

  sol.tree = std::move(tree);
  sol.cost = tree_cost(g, sol.tree, instance.demands);
  sol.flows = compute_flows(sol.tree, instance.demands);
  sol.runtime_seconds = seconds_since(t0);
  return sol;
}

}  // namespace mcr
