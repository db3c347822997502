#include "mcr/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>

namespace mcr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shortest-path tree from the source; parent[v] = next hop toward source.
std::vector<NodeId> shortest_path_tree(const NetworkGraph& g, NodeId source) {
  const int n = g.node_count();
  std::vector<double> dist(static_cast<size_t>(n), kInf);
  std::vector<NodeId> parent(static_cast<size_t>(n), -1);
  using QE = std::pair<double, NodeId>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  dist[static_cast<size_t>(source)] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<size_t>(u)]) continue;
    for (const auto& [v, c] : g.neighbors(u)) {
      double cand = d + c;
      if (cand < dist[static_cast<size_t>(v)]) {
        dist[static_cast<size_t>(v)] = cand;
        parent[static_cast<size_t>(v)] = u;
        pq.push({cand, v});
      }
    }
  }
  for (int v = 0; v < n; ++v)
    if (v != source && dist[static_cast<size_t>(v)] >= kInf) parent[static_cast<size_t>(v)] = -1;
  return parent;
}

}  // namespace

Solution dijkstra_reuse(const ProblemInstance& instance) {
  const auto t0 = Clock::now();
  auto parent = shortest_path_tree(instance.graph, instance.source);

  Solution sol;
  sol.solver_tag = "dijkstra";
  sol.tree.root = instance.source;
  for (const auto& [d, x] : instance.demands.entries) {
    NodeId v = d;
    while (v != instance.source) {
      NodeId p = parent[static_cast<size_t>(v)];
      if (p < 0)
        throw InfeasibleError("destination " + std::to_string(d) +
                              " unreachable from source");
      sol.tree.parent[v] = p;
      v = p;
    }
  }
  // Each overlaid edge is charged once, at the max demand routed over it.
  sol.cost = tree_cost(instance.graph, sol.tree, instance.demands);
  sol.flows = compute_flows(sol.tree, instance.demands);
  sol.runtime_seconds = seconds_since(t0);
  return sol;
}

Solution attach_in_order(const ProblemInstance& instance,
                         const std::vector<NodeId>& order,
                         const MulticastTree& base) {
  const auto& g = instance.graph;
  const int n = g.node_count();
  MulticastTree tree = base;
  DemandVector routed;  // demands of users already attached, for flows
  for (const auto& [d, x] : instance.demands.entries)
    if (base.contains(d)) routed.entries.emplace_back(d, x);

  for (NodeId user : order) {
    if (tree.contains(user)) {
      if (!routed.has(user))
        routed.entries.emplace_back(user, instance.demands.demand_of(user));
      continue;
    }
    const double xk = instance.demands.demand_of(user);
    FlowAssignment flows =
        routed.entries.empty() ? FlowAssignment{} : compute_flows(tree, routed);
    auto edge_weight = [&](NodeId u, NodeId v, double cost) {
      double f = std::max(flows.at(u, v), flows.at(v, u));
      return cost * std::max(0.0, xk - f);
    };
    // Dijkstra from the user; tree nodes are targets and never expanded,
    // so the path touches the tree only at its final node.
    std::vector<double> dist(static_cast<size_t>(n), kInf);
    std::vector<NodeId> prev(static_cast<size_t>(n), -1);
    using QE = std::pair<double, NodeId>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    dist[static_cast<size_t>(user)] = 0.0;
    pq.push({0.0, user});
    NodeId attach = -1;
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[static_cast<size_t>(u)]) continue;
      if (tree.contains(u)) {
        attach = u;
        break;
      }
      for (const auto& [v, c] : g.neighbors(u)) {
        double cand = d + edge_weight(u, v, c);
        if (cand < dist[static_cast<size_t>(v)]) {
          dist[static_cast<size_t>(v)] = cand;
          prev[static_cast<size_t>(v)] = u;
          pq.push({cand, v});
        }
      }
    }
    if (attach < 0)
      throw InfeasibleError("destination " + std::to_string(user) +
                            " unreachable from the tree");
    std::vector<NodeId> path;
    for (NodeId v = attach; v != -1; v = prev[static_cast<size_t>(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());  // user ... attach
    tree = merge_path(tree, path);
    routed.entries.emplace_back(user, xk);
  }

  Solution sol;
  sol.tree = std::move(tree);
  sol.cost = tree_cost(g, sol.tree, instance.demands);
  sol.flows = compute_flows(sol.tree, instance.demands);
  return sol;
}

namespace {

std::vector<NodeId> descending_demand_order(const DemandVector& demands) {
  std::vector<std::pair<NodeId, double>> entries = demands.entries;
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<NodeId> order;
  for (const auto& [d, x] : entries) order.push_back(d);
  return order;
}

}  // namespace

Solution sequential_greedy(const ProblemInstance& instance) {
  const auto t0 = Clock::now();
  MulticastTree base;
  base.root = instance.source;
  Solution sol = attach_in_order(instance, descending_demand_order(instance.demands), base);
  sol.solver_tag = "greedy";
  sol.runtime_seconds = seconds_since(t0);
  return sol;
}

namespace {

double fitness(const ProblemInstance& instance, const std::vector<NodeId>& order) {
  MulticastTree base;
  base.root = instance.source;
  return attach_in_order(instance, order, base).cost;
}

// OX1 order crossover.
std::vector<NodeId> order_crossover(const std::vector<NodeId>& a,
                                    const std::vector<NodeId>& b,
                                    std::mt19937_64& rng) {
  const size_t k = a.size();
  if (k < 2) return a;
  std::uniform_int_distribution<size_t> pick(0, k - 1);
  size_t lo = pick(rng), hi = pick(rng);
  if (lo > hi) std::swap(lo, hi);
  std::vector<NodeId> child(k, -1);
  std::set<NodeId> used;
  for (size_t i = lo; i <= hi; ++i) {
    child[i] = a[i];
    used.insert(a[i]);
  }
  size_t j = 0;
  for (size_t i = 0; i < k; ++i) {
    if (child[i] != -1) continue;
    while (used.count(b[j])) ++j;
    child[i] = b[j++];
  }
  return child;
}

}  // namespace

Solution genetic_algorithm(const ProblemInstance& instance, const GaConfig& config) {
  const auto t0 = Clock::now();
  if (config.population < 2) throw SolverError("GA population must be >= 2");
  std::mt19937_64 rng(config.seed);
  std::vector<NodeId> ref = instance.demands.destinations();
  const size_t k = ref.size();

  std::vector<std::vector<NodeId>> pop;
  std::vector<double> fit;
  pop.reserve(static_cast<size_t>(config.population));
  for (int i = 0; i < config.population; ++i) {
    auto perm = ref;
    std::shuffle(perm.begin(), perm.end(), rng);
    fit.push_back(fitness(instance, perm));
    pop.push_back(std::move(perm));
  }

  auto best_idx = [&] {
    return static_cast<size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
  };
  std::vector<NodeId> best_order = pop[best_idx()];
  double best_cost = fit[best_idx()];

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<size_t> pick_member(0, pop.size() - 1);
  auto tournament = [&]() -> const std::vector<NodeId>& {
    size_t winner = pick_member(rng);
    for (int t = 1; t < config.tournament_size; ++t) {
      size_t c = pick_member(rng);
      if (fit[c] < fit[winner]) winner = c;
    }
    return pop[winner];
  };

  for (int gen = 0; gen < config.generations; ++gen) {
    std::vector<std::vector<NodeId>> next;
    next.push_back(best_order);  // elitism of 1
    while (next.size() < pop.size()) {
      auto child = tournament();
      std::vector<NodeId> offspring =
          coin(rng) < config.crossover_rate ? order_crossover(child, tournament(), rng)
                                            : child;
      if (k >= 2 && coin(rng) < config.mutation_rate) {
        std::uniform_int_distribution<size_t> pos(0, k - 1);
        std::swap(offspring[pos(rng)], offspring[pos(rng)]);
      }
      next.push_back(std::move(offspring));
    }
    pop = std::move(next);
    for (size_t i = 0; i < pop.size(); ++i) {
      fit[i] = fitness(instance, pop[i]);
      if (fit[i] < best_cost) {
        best_cost = fit[i];
        best_order = pop[i];
      }
    }
  }

  MulticastTree base;
  base.root = instance.source;
  Solution sol = attach_in_order(instance, best_order, base);
  sol.solver_tag = "ga";
  sol.runtime_seconds = seconds_since(t0);
  return sol;
}

Solution bee_colony(const ProblemInstance& instance, const BcoConfig& config) {
  const auto t0 = Clock::now();
  if (config.colony_size < 2) throw SolverError("BCO colony must be >= 2");
  if (config.employed_fraction <= 0.0 || config.employed_fraction >= 1.0)
    throw SolverError("BCO employed fraction must be in (0,1)");
  std::mt19937_64 rng(config.seed);
  std::vector<NodeId> ref = instance.demands.destinations();
  const size_t k = ref.size();
  const int employed =
      std::max(1, static_cast<int>(config.colony_size * config.employed_fraction));
  const int onlookers = config.colony_size - employed;

  std::vector<std::vector<NodeId>> food;
  std::vector<double> cost;
  std::vector<int> trials(static_cast<size_t>(employed), 0);
  for (int i = 0; i < employed; ++i) {
    auto perm = ref;
    std::shuffle(perm.begin(), perm.end(), rng);
    cost.push_back(fitness(instance, perm));
    food.push_back(std::move(perm));
  }
  size_t bi = static_cast<size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  std::vector<NodeId> best_order = food[bi];
  double best_cost = cost[bi];

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  auto neighbor = [&](const std::vector<NodeId>& s) {
    auto out = s;
    if (k < 2) return out;
    std::uniform_int_distribution<size_t> pos(0, k - 1);
    if (coin(rng) < 0.5) {
      std::swap(out[pos(rng)], out[pos(rng)]);
    } else {
      size_t from = pos(rng), to = pos(rng);
      NodeId v = out[from];
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(from));
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(to > from ? to - 1 : to), v);
    }
    return out;
  };
  auto try_improve = [&](size_t i) {
    auto cand = neighbor(food[i]);
    double c = fitness(instance, cand);
    if (c < cost[i]) {
      cost[i] = c;
      food[i] = std::move(cand);
      trials[i] = 0;
      if (c < best_cost) {
        best_cost = c;
        best_order = food[i];
      }
    } else {
      ++trials[i];
    }
  };

  for (int it = 0; it < config.iterations; ++it) {
    for (int i = 0; i < employed; ++i) try_improve(static_cast<size_t>(i));
    // Onlookers sample sources with probability proportional to 1/cost.
    double total = 0.0;
    for (double c : cost) total += 1.0 / c;
    for (int o = 0; o < onlookers; ++o) {
      double r = coin(rng) * total;
      size_t chosen = 0;
      for (size_t i = 0; i < cost.size(); ++i) {
        r -= 1.0 / cost[i];
        if (r <= 0) {
          chosen = i;
          break;
        }
      }
      try_improve(chosen);
    }
    for (int i = 0; i < employed; ++i) {
      if (trials[static_cast<size_t>(i)] > config.scout_limit) {
        auto perm = ref;
        std::shuffle(perm.begin(), perm.end(), rng);
        cost[static_cast<size_t>(i)] = fitness(instance, perm);
        food[static_cast<size_t>(i)] = std::move(perm);
        trials[static_cast<size_t>(i)] = 0;
        if (cost[static_cast<size_t>(i)] < best_cost) {
          best_cost = cost[static_cast<size_t>(i)];
          best_order = food[static_cast<size_t>(i)];
        }
      }
    }
  }

  MulticastTree base;
  base.root = instance.source;
  Solution sol = attach_in_order(instance, best_order, base);
  sol.solver_tag = "bco";
  sol.runtime_seconds = seconds_since(t0);
  return sol;
}

}  // namespace mcr
