#include "mcr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mcr {

NetworkGraph NetworkGraph::from_edges(int node_count, std::vector<Edge> edges,
                                      std::optional<NodeId> hub) {
  if (node_count <= 0) throw InstanceError("node_count must be positive");
  for (auto& e : edges) {
    if (e.u == e.v) throw InstanceError("self-loop on node " + std::to_string(e.u));
    if (e.u < 0 || e.v < 0 || e.u >= node_count || e.v >= node_count)
      throw InstanceError("edge endpoint out of range");
    if (e.cost < 0) throw InstanceError("negative edge cost");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  });
  for (size_t i = 1; i < edges.size(); ++i)
    if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v)
      throw InstanceError("duplicate edge (" + std::to_string(edges[i].u) + "," +
                          std::to_string(edges[i].v) + ")");

  NetworkGraph g;
  g.node_count_ = node_count;
  g.edges_ = std::move(edges);
  g.hub_ = hub;
  g.adj_.assign(static_cast<size_t>(node_count), {});
  for (const auto& e : g.edges_) {
    g.adj_[static_cast<size_t>(e.u)].emplace_back(e.v, e.cost);
    g.adj_[static_cast<size_t>(e.v)].emplace_back(e.u, e.cost);
  }
  if (hub) {
    if (*hub < 0 || *hub >= node_count) throw InstanceError("hub id out of range");
    if (g.degree(*hub) != node_count - 1)
      throw InstanceError("hub node is not adjacent to every other node");
  }
  return g;
}

std::optional<double> NetworkGraph::edge_cost(NodeId u, NodeId v) const {
  if (u < 0 || u >= node_count_ || v < 0 || v >= node_count_) return std::nullopt;
  for (const auto& [w, c] : adj_[static_cast<size_t>(u)])
    if (w == v) return c;
  return std::nullopt;
}

bool DemandVector::has(NodeId v) const {
  for (const auto& [d, x] : entries)
    if (d == v) return true;
  return false;
}

double DemandVector::demand_of(NodeId v) const {
  for (const auto& [d, x] : entries)
    if (d == v) return x;
  return 0.0;
}

std::vector<NodeId> DemandVector::destinations() const {
  std::vector<NodeId> out;
  out.reserve(entries.size());
  for (const auto& [d, x] : entries) out.push_back(d);
  return out;
}

double DemandVector::max_demand() const {
  double m = 0.0;
  for (const auto& [d, x] : entries) m = std::max(m, x);
  return m;
}

std::vector<double> assign_demands(int user_count) {
  if (user_count < 1) throw InstanceError("user_count must be >= 1");
  const int k = user_count;
  const int first = (k + 2) / 3;       // ceil(K/3)
  const int second = (2 * k + 2) / 3;  // ceil(2K/3)
  std::vector<double> out(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i)
    out[static_cast<size_t>(i)] = i < first ? 1.0 : (i < second ? 0.5 : 0.25);
  return out;
}

namespace {

std::vector<Edge> make_erdos_renyi(int n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng) < p) edges.push_back({u, v, 0.0});
  return edges;
}

// Pairing model: d stubs per node, random perfect matching, reject
// self-loops and multi-edges.
std::vector<Edge> make_random_regular(int n, int d, std::mt19937_64& rng) {
  if ((static_cast<long long>(n) * d) % 2 != 0)
    throw InstanceError("random-regular requires n*d even");
  if (d >= n) throw InstanceError("random-regular requires d < n");
  constexpr int kMaxRetries = 1000;
  std::vector<int> stubs(static_cast<size_t>(n) * static_cast<size_t>(d));
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) stubs[static_cast<size_t>(i * d + j)] = i;
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::set<std::pair<int, int>> seen;
    std::vector<Edge> edges;
    bool ok = true;
    for (size_t i = 0; i + 1 < stubs.size(); i += 2) {
      int u = stubs[i], v = stubs[i + 1];
      if (u == v) { ok = false; break; }
      if (u > v) std::swap(u, v);
      if (!seen.insert({u, v}).second) { ok = false; break; }
      edges.push_back({u, v, 0.0});
    }
    if (ok) return edges;
  }
  throw InstanceError("random-regular sampler failed after 1000 retries");
}

}  // namespace

ProblemInstance generate_instance(const GenConfig& config) {
  const int n = config.node_count;
  const int k = config.user_count;
  if (n < 2) throw InstanceError("node_count must be >= 2");
  if (k < 1 || k > n - 1) throw InstanceError("user_count must be in [1, n-1]");

  std::mt19937_64 rng(config.seed);
  std::vector<Edge> edges;
  switch (config.topology) {
    case Topology::RandomRegular:
      edges = make_random_regular(n, config.degree, rng);
      break;
    case Topology::ErdosRenyi:
      if (config.edge_prob <= 0.0 || config.edge_prob > 1.0)
        throw InstanceError("edge probability must be in (0,1]");
      edges = make_erdos_renyi(n, config.edge_prob, rng);
      break;
    case Topology::AverageDegree:
      if (config.avg_degree < 2.0) throw InstanceError("average degree must be >= 2");
      edges = make_erdos_renyi(n, config.avg_degree / (n - 1), rng);
      break;
  }
  std::uniform_real_distribution<double> cost_dist(0.1, 1.0);
  for (auto& e : edges) e.cost = cost_dist(rng);

  // Destinations: uniform without replacement among non-source nodes.
  std::vector<NodeId> pool;
  for (int v = 1; v < n; ++v) pool.push_back(v);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<size_t>(k));

  std::vector<double> levels =
      config.explicit_demands.empty() ? assign_demands(k) : config.explicit_demands;
  if (static_cast<int>(levels.size()) != k)
    throw InstanceError("explicit demand list size does not match user_count");
  for (double x : levels)
    if (x <= 0) throw InstanceError("demands must be positive");

  DemandVector demands;
  for (int i = 0; i < k; ++i)
    demands.entries.emplace_back(pool[static_cast<size_t>(i)], levels[static_cast<size_t>(i)]);

  ProblemInstance inst;
  inst.graph = NetworkGraph::from_edges(n, std::move(edges));
  inst.source = 0;
  inst.demands = std::move(demands);
  inst.seed = config.seed;
  return inst;
}

ProblemInstance attach_virtual_hub(const ProblemInstance& instance) {
  if (instance.graph.has_virtual_hub())
    throw InstanceError("instance already has a virtual hub");
  const int n = instance.graph.node_count();
  std::vector<Edge> edges = instance.graph.edges();
  for (int v = 0; v < n; ++v) edges.push_back({v, n, kHubEdgeCost});
  ProblemInstance out = instance;
  out.graph = NetworkGraph::from_edges(n + 1, std::move(edges), n);
  return out;
}

std::string serialize_instance(const ProblemInstance& instance) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["n"] = instance.graph.node_count();
  j["source"] = instance.source;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : instance.graph.edges())
    edges.push_back({e.u, e.v, e.cost});
  j["edges"] = std::move(edges);
  auto demands = nlohmann::ordered_json::array();
  for (const auto& [d, x] : instance.demands.entries) demands.push_back({d, x});
  j["demands"] = std::move(demands);
  if (instance.graph.hub_id())
    j["hub"] = *instance.graph.hub_id();
  else
    j["hub"] = nullptr;
  j["seed"] = instance.seed;
  return j.dump(2) + "\n";
}

ProblemInstance parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InstanceError(std::string("malformed instance document: ") + e.what());
  }
  auto require = [&](const char* field) -> const nlohmann::json& {
    if (!j.contains(field)) throw InstanceError(std::string("missing field: ") + field);
    return j.at(field);
  };
  if (require("version").get<int>() != 1) throw InstanceError("unsupported version");
  const int n = require("n").get<int>();
  ProblemInstance inst;
  inst.source = require("source").get<NodeId>();
  std::vector<Edge> edges;
  for (const auto& e : require("edges")) {
    if (!e.is_array() || e.size() != 3) throw InstanceError("malformed edge entry");
    Edge edge{e[0].get<NodeId>(), e[1].get<NodeId>(), e[2].get<double>()};
    if (edge.cost < 0) throw InstanceError("negative edge cost");
    edges.push_back(edge);
  }
  std::optional<NodeId> hub;
  const auto& hub_field = require("hub");
  if (!hub_field.is_null()) hub = hub_field.get<NodeId>();
  inst.graph = NetworkGraph::from_edges(n, std::move(edges), hub);
  for (const auto& d : require("demands")) {
    if (!d.is_array() || d.size() != 2) throw InstanceError("malformed demand entry");
    NodeId node = d[0].get<NodeId>();
    double level = d[1].get<double>();
    if (node < 0 || node >= n) throw InstanceError("demand node out of range");
    if (node == inst.source) throw InstanceError("destination equals source");
    if (level <= 0) throw InstanceError("non-positive demand");
    if (inst.demands.has(node)) throw InstanceError("duplicate destination");
    inst.demands.entries.emplace_back(node, level);
  }
  if (inst.source < 0 || inst.source >= n) throw InstanceError("source out of range");
  inst.seed = require("seed").get<std::uint64_t>();
  return inst;
}

bool all_destinations_reachable(const ProblemInstance& instance) {
  const auto& g = instance.graph;
  std::vector<char> seen(static_cast<size_t>(g.node_count()), 0);
  std::queue<NodeId> q;
  q.push(instance.source);
  seen[static_cast<size_t>(instance.source)] = 1;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (const auto& [v, c] : g.neighbors(u))
      if (!seen[static_cast<size_t>(v)]) {
        seen[static_cast<size_t>(v)] = 1;
        q.push(v);
      }
  }
  for (const auto& [d, x] : instance.demands.entries)
    if (!seen[static_cast<size_t>(d)]) return false;
  return true;
}

}  // namespace mcr
