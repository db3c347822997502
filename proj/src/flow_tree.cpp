#include "mcr/flow_tree.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mcr {

std::vector<NodeId> MulticastTree::nodes() const {
  std::set<NodeId> s{root};
  for (const auto& [c, p] : parent) {
    s.insert(c);
    s.insert(p);
  }
  return {s.begin(), s.end()};
}

std::map<NodeId, std::vector<NodeId>> MulticastTree::children() const {
  std::map<NodeId, std::vector<NodeId>> fwd;
  for (const auto& [c, p] : parent) fwd[p].push_back(c);
  return fwd;
}

double FlowAssignment::at(NodeId parent, NodeId child) const {
  auto it = flows.find({parent, child});
  return it == flows.end() ? 0.0 : it->second;
}

namespace {

// Checks the parent map reaches the root without cycles; returns false on
// structural breakage instead of throwing so validate() can report it.
bool check_rooted(const MulticastTree& tree) {
  for (const auto& [start, p0] : tree.parent) {
    NodeId v = start;
    size_t hops = 0;
    while (v != tree.root) {
      auto it = tree.parent.find(v);
      if (it == tree.parent.end()) return false;
      v = it->second;
      if (++hops > tree.parent.size()) return false;  // cycle
    }
  }
  return true;
}

// Max downstream demand per node, computed bottom-up.
std::map<NodeId, double> subtree_max_demand(const MulticastTree& tree,
                                            const DemandVector& demands) {
  auto fwd = tree.children();
  std::map<NodeId, double> down;
  std::function<double(NodeId)> dfs = [&](NodeId v) -> double {
    double m = demands.demand_of(v);
    auto it = fwd.find(v);
    if (it != fwd.end())
      for (NodeId c : it->second) m = std::max(m, dfs(c));
    down[v] = m;
    return m;
  };
  dfs(tree.root);
  return down;
}

}  // namespace

FlowAssignment compute_flows(const MulticastTree& tree, const DemandVector& demands) {
  if (!check_rooted(tree)) throw TreeError("parent map is not a rooted tree");
  std::vector<NodeId> missing;
  for (const auto& [d, x] : demands.entries)
    if (!tree.contains(d)) missing.push_back(d);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "destinations missing from tree:";
    for (NodeId v : missing) msg << " " << v;
    throw TreeError(msg.str());
  }
  auto down = subtree_max_demand(tree, demands);
  FlowAssignment fa;
  for (const auto& [c, p] : tree.parent) {
    double f = down.at(c);
    if (f <= 0.0)
      throw TreeError("tree edge with no downstream destination at node " +
                      std::to_string(c));
    fa.flows[{p, c}] = f;
  }
  return fa;
}

double tree_cost(const NetworkGraph& graph, const MulticastTree& tree,
                 const DemandVector& demands) {
  if (demands.entries.empty()) {
    if (!tree.parent.empty()) throw TreeError("nonempty tree with no demands");
    return 0.0;
  }
  FlowAssignment fa = compute_flows(tree, demands);
  double total = 0.0;
  for (const auto& [edge, flow] : fa.flows) {
    auto cost = graph.edge_cost(edge.first, edge.second);
    if (!cost)
      throw TreeError("tree edge (" + std::to_string(edge.first) + "," +
                      std::to_string(edge.second) + ") absent from graph");
    total += *cost * flow;
  }
  return total;
}

double level_decomposition_cost(const NetworkGraph& graph, const MulticastTree& tree,
                                const DemandVector& demands) {
  if (demands.entries.empty()) {
    if (!tree.parent.empty()) throw TreeError("nonempty tree with no demands");
    return 0.0;
  }
  if (!check_rooted(tree)) throw TreeError("parent map is not a rooted tree");
  std::vector<double> levels;
  for (const auto& [d, x] : demands.entries) levels.push_back(x);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  auto down = subtree_max_demand(tree, demands);
  // Edge (p,c) belongs to the level-l subtree iff some destination of
  // demand >= l lies under c, i.e. the downstream max reaches l. Increments
  // accumulate per edge (the demand levels are dyadic, so the telescoping
  // sum reproduces the downstream maximum without rounding).
  std::map<std::pair<NodeId, NodeId>, double> weight;
  double prev = 0.0;
  for (double level : levels) {
    for (const auto& [c, p] : tree.parent)
      if (down.at(c) >= level) weight[{p, c}] += level - prev;
    prev = level;
  }
  double total = 0.0;
  for (const auto& [edge, w] : weight) {
    auto cost = graph.edge_cost(edge.first, edge.second);
    if (!cost) throw TreeError("tree edge absent from graph");
    total += *cost * w;
  }
  return total;
}

ValidationReport validate(const NetworkGraph& graph, const MulticastTree& tree,
                          NodeId source, const DemandVector& demands) {
  ValidationReport r;
  auto flag = [&](bool& field, const std::string& msg) {
    field = false;
    r.violations.push_back(msg);
  };

  if (tree.root != source) flag(r.is_rooted_connected, "tree root is not the source");
  if (!check_rooted(tree)) {
    flag(r.is_tree, "parent map has a cycle or dangling parent");
    return r;
  }
  for (const auto& [c, p] : tree.parent) {
    if (!graph.has_edge(c, p))
      flag(r.is_tree, "tree edge (" + std::to_string(c) + "," + std::to_string(p) +
                          ") absent from graph");
  }
  auto fwd = tree.children();
  for (NodeId v : tree.nodes()) {
    bool leaf = v != tree.root && fwd.find(v) == fwd.end();
    if (leaf && !demands.has(v))
      flag(r.leaves_are_destinations, "leaf " + std::to_string(v) + " is not a destination");
  }
  for (const auto& [d, x] : demands.entries)
    if (!tree.contains(d))
      flag(r.is_rooted_connected, "destination " + std::to_string(d) + " not in tree");
  if (!r.is_rooted_connected || !r.is_tree) return r;

  FlowAssignment fa;
  try {
    fa = compute_flows(tree, demands);
  } catch (const TreeError& e) {
    flag(r.conservation_holds, e.what());
    return r;
  }
  ValidationReport rf = validate_flows(graph, tree, source, demands, fa);
  rf.is_tree = r.is_tree && rf.is_tree;
  rf.is_rooted_connected = r.is_rooted_connected && rf.is_rooted_connected;
  rf.leaves_are_destinations =
      r.leaves_are_destinations && rf.leaves_are_destinations;
  rf.violations.insert(rf.violations.end(), r.violations.begin(), r.violations.end());
  return rf;
}

ValidationReport validate_flows(const NetworkGraph& graph, const MulticastTree& tree,
                                NodeId source, const DemandVector& demands,
                                const FlowAssignment& flows) {
  ValidationReport r;
  auto flag = [&](bool& field, const std::string& msg) {
    field = false;
    r.violations.push_back(msg);
  };
  constexpr double kEps = 1e-12;

  for (const auto& [edge, f] : flows.flows) {
    if (f <= 0.0) flag(r.conservation_holds, "non-positive flow on a tree edge");
    if (tree.parent.find(edge.second) == tree.parent.end() ||
        tree.parent.at(edge.second) != edge.first)
      flag(r.is_tree, "flow on a non-tree edge");
  }
  // Per-node conservation: max outflow <= max inflow for non-source nodes.
  for (NodeId v : tree.nodes()) {
    if (v == source) continue;
    double in = 0.0, out = 0.0;
    for (const auto& [edge, f] : flows.flows) {
      if (edge.second == v) in = std::max(in, f);
      if (edge.first == v) out = std::max(out, f);
    }
    if (out > in + kEps)
      flag(r.conservation_holds,
           "node " + std::to_string(v) + " outflow exceeds inflow");
  }
  for (const auto& [d, x] : demands.entries) {
    double in = 0.0;
    for (const auto& [edge, f] : flows.flows)
      if (edge.second == d) in = std::max(in, f);
    if (in + kEps < x)
      flag(r.demands_satisfied,
           "destination " + std::to_string(d) + " inflow below demand");
  }
  return r;
}

MulticastTree merge_path(const MulticastTree& tree, const std::vector<NodeId>& path) {
  if (path.size() < 2) throw TreeError("merge path needs at least two nodes");
  if (tree.contains(path.front()))
    throw TreeError("merge path must start at a node not yet in the tree");
  if (!tree.contains(path.back()))
    throw TreeError("merge path must end at a tree node");
  for (size_t i = 1; i + 1 < path.size(); ++i)
    if (tree.contains(path[i]))
      throw TreeError("merge path touches the tree before its last node");
  std::set<NodeId> seen(path.begin(), path.end());
  if (seen.size() != path.size()) throw TreeError("merge path repeats a node");

  MulticastTree out = tree;
  // Orient toward the attachment point: successor along the path is parent.
  for (size_t i = 0; i + 1 < path.size(); ++i) out.parent[path[i]] = path[i + 1];
  return out;
}

std::string serialize_tree(const MulticastTree& tree) {
  nlohmann::ordered_json j;
  j["root"] = tree.root;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [c, p] : tree.parent) edges.push_back({c, p});
  j["edges"] = std::move(edges);
  return j.dump(2) + "\n";
}

MulticastTree parse_tree(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw TreeError(std::string("malformed tree document: ") + e.what());
  }
  if (!j.contains("root")) throw TreeError("missing field: root");
  if (!j.contains("edges")) throw TreeError("missing field: edges");
  MulticastTree t;
  t.root = j["root"].get<NodeId>();
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2) throw TreeError("malformed edge entry");
    t.parent[e[0].get<NodeId>()] = e[1].get<NodeId>();
  }
  if (!check_rooted(t)) throw TreeError("parsed parent map is not a rooted tree");
  return t;
}

}  // namespace mcr
