#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcr {

using NodeId = int;

/// Cost charged on every virtual-hub edge.
inline constexpr double kHubEdgeCost = 10.0;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double cost = 0.0;

  bool operator==(const Edge&) const = default;
};

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Undirected weighted network. Nodes are dense integers 0..n-1.
/// An optional virtual hub node is adjacent to every other node.
class NetworkGraph {
 public:
  NetworkGraph() = default;
  static NetworkGraph from_edges(int node_count, std::vector<Edge> edges,
                                 std::optional<NodeId> hub = std::nullopt);

  int node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::pair<NodeId, double>>& neighbors(NodeId v) const {
    return adj_.at(static_cast<size_t>(v));
  }
  int degree(NodeId v) const { return static_cast<int>(neighbors(v).size()); }
  std::optional<double> edge_cost(NodeId u, NodeId v) const;
  bool has_edge(NodeId u, NodeId v) const { return edge_cost(u, v).has_value(); }

  bool has_virtual_hub() const { return hub_.has_value(); }
  std::optional<NodeId> hub_id() const { return hub_; }

  bool operator==(const NetworkGraph&) const = default;

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;  // canonical: u < v, sorted lexicographically
  std::vector<std::vector<std::pair<NodeId, double>>> adj_;
  std::optional<NodeId> hub_;
};

/// Per-destination demand levels; destinations distinct and never the source.
struct DemandVector {
  std::vector<std::pair<NodeId, double>> entries;  // (destination, demand)

  bool has(NodeId v) const;
  double demand_of(NodeId v) const;  // 0 for non-destinations
  std::vector<NodeId> destinations() const;
  double max_demand() const;
  size_t size() const { return entries.size(); }

  bool operator==(const DemandVector&) const = default;
};

struct ProblemInstance {
  NetworkGraph graph;
  NodeId source = 0;
  DemandVector demands;
  std::uint64_t seed = 0;

  bool operator==(const ProblemInstance&) const = default;
};

enum class Topology { RandomRegular, ErdosRenyi, AverageDegree };

struct GenConfig {
  Topology topology = Topology::RandomRegular;
  int degree = 4;            // RandomRegular
  double edge_prob = 0.1;    // ErdosRenyi
  double avg_degree = 4.0;   // AverageDegree (ER with p = d/(n-1))
  int node_count = 30;
  int user_count = 12;
  std::vector<double> explicit_demands;  // empty = thirds rule
  std::uint64_t seed = 0;
};

/// Demand thirds rule: user i gets 1.0 / 0.5 / 0.25 by position.
std::vector<double> assign_demands(int user_count);

/// Deterministic generation for a fixed config. Source is node 0.
ProblemInstance generate_instance(const GenConfig& config);

/// Adds a node adjacent to everything; hub edges carry kHubEdgeCost.
ProblemInstance attach_virtual_hub(const ProblemInstance& instance);

std::string serialize_instance(const ProblemInstance& instance);
ProblemInstance parse_instance(const std::string& text);

/// True if every destination is reachable from the source.
bool all_destinations_reachable(const ProblemInstance& instance);

}  // namespace mcr
