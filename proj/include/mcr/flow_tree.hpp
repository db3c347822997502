#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcr/graph.hpp"

namespace mcr {

class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Source-rooted oriented tree: parent map over the included nodes.
struct MulticastTree {
  NodeId root = 0;
  std::map<NodeId, NodeId> parent;  // child -> parent

  bool contains(NodeId v) const { return v == root || parent.count(v) > 0; }
  std::vector<NodeId> nodes() const;
  std::map<NodeId, std::vector<NodeId>> children() const;
  size_t edge_count() const { return parent.size(); }

  bool operator==(const MulticastTree&) const = default;
};

/// Per directed tree edge (parent -> child) flow values.
struct FlowAssignment {
  std::map<std::pair<NodeId, NodeId>, double> flows;

  double at(NodeId parent, NodeId child) const;
};

struct ValidationReport {
  bool is_tree = true;
  bool is_rooted_connected = true;
  bool leaves_are_destinations = true;
  bool demands_satisfied = true;
  bool conservation_holds = true;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Flow on edge (p -> c) = max demand over destinations in the subtree
/// under c. Edges with no downstream destination are rejected.
FlowAssignment compute_flows(const MulticastTree& tree, const DemandVector& demands);

/// Sum over tree edges of edge cost times flow.
double tree_cost(const NetworkGraph& graph, const MulticastTree& tree,
                 const DemandVector& demands);

/// Independent evaluation of the same objective: decompose demands into
/// ascending levels and charge each level increment on the subtree that
/// spans the destinations requiring at least that level.
double level_decomposition_cost(const NetworkGraph& graph, const MulticastTree& tree,
                                const DemandVector& demands);

ValidationReport validate(const NetworkGraph& graph, const MulticastTree& tree,
                          NodeId source, const DemandVector& demands);

/// Validate against an externally supplied flow assignment.
ValidationReport validate_flows(const NetworkGraph& graph, const MulticastTree& tree,
                                NodeId source, const DemandVector& demands,
                                const FlowAssignment& flows);

/// Attach a path [new_node, ..., attachment] whose last node is already in
/// the tree and whose other nodes are new.
MulticastTree merge_path(const MulticastTree& tree, const std::vector<NodeId>& path);

std::string serialize_tree(const MulticastTree& tree);
MulticastTree parse_tree(const std::string& text);

}  // namespace mcr
