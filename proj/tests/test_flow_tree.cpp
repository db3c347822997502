#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mcr/flow_tree.hpp"

using namespace mcr;

namespace {

// The worked example's shape: s=0, a=1, b=2, u1=3, u2=4, u3=5 with
// s-a, a-u1, a-u2, s-b, b-u3. Demands x(u1)=4, x(u2)=2, x(u3)=1.
struct Example {
  NetworkGraph graph = NetworkGraph::from_edges(
      6, {{0, 1, 2.0}, {1, 3, 2.0}, {1, 4, 1.0}, {0, 2, 2.0}, {2, 5, 1.0}});
  MulticastTree tree{0, {{1, 0}, {3, 1}, {4, 1}, {2, 0}, {5, 2}}};
  DemandVector demands{{{3, 4.0}, {4, 2.0}, {5, 1.0}}};
};

}  // namespace

TEST_CASE("flows equal the maximum downstream demand") {
  Example ex;
  FlowAssignment flows = compute_flows(ex.tree, ex.demands);
  CHECK(flows.at(0, 1) == 4.0);
  CHECK(flows.at(1, 3) == 4.0);
  CHECK(flows.at(1, 4) == 2.0);
  CHECK(flows.at(0, 2) == 1.0);
  CHECK(flows.at(2, 5) == 1.0);
  CHECK(flows.flows.size() == 5);
}

TEST_CASE("single edge and chain flows") {
  NetworkGraph g = NetworkGraph::from_edges(2, {{0, 1, 3.0}});
  MulticastTree t{0, {{1, 0}}};
  DemandVector d{{{1, 0.75}}};
  CHECK(compute_flows(t, d).at(0, 1) == 0.75);

  NetworkGraph chain = NetworkGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  MulticastTree ct{0, {{1, 0}, {2, 1}, {3, 2}}};
  DemandVector cd{{{3, 0.5}}};
  FlowAssignment cf = compute_flows(ct, cd);
  CHECK(cf.at(0, 1) == 0.5);
  CHECK(cf.at(1, 2) == 0.5);
  CHECK(cf.at(2, 3) == 0.5);
}

TEST_CASE("missing destination is reported") {
  MulticastTree t{0, {{1, 0}}};
  DemandVector d{{{1, 1.0}, {5, 0.5}}};
  CHECK_THROWS_WITH_AS(compute_flows(t, d), "destinations missing from tree: 5",
                       TreeError);
}

TEST_CASE("tree cost on the worked example") {
  Example ex;
  CHECK(tree_cost(ex.graph, ex.tree, ex.demands) == doctest::Approx(21.0));

  NetworkGraph unit = NetworkGraph::from_edges(
      6, {{0, 1, 1.0}, {1, 3, 1.0}, {1, 4, 1.0}, {0, 2, 1.0}, {2, 5, 1.0}});
  CHECK(tree_cost(unit, ex.tree, ex.demands) == doctest::Approx(12.0));
}

TEST_CASE("empty demand set costs zero on the empty tree") {
  NetworkGraph g = NetworkGraph::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  MulticastTree t{0, {}};
  DemandVector d;
  CHECK(tree_cost(g, t, d) == 0.0);
}

TEST_CASE("tree edge absent from graph is an error") {
  NetworkGraph g = NetworkGraph::from_edges(3, {{0, 1, 1.0}});
  MulticastTree t{0, {{2, 0}}};
  DemandVector d{{{2, 1.0}}};
  CHECK_THROWS_AS(tree_cost(g, t, d), TreeError);
}

TEST_CASE("level decomposition equals tree cost on the worked example") {
  Example ex;
  // (1-0)*(2+2+1+2+1) + (2-1)*(2+2+1) + (4-2)*(2+2) = 8+5+8 = 21
  CHECK(level_decomposition_cost(ex.graph, ex.tree, ex.demands) ==
        doctest::Approx(21.0));
}

TEST_CASE("level decomposition special cases") {
  NetworkGraph g = NetworkGraph::from_edges(3, {{0, 1, 0.3}, {1, 2, 0.6}});
  MulticastTree t{0, {{1, 0}, {2, 1}}};
  SUBCASE("uniform demands: demand times total edge cost") {
    DemandVector d{{{1, 0.5}, {2, 0.5}}};
    CHECK(level_decomposition_cost(g, t, d) == doctest::Approx(0.5 * 0.9));
  }
  SUBCASE("single destination: demand times path cost") {
    DemandVector d{{{2, 0.25}}};
    CHECK(level_decomposition_cost(g, t, d) == doctest::Approx(0.25 * 0.9));
  }
}

TEST_CASE("tree cost equals level decomposition exactly on random trees") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> cost_dist(0.1, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 10);
    // random recursive tree rooted at 0 over a graph that contains it
    std::vector<Edge> edges;
    MulticastTree tree{0, {}};
    for (NodeId v = 1; v < n; ++v) {
      NodeId parent = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(v));
      edges.push_back({parent, v, cost_dist(rng)});
      tree.parent[v] = parent;
    }
    NetworkGraph g = NetworkGraph::from_edges(n, edges);
    DemandVector demands;
    const double levels[] = {1.0, 0.5, 0.25};
    for (NodeId v = 1; v < n; ++v) {
      // leaves must be destinations; interior nodes join at random
      bool is_leaf = true;
      for (const auto& [child, parent] : tree.parent)
        if (parent == v) is_leaf = false;
      if (is_leaf || rng() % 2 == 0)
        demands.entries.emplace_back(v, levels[rng() % 3]);
    }
    if (demands.entries.empty()) continue;
    CHECK(tree_cost(g, tree, demands) ==
          level_decomposition_cost(g, tree, demands));
  }
}

TEST_CASE("validate accepts the worked example and flags violations") {
  Example ex;
  ValidationReport ok = validate(ex.graph, ex.tree, 0, ex.demands);
  CHECK(ok.ok());
  CHECK(ok.violations.empty());

  SUBCASE("relay leaf") {
    MulticastTree bad = ex.tree;
    bad.parent[2] = 0;  // keep 2 but drop its child
    bad.parent.erase(5);
    DemandVector d{{{3, 4.0}, {4, 2.0}}};
    ValidationReport r = validate(ex.graph, bad, 0, d);
    CHECK(!r.leaves_are_destinations);
    CHECK(!r.violations.empty());
  }
  SUBCASE("corrupted flows violate demand satisfaction") {
    FlowAssignment flows = compute_flows(ex.tree, ex.demands);
    flows.flows[{1, 3}] = 0.5;  // destination 3 demands 4
    ValidationReport r = validate_flows(ex.graph, ex.tree, 0, ex.demands, flows);
    CHECK(!r.demands_satisfied);
  }
  SUBCASE("conservation violation") {
    FlowAssignment flows = compute_flows(ex.tree, ex.demands);
    flows.flows[{0, 1}] = 1.0;  // outflow 4 at node 1 exceeds inflow 1
    ValidationReport r = validate_flows(ex.graph, ex.tree, 0, ex.demands, flows);
    CHECK(!r.conservation_holds);
  }
}

TEST_CASE("merge_path") {
  SUBCASE("first path into the bare root") {
    MulticastTree t{0, {}};
    MulticastTree merged = merge_path(t, {2, 1, 0});
    CHECK(merged.parent.at(1) == 0);
    CHECK(merged.parent.at(2) == 1);
  }
  SUBCASE("attach under an interior node") {
    MulticastTree t{0, {{1, 0}, {3, 1}}};  // s->a->u1
    MulticastTree merged = merge_path(t, {4, 1});
    CHECK(merged.parent.at(4) == 1);
    CHECK(merged.parent.size() == 3);
  }
  SUBCASE("destinations may become interior nodes") {
    MulticastTree t{0, {{1, 0}, {3, 1}}};
    MulticastTree merged = merge_path(t, {4, 3});
    CHECK(merged.parent.at(4) == 3);
  }
  SUBCASE("path touching the tree early is rejected") {
    MulticastTree t{0, {{1, 0}, {3, 1}}};
    CHECK_THROWS_AS(merge_path(t, {4, 1, 0}), TreeError);
  }
}

TEST_CASE("adding a path never decreases cost") {
  NetworkGraph g = NetworkGraph::from_edges(
      5, {{0, 1, 0.4}, {1, 2, 0.3}, {0, 3, 0.9}, {3, 4, 0.2}, {1, 4, 0.6}});
  MulticastTree t{0, {{1, 0}, {2, 1}}};
  DemandVector d{{{2, 1.0}}};
  double before = tree_cost(g, t, d);
  MulticastTree merged = merge_path(t, {4, 1});
  DemandVector d2{{{2, 1.0}, {4, 0.5}}};
  CHECK(tree_cost(g, merged, d2) >= before);
}

TEST_CASE("tree serialization round-trip") {
  Example ex;
  MulticastTree parsed = parse_tree(serialize_tree(ex.tree));
  CHECK(parsed.root == ex.tree.root);
  CHECK(parsed.parent == ex.tree.parent);
}
