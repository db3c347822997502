#include "mcr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <thread>

#include "mcr/checkpoint.hpp"

namespace mcr {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct PointSpec {
  std::string label;
  GenConfig gen;
};

std::vector<PointSpec> suite_points(SuiteKind kind) {
  std::vector<PointSpec> points;
  auto base = [] {
    GenConfig g;
    g.topology = Topology::RandomRegular;
    g.degree = 4;
    g.node_count = 50;
    g.user_count = 12;
    return g;
  };
  switch (kind) {
    case SuiteKind::NodeSweep:
      for (int n = 30; n <= 50; n += 5) {
        GenConfig g = base();
        g.node_count = n;
        points.push_back({"n=" + std::to_string(n), g});
      }
      break;
    case SuiteKind::DegreeSweep:
      for (int d = 3; d <= 7; ++d) {
        GenConfig g = base();
        g.degree = d;
        points.push_back({"deg=" + std::to_string(d), g});
      }
      for (int d = 3; d <= 6; ++d) {
        GenConfig g = base();
        g.topology = Topology::AverageDegree;
        g.avg_degree = d;
        points.push_back({"avgdeg=" + std::to_string(d), g});
      }
      break;
    case SuiteKind::UserSweep:
      for (int k : {1, 2, 3, 4, 5, 6, 9, 12, 15}) {
        GenConfig g = base();
        g.user_count = k;
        points.push_back({"users=" + std::to_string(k), g});
      }
      break;
    case SuiteKind::Incremental:
      for (int added = 1; added <= 3; ++added) {
        GenConfig g = base();
        g.user_count = 9 + added;
        points.push_back({"added=" + std::to_string(added), g});
      }
      break;
    case SuiteKind::Ablation: {
      GenConfig g = base();
      g.node_count = 30;
      points.push_back({"ablation", g});
      break;
    }
  }
  return points;
}

ProblemInstance point_instance(const PointSpec& point, std::uint64_t seed) {
  GenConfig gen = point.gen;
  // Salt until the instance is routable; the salt sequence is part of the
  // deterministic row seed, so retries do not break reproducibility.
  for (std::uint64_t salt = 0;; ++salt) {
    gen.seed = salt == 0 ? seed : splitmix64(seed + salt);
    ProblemInstance inst = generate_instance(gen);
    if (all_destinations_reachable(inst)) return inst;
  }
}

ResultRow make_row(const std::string& point, std::uint64_t seed,
                   const std::string& solver, const Solution& sol) {
  ResultRow row;
  row.point = point;
  row.instance_seed = seed;
  row.solver = solver;
  row.cost = sol.cost;
  row.runtime_seconds = sol.runtime_seconds;
  row.log10_runtime = std::log10(std::max(sol.runtime_seconds, 1e-9));
  row.score = cost_delay_score(row.cost, std::max(sol.runtime_seconds, 1e-9));
  row.feasible = sol.is_tree;
  return row;
}

struct GpnContext {
  ModelConfig config;
  ModelParams params;
};

Solution dispatch_solver(const std::string& tag, const ProblemInstance& inst,
                         std::uint64_t seed, const GpnContext* gpn) {
  if (tag == "dp") return dreyfus_wagner(inst);
  if (tag == "bruteforce") return brute_force(inst);
  if (tag == "dijkstra") return dijkstra_reuse(inst);
  if (tag == "greedy") return sequential_greedy(inst);
  if (tag == "ga") {
    GaConfig c;
    c.seed = seed;
    return genetic_algorithm(inst, c);
  }
  if (tag == "bco") {
    BcoConfig c;
    c.seed = seed;
    return bee_colony(inst, c);
  }
  if (tag == "gpn") {
    if (!gpn) throw BenchError("gpn solver requires a checkpoint");
    return gpn_solve(gpn->params, gpn->config, attach_virtual_hub(inst), EnvConfig{});
  }
  throw BenchError("unknown solver: " + tag);
}

void run_parallel(int threads, size_t count, const std::function<void(size_t)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  size_t chunk = (count + threads - 1) / static_cast<size_t>(threads);
  for (int t = 0; t < threads; ++t) {
    size_t lo = std::min(count, static_cast<size_t>(t) * chunk);
    size_t hi = std::min(count, lo + chunk);
    if (lo < hi)
      pool.emplace_back([lo, hi, &fn] {
        for (size_t i = lo; i < hi; ++i) fn(i);
      });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

SuiteKind parse_suite(const std::string& name) {
  if (name == "node-sweep") return SuiteKind::NodeSweep;
  if (name == "degree-sweep") return SuiteKind::DegreeSweep;
  if (name == "user-sweep") return SuiteKind::UserSweep;
  if (name == "incremental") return SuiteKind::Incremental;
  if (name == "ablation") return SuiteKind::Ablation;
  throw BenchError("unknown suite: " + name);
}

std::string suite_name(SuiteKind kind) {
  switch (kind) {
    case SuiteKind::NodeSweep: return "node-sweep";
    case SuiteKind::DegreeSweep: return "degree-sweep";
    case SuiteKind::UserSweep: return "user-sweep";
    case SuiteKind::Incremental: return "incremental";
    case SuiteKind::Ablation: return "ablation";
  }
  return "?";
}

double cost_delay_score(double cost, double runtime_seconds) {
  return 2.0 * cost + std::log10(runtime_seconds);
}

std::uint64_t row_seed(std::uint64_t suite_seed, const std::string& point, int index) {
  return splitmix64(suite_seed ^ fnv1a(point) ^
                    (static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ULL));
}

std::vector<ResultRow> run_suite(const SuiteConfig& config, const RowCallback& cb) {
  if (config.suite == SuiteKind::Incremental) return incremental_run(config, cb);
  if (config.suite == SuiteKind::Ablation) return ablation_run(config, cb);

  std::vector<std::string> solvers = config.solvers;
  if (solvers.empty()) {
    solvers = {"dp", "dijkstra", "greedy", "ga", "bco"};
    if (!config.checkpoint_path.empty()) solvers.push_back("gpn");
  }
  std::unique_ptr<GpnContext> gpn;
  if (std::find(solvers.begin(), solvers.end(), "gpn") != solvers.end()) {
    if (config.checkpoint_path.empty())
      throw BenchError("gpn solver requires a checkpoint");
    Checkpoint ckpt = load_checkpoint(config.checkpoint_path);
    gpn = std::make_unique<GpnContext>(GpnContext{ckpt.model_config, ckpt.params});
  }

  std::vector<ResultRow> rows;
  for (const auto& point : suite_points(config.suite)) {
    std::vector<std::vector<ResultRow>> slots(
        static_cast<size_t>(config.instances_per_point));
    run_parallel(config.threads, slots.size(), [&](size_t i) {
      std::uint64_t seed = row_seed(config.seed, point.label, static_cast<int>(i));
      ProblemInstance inst = point_instance(point, seed);
      for (const auto& tag : solvers)
        slots[i].push_back(
            make_row(point.label, seed, tag, dispatch_solver(tag, inst, seed, gpn.get())));
    });
    for (auto& slot : slots)
      for (auto& row : slot) {
        if (cb) cb(row);
        rows.push_back(std::move(row));
      }
  }
  return rows;
}

Solution greedy_warm(const ProblemInstance& instance, const MulticastTree& base) {
  std::vector<NodeId> pending;
  for (const auto& [node, demand] : instance.demands.entries)
    if (!base.contains(node)) pending.push_back(node);
  std::sort(pending.begin(), pending.end(), [&](NodeId a, NodeId b) {
    double da = instance.demands.demand_of(a), db = instance.demands.demand_of(b);
    return da != db ? da > db : a < b;
  });
  const auto t0 = std::chrono::steady_clock::now();
  Solution sol = attach_in_order(instance, pending, base);
  sol.solver_tag = "greedy-warm";
  sol.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

std::vector<ResultRow> incremental_run(const SuiteConfig& config, const RowCallback& cb) {
  std::unique_ptr<GpnContext> gpn;
  if (!config.checkpoint_path.empty()) {
    Checkpoint ckpt = load_checkpoint(config.checkpoint_path);
    gpn = std::make_unique<GpnContext>(GpnContext{ckpt.model_config, ckpt.params});
  }

  std::vector<ResultRow> rows;
  for (const auto& point : suite_points(SuiteKind::Incremental)) {
    std::vector<std::vector<ResultRow>> slots(
        static_cast<size_t>(config.instances_per_point));
    run_parallel(config.threads, slots.size(), [&](size_t i) {
      std::uint64_t seed = row_seed(config.seed, point.label, static_cast<int>(i));
      ProblemInstance full = point_instance(point, seed);

      // The first nine destinations form the standing session; the rest
      // arrive later and are attached without rerouting the standing tree.
      ProblemInstance base_inst = full;
      base_inst.demands.entries.assign(full.demands.entries.begin(),
                                       full.demands.entries.begin() + 9);

      Solution cold = dreyfus_wagner(full);
      slots[i].push_back(make_row(point.label, seed, "dp-cold", cold));

      Solution base_sol = dreyfus_wagner(base_inst);
      Solution warm_greedy = greedy_warm(full, base_sol.tree);
      slots[i].push_back(make_row(point.label, seed, "greedy-warm", warm_greedy));

      if (gpn) {
        Solution warm_gpn = gpn_solve_warm(gpn->params, gpn->config,
                                           attach_virtual_hub(full), EnvConfig{},
                                           base_sol.tree);
        slots[i].push_back(make_row(point.label, seed, "gpn-warm", warm_gpn));
      }
    });
    for (auto& slot : slots)
      for (auto& row : slot) {
        if (cb) cb(row);
        rows.push_back(std::move(row));
      }
  }
  return rows;
}

ModelConfig ablation_model_config(const std::string& variant) {
  ModelConfig cfg;
  if (variant == "full") return cfg;
  if (variant == "gcn") {
    cfg.encoder = EncoderVariant::Gcn;
    return cfg;
  }
  if (variant == "no-lstm") {
    cfg.aggregator = AggregatorVariant::None;
    return cfg;
  }
  if (variant == "mlp") {
    cfg.scorer = ScorerVariant::Mlp;
    return cfg;
  }
  throw BenchError("unknown ablation variant: " + variant);
}

std::vector<ResultRow> ablation_run(const SuiteConfig& config, const RowCallback& cb) {
  if (config.ablation_checkpoints.empty())
    throw BenchError("ablation requires per-variant checkpoints");
  std::vector<std::pair<std::string, GpnContext>> variants;
  for (const char* tag : {"full", "gcn", "no-lstm", "mlp"}) {
    auto it = config.ablation_checkpoints.find(tag);
    if (it == config.ablation_checkpoints.end()) continue;
    Checkpoint ckpt = load_checkpoint(it->second);
    variants.emplace_back(tag, GpnContext{ckpt.model_config, ckpt.params});
  }
  if (variants.empty()) throw BenchError("no ablation checkpoints loaded");

  const PointSpec point = suite_points(SuiteKind::Ablation).front();
  std::vector<std::vector<ResultRow>> slots(
      static_cast<size_t>(config.instances_per_point));
  run_parallel(config.threads, slots.size(), [&](size_t i) {
    std::uint64_t seed = row_seed(config.seed, point.label, static_cast<int>(i));
    ProblemInstance inst = attach_virtual_hub(point_instance(point, seed));
    for (const auto& [tag, ctx] : variants) {
      Solution sol = gpn_solve(ctx.params, ctx.config, inst, EnvConfig{});
      slots[i].push_back(make_row(point.label, seed, tag, sol));
    }
  });
  std::vector<ResultRow> rows;
  for (auto& slot : slots)
    for (auto& row : slot) {
      if (cb) cb(row);
      rows.push_back(std::move(row));
    }
  return rows;
}

std::string export_dot(const ProblemInstance& instance,
                       const std::vector<std::pair<std::string, MulticastTree>>& trees) {
  static const char* kColors[] = {"red",    "blue",   "forestgreen",
                                  "orange", "purple", "brown"};
  std::ostringstream os;
  os << "digraph multicast {\n  rankdir=LR;\n  node [shape=circle];\n";
  os << "  " << instance.source << " [shape=doublecircle, label=\"s\"];\n";
  for (const auto& [node, demand] : instance.demands.entries)
    os << "  " << node << " [style=filled, fillcolor=lightgray, label=\"" << node
       << "\\nx=" << demand << "\"];\n";
  if (instance.graph.hub_id())
    os << "  " << *instance.graph.hub_id() << " [label=\"hub\", style=dashed];\n";
  os << std::fixed << std::setprecision(3);
  for (const auto& e : instance.graph.edges())
    os << "  " << e.u << " -> " << e.v << " [dir=none, color=gray70, label=\""
       << e.cost << "\"];\n";
  size_t color = 0;
  for (const auto& [label, tree] : trees) {
    const char* c = kColors[color % std::size(kColors)];
    ++color;
    for (const auto& [child, parent] : tree.parent)
      os << "  " << parent << " -> " << child << " [color=" << c
         << ", penwidth=2, tooltip=\"" << label << "\"];\n";
    os << "  subgraph { label=\"" << label << "\"; }\n";
  }
  os << "}\n";
  return os.str();
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "point,instance_seed,solver,cost,runtime_seconds,log10_runtime,score,feasible\n";
  os << std::setprecision(12);
  for (const auto& r : rows)
    os << r.point << ',' << r.instance_seed << ',' << r.solver << ',' << r.cost << ','
       << r.runtime_seconds << ',' << r.log10_runtime << ',' << r.score << ','
       << (r.feasible ? 1 : 0) << '\n';
  return os.str();
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw BenchError("cannot open " + path + " for writing");
  out << rows_to_csv(rows);
}

std::string summary_block(const std::vector<ResultRow>& rows) {
  struct Acc {
    double cost = 0, lruntime = 0, score = 0;
    int n = 0;
  };
  std::vector<std::pair<std::string, Acc>> acc;  // keyed by "point/solver", ordered
  for (const auto& r : rows) {
    std::string key = r.point + " " + r.solver;
    auto it = std::find_if(acc.begin(), acc.end(),
                           [&](const auto& kv) { return kv.first == key; });
    if (it == acc.end()) {
      acc.emplace_back(key, Acc{});
      it = std::prev(acc.end());
    }
    it->second.cost += r.cost;
    it->second.lruntime += r.log10_runtime;
    it->second.score += r.score;
    it->second.n += 1;
  }
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "point solver mean_cost mean_log10_runtime mean_score\n";
  for (const auto& [key, a] : acc)
    os << key << ' ' << a.cost / a.n << ' ' << a.lruntime / a.n << ' ' << a.score / a.n
       << '\n';
  return os.str();
}

}  // namespace mcr
