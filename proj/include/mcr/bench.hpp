#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mcr/baselines.hpp"
#include "mcr/exact.hpp"
#include "mcr/gpn.hpp"

namespace mcr {

class BenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SuiteKind { NodeSweep, DegreeSweep, UserSweep, Incremental, Ablation };

SuiteKind parse_suite(const std::string& name);
std::string suite_name(SuiteKind kind);

struct SuiteConfig {
  SuiteKind suite = SuiteKind::NodeSweep;
  int instances_per_point = 100;
  std::vector<std::string> solvers;  // empty = suite default
  std::uint64_t seed = 42;
  int threads = 1;
  std::string checkpoint_path;  // enables the "gpn" solver
  // ablation suite: variant tag -> checkpoint path
  std::map<std::string, std::string> ablation_checkpoints;
};

struct ResultRow {
  std::string point;  // e.g. "n=30" or "added=2"
  std::uint64_t instance_seed = 0;
  std::string solver;
  double cost = 0.0;
  double runtime_seconds = 0.0;
  double log10_runtime = 0.0;
  double score = 0.0;  // always 2*cost + log10_runtime
  bool feasible = true;
};

/// Composite cost-delay metric: 2*cost + log10(runtime seconds).
double cost_delay_score(double cost, double runtime_seconds);

/// Deterministic per-row instance seed from (suite seed, point, index),
/// the key to resumable and repeatable suites.
std::uint64_t row_seed(std::uint64_t suite_seed, const std::string& point, int index);

using RowCallback = std::function<void(const ResultRow&)>;

/// Runs a full suite; rows are emitted per point x instance x solver in a
/// fixed order. Solves may run in parallel; rows stay ordered.
std::vector<ResultRow> run_suite(const SuiteConfig& config, const RowCallback& cb = {});

/// Incremental experiment: cold DP on (9 + added) users vs warm attachment
/// of the added users onto the cold 9-user DP tree (greedy and, with a
/// checkpoint, GPN). Solver tags: dp-cold, greedy-warm, gpn-warm.
std::vector<ResultRow> incremental_run(const SuiteConfig& config,
                                       const RowCallback& cb = {});

/// Returns a warm-start greedy solution that only routes users missing
/// from `base`; pre-existing edges are never modified.
Solution greedy_warm(const ProblemInstance& instance, const MulticastTree& base);

/// Ablation comparison across the four encoder/aggregator/scorer variants.
std::vector<ResultRow> ablation_run(const SuiteConfig& config,
                                    const RowCallback& cb = {});

ModelConfig ablation_model_config(const std::string& variant);

/// Graphviz text for an instance plus labeled solution trees.
std::string export_dot(const ProblemInstance& instance,
                       const std::vector<std::pair<std::string, MulticastTree>>& trees);

/// CSV with a fixed header; deterministic apart from runtime-derived
/// columns (runtime_seconds, log10_runtime, score).
std::string rows_to_csv(const std::vector<ResultRow>& rows);
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);

/// Per-point, per-solver means of cost, log10 runtime and score.
std::string summary_block(const std::vector<ResultRow>& rows);

}  // namespace mcr
