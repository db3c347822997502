#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mcr/checkpoint.hpp"
#include "mcr/gpn.hpp"

namespace mcr {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 1.0;
  double lr_decay = 0.96;
  int lr_milestone = 500;
  int batch_size = 16;
  int epochs = 20;
  int steps_per_epoch = 2500;
  double baseline_decay = 0.9;
  std::uint64_t seed = 1;

  int train_nodes = 30;
  int train_users = 9;
  double train_p = 0.10;

  int val_nodes = 30;
  int val_users = 9;
  double val_p = 0.08;
  int val_instances = 8;
  int val_interval = 100;  // steps between greedy validations

  int threads = 1;
  std::string metrics_path;  // CSV written here when non-empty

  std::int64_t total_steps() const {
    return static_cast<std::int64_t>(epochs) * steps_per_epoch;
  }
};

/// Step-decay schedule: lr x decay^(milestones passed).
double lr_at_step(const TrainConfig& config, std::int64_t step);

/// One exponential-moving-average update: decay*b + (1-decay)*reward.
double ema_update(double baseline, double reward, double decay);

struct MetricsRow {
  std::int64_t step = 0;
  double lr = 0.0;
  double mean_batch_cost = 0.0;
  double baseline = 0.0;
  double grad_norm = 0.0;
  std::optional<double> val_cost_ratio;  // set on validation steps
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRow> metrics;
  std::vector<double> val_ratios;  // greedy validation cost / DP cost
  // Parameters at the best validation point seen during this run; equal to
  // the final parameters when validation is disabled.
  ModelParams best_params;
  double best_val_ratio = std::numeric_limits<double>::infinity();
};

/// Deterministic ER instance from a training stream position; retries the
/// seed until every destination is reachable.
ProblemInstance sample_train_instance(int nodes, int users, double edge_prob,
                                      std::uint64_t stream_seed,
                                      std::uint64_t& counter);

/// REINFORCE training loop. Resumes from `resume` when provided (the model
/// config and parameter shapes must match). Aborts with TrainError when
/// greedy validation exceeds 10x the DP optimum three evaluations in a row.
TrainResult train(const TrainConfig& config, const ModelConfig& model_config,
                  const std::optional<Checkpoint>& resume = std::nullopt,
                  const std::function<void(const MetricsRow&)>& on_step = {});

}  // namespace mcr
