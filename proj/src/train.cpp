#include "mcr/train.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace mcr {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double global_grad_norm(const ParamMap<double>& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

std::string csv_line(const MetricsRow& r) {
  std::ostringstream os;
  os << std::setprecision(10) << r.step << ',' << r.lr << ',' << r.mean_batch_cost
     << ',' << r.baseline << ',' << r.grad_norm << ',';
  if (r.val_cost_ratio) os << *r.val_cost_ratio;
  return os.str();
}

}  // namespace

double lr_at_step(const TrainConfig& config, std::int64_t step) {
  std::int64_t milestones = config.lr_milestone > 0 ? step / config.lr_milestone : 0;
  return config.lr * std::pow(config.lr_decay, static_cast<double>(milestones));
}

double ema_update(double baseline, double reward, double decay) {
  return decay * baseline + (1.0 - decay) * reward;
}

namespace {

// Mean discounted per-episode return G_0. The loss subtracts the baseline
// from per-episode returns-to-go, so the EMA has to track that scale rather
// than the whole-rollout total (which grows with the user count).
double mean_episode_return(const std::vector<std::vector<double>>& rewards,
                           double gamma) {
  if (rewards.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ep : rewards) {
    double g = 0.0;
    for (auto it = ep.rbegin(); it != ep.rend(); ++it) g = *it + gamma * g;
    sum += g;
  }
  return sum / static_cast<double>(rewards.size());
}

}  // namespace

ProblemInstance sample_train_instance(int nodes, int users, double edge_prob,
                                      std::uint64_t stream_seed,
                                      std::uint64_t& counter) {
  GenConfig gen;
  gen.topology = Topology::ErdosRenyi;
  gen.edge_prob = edge_prob;
  gen.node_count = nodes;
  gen.user_count = users;
  // ER graphs at these densities are often disconnected; skip seeds whose
  // destinations are unreachable so every sample is routable without the hub
  // doing all the work.
  for (;;) {
    gen.seed = splitmix64(stream_seed ^ (0xA5C1ULL + counter * 0x9E3779B9ULL));
    ++counter;
    ProblemInstance inst = generate_instance(gen);
    if (all_destinations_reachable(inst)) return inst;
  }
}

TrainResult train(const TrainConfig& config, const ModelConfig& model_config,
                  const std::optional<Checkpoint>& resume,
                  const std::function<void(const MetricsRow&)>& on_step) {
  model_config.check();
  if (config.batch_size <= 0) throw TrainError("batch size must be positive");

  Checkpoint ckpt;
  if (resume) {
    ckpt = *resume;
    if (!(ckpt.model_config == model_config))
      throw TrainError("resume checkpoint was trained with a different model config");
  } else {
    ckpt.model_config = model_config;
    ckpt.params = init_params(model_config, config.seed);
    ckpt.rng_seed = config.seed;
  }
  for (const auto& [name, m] : ckpt.params) {
    if (!ckpt.adam_m.count(name)) ckpt.adam_m[name] = Eigen::MatrixXf::Zero(m.rows(), m.cols());
    if (!ckpt.adam_v.count(name)) ckpt.adam_v[name] = Eigen::MatrixXf::Zero(m.rows(), m.cols());
  }

  EnvConfig env_cfg;

  // Fixed validation set with cached DP optima (hub attached on both sides).
  std::vector<ProblemInstance> val_instances;
  std::vector<double> val_dp_cost;
  {
    std::uint64_t val_counter = 0;
    for (int i = 0; i < config.val_instances; ++i) {
      ProblemInstance inst = sample_train_instance(
          config.val_nodes, config.val_users, config.val_p,
          splitmix64(config.seed ^ 0x56414C1DULL), val_counter);
      inst = attach_virtual_hub(inst);
      val_dp_cost.push_back(dreyfus_wagner(inst).cost);
      val_instances.push_back(std::move(inst));
    }
  }

  TrainResult result;
  std::ofstream metrics_out;
  if (!config.metrics_path.empty()) {
    metrics_out.open(config.metrics_path, std::ios::trunc);
    if (!metrics_out) throw TrainError("cannot open metrics file " + config.metrics_path);
    metrics_out << "step,lr,mean_batch_cost,baseline,grad_norm,val_cost_ratio\n";
  }

  int divergence_streak = 0;
  const std::int64_t total = config.total_steps();
  const int threads = std::max(1, config.threads);

  for (std::int64_t step = ckpt.step; step < total; ++step) {
    // Fresh batch of instances from the deterministic stream.
    std::vector<ProblemInstance> batch;
    std::vector<std::uint64_t> rollout_seeds;
    for (int b = 0; b < config.batch_size; ++b) {
      ProblemInstance inst =
          sample_train_instance(config.train_nodes, config.train_users,
                                config.train_p, ckpt.rng_seed, ckpt.rng_counter);
      rollout_seeds.push_back(splitmix64(ckpt.rng_seed ^ (ckpt.rng_counter * 2654435761ULL)));
      batch.push_back(attach_virtual_hub(inst));
    }

    // Sampled rollouts + per-instance gradients; reduction order is fixed
    // by batch index, so thread count never changes the result.
    std::vector<ParamMap<double>> grads(batch.size());
    std::vector<double> costs(batch.size(), 0.0), rewards(batch.size(), 0.0);
    double baseline_for_step =
        ckpt.baseline_set ? ckpt.baseline : 0.0;  // corrected below on first step
    bool first_step_baseline = !ckpt.baseline_set;

    std::vector<Trajectory> trajectories(batch.size());
    {
      // Pass 1: rollouts only, to seed the baseline on the very first step.
      auto run_range = [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) {
          auto rr = rollout<float>(ckpt.params, model_config, batch[i], env_cfg,
                                   RolloutMode::Sample, rollout_seeds[i]);
          costs[i] = tree_cost(batch[i].graph, rr.tree, batch[i].demands);
          rewards[i] = mean_episode_return(rr.rewards, env_cfg.gamma);
          trajectories[i] = std::move(rr.trajectory);
        }
      };
      if (threads == 1) {
        run_range(0, batch.size());
      } else {
        std::vector<std::thread> pool;
        size_t chunk = (batch.size() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
          size_t lo = std::min(batch.size(), static_cast<size_t>(t) * chunk);
          size_t hi = std::min(batch.size(), lo + chunk);
          if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
      }
    }

    double mean_reward = 0.0, mean_cost = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
      mean_reward += rewards[i];
      mean_cost += costs[i];
    }
    mean_reward /= static_cast<double>(batch.size());
    mean_cost /= static_cast<double>(batch.size());
    if (first_step_baseline) {
      baseline_for_step = mean_reward;
      ckpt.baseline = mean_reward;
      ckpt.baseline_set = true;
    }

    {
      // Pass 2: gradients at the frozen baseline.
      auto grad_range = [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i)
          grads[i] = trajectory_loss<float>(ckpt.params, model_config, batch[i],
                                            env_cfg, trajectories[i],
                                            baseline_for_step)
                         .grads;
      };
      if (threads == 1) {
        grad_range(0, batch.size());
      } else {
        std::vector<std::thread> pool;
        size_t chunk = (batch.size() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
          size_t lo = std::min(batch.size(), static_cast<size_t>(t) * chunk);
          size_t hi = std::min(batch.size(), lo + chunk);
          if (lo < hi) pool.emplace_back(grad_range, lo, hi);
        }
        for (auto& th : pool) th.join();
      }
    }

    ParamMap<double> total_grad;
    for (const auto& [name, m] : ckpt.params)
      total_grad[name] = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    for (const auto& g : grads)
      for (const auto& [name, m] : g) total_grad[name] += m;
    for (auto& [name, m] : total_grad) m /= static_cast<double>(batch.size());

    double gnorm = global_grad_norm(total_grad);
    if (!std::isfinite(gnorm)) throw TrainError("non-finite gradient norm");
    double clip_scale = gnorm > config.grad_clip && gnorm > 0.0
                            ? config.grad_clip / gnorm
                            : 1.0;

    const double lr = lr_at_step(config, step);
    const double t_adam = static_cast<double>(step + 1);
    const double bc1 = 1.0 - std::pow(config.beta1, t_adam);
    const double bc2 = 1.0 - std::pow(config.beta2, t_adam);
    for (auto& [name, p] : ckpt.params) {
      Eigen::MatrixXf g = (total_grad[name] * clip_scale).cast<float>();
      auto& m = ckpt.adam_m[name];
      auto& v = ckpt.adam_v[name];
      m = static_cast<float>(config.beta1) * m + static_cast<float>(1.0 - config.beta1) * g;
      v = static_cast<float>(config.beta2) * v +
          static_cast<float>(1.0 - config.beta2) * g.cwiseProduct(g).eval();
      Eigen::MatrixXf mhat = m / static_cast<float>(bc1);
      Eigen::MatrixXf vhat = v / static_cast<float>(bc2);
      p -= (static_cast<float>(lr) * mhat.array() /
            (vhat.array().sqrt() + static_cast<float>(config.adam_eps)))
               .matrix();
    }

    ckpt.baseline = ema_update(ckpt.baseline, mean_reward, config.baseline_decay);
    ckpt.step = step + 1;

    MetricsRow row;
    row.step = ckpt.step;
    row.lr = lr;
    row.mean_batch_cost = mean_cost;
    row.baseline = ckpt.baseline;
    row.grad_norm = gnorm;

    const bool validate_now = config.val_interval > 0 &&
                              (ckpt.step % config.val_interval == 0 ||
                               ckpt.step == total);
    if (validate_now && !val_instances.empty()) {
      double ratio_sum = 0.0;
      for (size_t i = 0; i < val_instances.size(); ++i) {
        Solution sol = gpn_solve(ckpt.params, model_config, val_instances[i], env_cfg);
        ratio_sum += sol.cost / val_dp_cost[i];
      }
      double ratio = ratio_sum / static_cast<double>(val_instances.size());
      row.val_cost_ratio = ratio;
      result.val_ratios.push_back(ratio);
      if (ratio < result.best_val_ratio) {
        result.best_val_ratio = ratio;
        result.best_params = ckpt.params;
      }
      divergence_streak = ratio > 10.0 ? divergence_streak + 1 : 0;
      if (divergence_streak >= 3)
        throw TrainError("training diverged: validation cost exceeded 10x the "
                         "optimum for 3 consecutive evaluations (last ratio " +
                         std::to_string(ratio) + " at step " +
                         std::to_string(ckpt.step) + ")");
    }

    if (metrics_out) metrics_out << csv_line(row) << '\n';
    if (on_step) on_step(row);
    result.metrics.push_back(row);
  }

  if (result.best_params.empty()) {
    result.best_params = ckpt.params;
    result.best_val_ratio = std::numeric_limits<double>::infinity();
  }
  result.checkpoint = std::move(ckpt);
  return result;
}

}  // namespace mcr
