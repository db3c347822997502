#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mcr/autodiff.hpp"
#include "mcr/exact.hpp"
#include "mcr/rl_env.hpp"

namespace mcr {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EncoderVariant { Gat, Gcn };
enum class AggregatorVariant { Lstm, None };
enum class ScorerVariant { Attention, Mlp };

/// Per-node raw features fed to the encoder. The last column is a
/// shortest-path through-potential under the incremental cost metric
/// e(u,v) * max(0, x_k - f(u,v)): normalized d(start -> v) + d(v -> inflow
/// set), minimal exactly on the cheapest attachment path for the active
/// user. Without it the policy cannot observe edge costs at all.
inline constexpr int kFeatureDim = 12;

struct ModelConfig {
  int hidden_dim = 128;
  int attention_heads = 4;
  int gat_layers = 2;
  EncoderVariant encoder = EncoderVariant::Gat;
  AggregatorVariant aggregator = AggregatorVariant::Lstm;
  ScorerVariant scorer = ScorerVariant::Attention;
  double logit_scale = 10.0;
  double epsilon = 1e-15;
  int max_user = 20;
  double leaky_slope = 0.2;
  bool reencode_each_step = true;

  void check() const;
  bool operator==(const ModelConfig&) const = default;
};

template <typename S>
using ParamMap = std::map<std::string, Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>>;

using ModelParams = ParamMap<float>;

/// Uniform Glorot-style initialization; block set depends on the variants.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Expected (rows, cols) per named block for shape validation.
std::map<std::string, std::pair<int, int>> param_shapes(const ModelConfig& config);

/// Feature matrix (n x kFeatureDim) for the current environment state.
Eigen::MatrixXd build_features(const RoutingEnv& env, const ModelConfig& config,
                               int user_index);

/// One recorded decision step: the action taken and whether it was a
/// forced hub fallback (no policy decision, no log-probability).
struct StepRecord {
  NodeId action = -1;
  double reward = 0.0;
  bool forced = false;
};

struct EpisodeRecord {
  NodeId user = -1;
  std::vector<StepRecord> steps;
};

struct Trajectory {
  std::vector<EpisodeRecord> episodes;
};

enum class RolloutMode { Sample, Greedy };

struct RolloutResult {
  MulticastTree tree;
  Trajectory trajectory;
  std::vector<std::vector<double>> rewards;    // per episode, per step
  std::vector<std::vector<double>> log_probs;  // policy steps only
  double total_reward = 0.0;
  bool feasible = true;
};

/// Runs all users' episodes to completion. The instance must carry a hub
/// when config.use_virtual_hub is set.
template <typename S>
RolloutResult rollout(const ParamMap<S>& params, const ModelConfig& model_config,
                      const ProblemInstance& instance, const EnvConfig& env_config,
                      RolloutMode mode, std::uint64_t seed);

struct LossResult {
  double loss = 0.0;
  ParamMap<double> grads;  // gradients accumulate in double
};

/// REINFORCE loss for a recorded trajectory:
///   -sum_t (G_t - baseline) * log pi(a_t | s_t)
/// with G_t the gamma-discounted return-to-go within each episode.
/// Replays the environment deterministically and differentiates through
/// pointer -> LSTM -> encoder.
template <typename S>
LossResult trajectory_loss(const ParamMap<S>& params, const ModelConfig& model_config,
                           const ProblemInstance& instance, const EnvConfig& env_config,
                           const Trajectory& trajectory, double baseline,
                           bool compute_grads = true);

/// Inspection entry points for the individual network stages (double
/// precision, no recording). Used by verification tests.
Eigen::MatrixXd encode_nodes(const ParamMap<double>& params, const ModelConfig& config,
                             const NetworkGraph& graph,
                             const Eigen::MatrixXd& features);
/// Runs the LSTM cell over the rows of `sequence`; returns (h, c).
std::pair<Eigen::RowVectorXd, Eigen::RowVectorXd> aggregate_path(
    const ParamMap<double>& params, const ModelConfig& config,
    const Eigen::MatrixXd& sequence);
/// Pointer distribution (1 x n) given embeddings and a hidden state.
Eigen::RowVectorXd pointer_distribution(const ParamMap<double>& params,
                                        const ModelConfig& config,
                                        const NetworkGraph& graph,
                                        const Eigen::MatrixXd& embeddings,
                                        const Eigen::RowVectorXd& hidden,
                                        const std::vector<char>& allowed);

/// Greedy inference wrapped as a Solution (tag "gpn").
Solution gpn_solve(const ModelParams& params, const ModelConfig& model_config,
                   const ProblemInstance& instance, const EnvConfig& env_config);

/// Warm incremental variant: routes only users absent from `base`,
/// never touching pre-existing tree edges.
Solution gpn_solve_warm(const ModelParams& params, const ModelConfig& model_config,
                        const ProblemInstance& instance, const EnvConfig& env_config,
                        const MulticastTree& base);

}  // namespace mcr
