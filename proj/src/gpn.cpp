#include "mcr/gpn.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <queue>
#include <random>

namespace mcr {

void ModelConfig::check() const {
  if (hidden_dim <= 0 || attention_heads <= 0 || gat_layers <= 0)
    throw ModelError("model dimensions must be positive");
  if (hidden_dim % attention_heads != 0)
    throw ModelError("hidden_dim must be divisible by attention_heads");
  if (logit_scale <= 0) throw ModelError("logit scale must be positive");
}

std::map<std::string, std::pair<int, int>> param_shapes(const ModelConfig& config) {
  config.check();
  const int h = config.hidden_dim;
  const int dh = h / config.attention_heads;
  std::map<std::string, std::pair<int, int>> shapes;
  for (int l = 0; l < config.gat_layers; ++l) {
    const int fin = l == 0 ? kFeatureDim : h;
    const std::string prefix = "gat" + std::to_string(l) + ".";
    shapes[prefix + "W"] = {fin, h};
    if (config.encoder == EncoderVariant::Gat) {
      shapes[prefix + "a1"] = {dh, config.attention_heads};
      shapes[prefix + "a2"] = {dh, config.attention_heads};
    }
  }
  if (config.aggregator == AggregatorVariant::Lstm) {
    for (const char* gate : {"i", "f", "g", "o"}) {
      shapes[std::string("lstm.Wx_") + gate] = {h, h};
      shapes[std::string("lstm.Wh_") + gate] = {h, h};
      shapes[std::string("lstm.b_") + gate] = {1, h};
    }
  }
  if (config.scorer == ScorerVariant::Attention) {
    shapes["ptr.W2"] = {h, h};
    shapes["ptr.W3"] = {h, h};
  } else {
    shapes["mlp.W1"] = {2 * h, h};
    shapes["mlp.b1"] = {1, h};
    shapes["mlp.w2"] = {h, 1};
  }
  return shapes;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelParams params;
  for (const auto& [name, shape] : param_shapes(config)) {
    const auto [rows, cols] = shape;
    double bound = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXf m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = static_cast<float>(dist(rng));
    if (name.find(".b") != std::string::npos) m.setZero();
    params[name] = std::move(m);
  }
  return params;
}

namespace {

// Dijkstra from a set of sources under the incremental attachment metric
// e(u,v) * max(0, demand - existing flow); edges already carrying enough
// flow are free, matching how the final tree is charged.
std::vector<double> incremental_distances(
    const NetworkGraph& g, const std::vector<NodeId>& sources, double demand,
    const std::map<std::pair<NodeId, NodeId>, double>& flows) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<size_t>(g.node_count()), inf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (NodeId s : sources) {
    dist[static_cast<size_t>(s)] = 0.0;
    pq.emplace(0.0, s);
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<size_t>(u)]) continue;
    for (auto [v, cost] : g.neighbors(u)) {
      double f = 0.0;
      auto it = flows.find({u, v});
      if (it == flows.end()) it = flows.find({v, u});
      if (it != flows.end()) f = it->second;
      double w = cost * std::max(0.0, demand - f);
      if (d + w < dist[static_cast<size_t>(v)]) {
        dist[static_cast<size_t>(v)] = d + w;
        pq.emplace(d + w, v);
      }
    }
  }
  return dist;
}

// Max downstream demand per edge of a possibly partial tree; destinations
// not yet attached contribute nothing, edges serving none carry 0.
std::map<std::pair<NodeId, NodeId>, double> partial_tree_flows(
    const MulticastTree& tree, const DemandVector& demands) {
  std::map<std::pair<NodeId, NodeId>, double> flows;
  auto kids = tree.children();
  auto rec = [&](auto&& self, NodeId v) -> double {
    double down = demands.has(v) ? demands.demand_of(v) : 0.0;
    auto it = kids.find(v);
    if (it != kids.end()) {
      for (NodeId c : it->second) {
        double sub = self(self, c);
        flows[{v, c}] = sub;
        down = std::max(down, sub);
      }
    }
    return down;
  };
  rec(rec, tree.root);
  return flows;
}

}  // namespace

Eigen::MatrixXd build_features(const RoutingEnv& env, const ModelConfig& config,
                               int user_index) {
  const auto& inst = env.instance();
  const auto& st = env.state();
  const int n = inst.graph.node_count();
  const double demand_norm = std::max(1.0, inst.demands.max_demand());
  int max_degree = 1;
  for (int v = 0; v < n; ++v) max_degree = std::max(max_degree, inst.graph.degree(v));

  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, kFeatureDim);
  NodeId current = st.partial_path.empty() ? -1 : st.partial_path.back();
  for (int v = 0; v < n; ++v) {
    f(v, 0) = v == inst.source ? 1.0 : 0.0;
    f(v, 1) = inst.demands.has(v) ? 1.0 : 0.0;
    f(v, 2) = inst.demands.demand_of(v) / demand_norm;
    f(v, 3) = st.inflow[static_cast<size_t>(v)] ? 1.0 : 0.0;
    f(v, 5) = v == current ? 1.0 : 0.0;
    f(v, 6) = v == st.active_user ? 1.0 : 0.0;
    f(v, 7) = st.active_demand / demand_norm;
    f(v, 8) = std::min(1.0, static_cast<double>(user_index) / config.max_user);
    f(v, 9) = static_cast<double>(inst.graph.degree(v)) / max_degree;
    f(v, 10) = inst.graph.hub_id() && v == *inst.graph.hub_id() ? 1.0 : 0.0;
  }
  for (NodeId v : st.partial_path) f(v, 4) = 1.0;

  // Through-potential: cost of the cheapest start -> v -> inflow attachment
  // for the active user, normalized to [0,1]. Unreachable nodes get 1.
  if (st.active_user >= 0) {
    NodeId start = current >= 0 ? current : st.active_user;
    auto flows = partial_tree_flows(env.tree(), inst.demands);
    auto d_start = incremental_distances(inst.graph, {start}, st.active_demand, flows);
    std::vector<NodeId> inflow_nodes;
    for (int v = 0; v < n; ++v)
      if (st.inflow[static_cast<size_t>(v)]) inflow_nodes.push_back(v);
    auto d_inflow =
        incremental_distances(inst.graph, inflow_nodes, st.active_demand, flows);
    double scale = 0.0;
    for (int v = 0; v < n; ++v) {
      double t = d_start[static_cast<size_t>(v)] + d_inflow[static_cast<size_t>(v)];
      if (std::isfinite(t)) scale = std::max(scale, t);
    }
    for (int v = 0; v < n; ++v) {
      double t = d_start[static_cast<size_t>(v)] + d_inflow[static_cast<size_t>(v)];
      f(v, 11) = std::isfinite(t) ? (scale > 0 ? t / scale : 0.0) : 1.0;
    }
  }
  return f;
}

namespace {

using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Neighborhood mask with self-loops, shared by every encoder call on a graph.
BoolMat adjacency_mask(const NetworkGraph& g) {
  const int n = g.node_count();
  BoolMat m = BoolMat::Constant(n, n, false);
  for (int v = 0; v < n; ++v) m(v, v) = true;
  for (const auto& e : g.edges()) {
    m(e.u, e.v) = true;
    m(e.v, e.u) = true;
  }
  return m;
}

// Symmetric-normalized adjacency with self-loops (gcn ablation encoder).
Eigen::MatrixXd gcn_propagation_matrix(const NetworkGraph& g) {
  const int n = g.node_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (const auto& e : g.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  Eigen::VectorXd dinv = a.rowwise().sum().array().rsqrt();
  return dinv.asDiagonal() * a * dinv.asDiagonal();
}

template <typename S>
class Forward {
 public:
  using Tape = ad::Tape<S>;
  using Var = typename Tape::Var;
  using Mat = typename Tape::Mat;

  Forward(Tape& tape, const ModelConfig& config, const ParamMap<S>& params,
          const NetworkGraph& graph)
      : tape_(tape), cfg_(config) {
    cfg_.check();
    auto shapes = param_shapes(config);
    for (const auto& [name, shape] : shapes) {
      auto it = params.find(name);
      if (it == params.end()) throw ModelError("missing parameter block " + name);
      if (it->second.rows() != shape.first || it->second.cols() != shape.second)
        throw ModelError("parameter block " + name + " has wrong shape");
      p_[name] = tape_.input(it->second);
    }
    for (const auto& [name, m] : params)
      if (!shapes.count(name)) throw ModelError("unexpected parameter block " + name);
    mask_ = adjacency_mask(graph);
    if (config.encoder == EncoderVariant::Gcn)
      gcn_prop_ = tape_.constant(gcn_propagation_matrix(graph).template cast<S>());
  }

  Tape& tape() { return tape_; }
  Var param(const std::string& name) const { return p_.at(name); }

  Var encode(const Eigen::MatrixXd& features) {
    Var x = tape_.constant(features.template cast<S>());
    for (int l = 0; l < cfg_.gat_layers; ++l) {
      const std::string prefix = "gat" + std::to_string(l) + ".";
      Var z = tape_.matmul(x, p_.at(prefix + "W"));
      if (cfg_.encoder == EncoderVariant::Gcn) {
        x = tape_.relu(tape_.matmul(gcn_prop_, z));
        continue;
      }
      const int dh = cfg_.hidden_dim / cfg_.attention_heads;
      Var out{};
      for (int h = 0; h < cfg_.attention_heads; ++h) {
        Var zh = tape_.cols(z, h * dh, dh);
        Var s1 = tape_.matmul(zh, tape_.cols(p_.at(prefix + "a1"), h, 1));
        Var s2 = tape_.matmul(zh, tape_.cols(p_.at(prefix + "a2"), h, 1));
        Var e = tape_.leaky_relu(tape_.outer_sum(s1, tape_.transpose(s2)),
                                 static_cast<S>(cfg_.leaky_slope));
        Var att = tape_.softmax_rows_masked(e, mask_);
        Var hh = tape_.matmul(att, zh);
        out = h == 0 ? hh : tape_.concat_cols(out, hh);
      }
      x = tape_.relu(out);
    }
    return x;
  }

  std::pair<Var, Var> lstm_step(Var x, Var h, Var c) {
    auto gate = [&](const char* g) {
      return tape_.add(
          tape_.add(tape_.matmul(x, p_.at(std::string("lstm.Wx_") + g)),
                    tape_.matmul(h, p_.at(std::string("lstm.Wh_") + g))),
          p_.at(std::string("lstm.b_") + g));
    };
    Var i = tape_.sigmoid(gate("i"));
    Var f = tape_.sigmoid(gate("f"));
    Var g = tape_.tanh(gate("g"));
    Var o = tape_.sigmoid(gate("o"));
    Var c2 = tape_.add(tape_.cmul(f, c), tape_.cmul(i, g));
    Var h2 = tape_.cmul(o, tape_.tanh(c2));
    return {h2, c2};
  }

  Var zero_state() { return tape_.constant(Mat::Zero(1, cfg_.hidden_dim)); }

  /// Probability row (1 x n): scaled softmax plus epsilon smoothing over
  /// the allowed entries; everything else is exactly zero. Scores are only
  /// computed for candidate rows, so per-step pointer work is O(k*H).
  Var pointer_probs(Var h, Var emb, const std::vector<char>& allowed) {
    const int n = static_cast<int>(allowed.size());
    std::vector<int> cand;
    for (int v = 0; v < n; ++v)
      if (allowed[static_cast<size_t>(v)]) cand.push_back(v);
    if (cand.empty()) throw ModelError("all candidate actions are masked");
    const int k = static_cast<int>(cand.size());

    Var logits{};
    if (cfg_.scorer == ScorerVariant::Attention) {
      // emb * W2 only changes when the embedding does; cache it per encode.
      auto cached = w2_cache_.find(emb.id);
      if (cached == w2_cache_.end())
        cached = w2_cache_.emplace(emb.id, tape_.matmul(emb, p_.at("ptr.W2"))).first;
      Var t = tape_.tanh(tape_.add_rowvec(tape_.gather_rows(cached->second, cand),
                                          tape_.matmul(h, p_.at("ptr.W3"))));
      logits = tape_.transpose(tape_.matmul(t, tape_.transpose(h)));
    } else {
      Var c = tape_.concat_cols(tape_.gather_rows(emb, cand), tape_.repeat_row(h, k));
      Var h1 = tape_.relu(tape_.add_rowvec(tape_.matmul(c, p_.at("mlp.W1")),
                                           p_.at("mlp.b1")));
      logits = tape_.transpose(tape_.matmul(h1, p_.at("mlp.w2")));
    }
    Var scaled = tape_.scale(logits, static_cast<S>(cfg_.logit_scale));
    Var probs = tape_.softmax_rows_masked(scaled, BoolMat::Constant(1, k, true));
    const S eps = static_cast<S>(cfg_.epsilon);
    Var padded = tape_.add(probs, tape_.constant(Mat::Constant(1, k, eps)));
    Var normed = tape_.scale(padded, S(1) / (S(1) + eps * static_cast<S>(k)));
    return tape_.scatter_cols(normed, std::move(cand), n);
  }

 private:
  Tape& tape_;
  ModelConfig cfg_;
  std::map<std::string, Var> p_;
  std::map<int, Var> w2_cache_;  // embedding var id -> emb*W2
  BoolMat mask_;
  Var gcn_prop_{};
};

std::vector<char> allowed_from_actions(int n, const std::vector<NodeId>& actions) {
  std::vector<char> allowed(static_cast<size_t>(n), 0);
  for (NodeId v : actions) allowed[static_cast<size_t>(v)] = 1;
  return allowed;
}

}  // namespace

template <typename S>
RolloutResult rollout(const ParamMap<S>& params, const ModelConfig& model_config,
                      const ProblemInstance& instance, const EnvConfig& env_config,
                      RolloutMode mode, std::uint64_t seed) {
  ad::Tape<S> tape(/*record=*/false);
  Forward<S> fwd(tape, model_config, params, instance.graph);
  RoutingEnv env(instance, env_config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int n = instance.graph.node_count();

  RolloutResult result;
  int user_index = 0;
  while (!env.done()) {
    ++user_index;
    EpisodeRecord episode;
    episode.user = env.state().active_user;
    result.rewards.emplace_back();
    result.log_probs.emplace_back();

    auto emb = fwd.encode(build_features(env, model_config, user_index));
    auto h = fwd.zero_state();
    auto c = fwd.zero_state();
    bool use_lstm = model_config.aggregator == AggregatorVariant::Lstm;
    if (use_lstm)
      std::tie(h, c) = fwd.lstm_step(tape.row(emb, env.state().active_user), h, c);
    else
      h = tape.row(emb, env.state().active_user);

    while (true) {
      if (env.state().step_count >= env.max_steps()) {
        if (!env_config.use_virtual_hub) {
          result.feasible = false;
          break;
        }
        auto out = env.force_hub_transition();
        episode.steps.push_back({-1, out.reward, true});
        result.rewards.back().push_back(out.reward);
        result.total_reward += out.reward;
        if (out.episode_done) break;
        continue;
      }
      auto actions = env.valid_actions();
      if (actions.empty()) {
        if (!env_config.use_virtual_hub) {
          result.feasible = false;
          break;
        }
        auto out = env.force_hub_transition();
        episode.steps.push_back({-1, out.reward, true});
        result.rewards.back().push_back(out.reward);
        result.total_reward += out.reward;
        if (out.episode_done) break;
        continue;
      }
      auto probs_var = fwd.pointer_probs(h, emb, allowed_from_actions(n, actions));
      const auto& probs = tape.value(probs_var);

      NodeId action = actions.front();
      if (mode == RolloutMode::Greedy) {
        for (NodeId v : actions)
          if (probs(0, v) > probs(0, action)) action = v;
      } else {
        double r = uni(rng);
        double acc = 0.0;
        for (NodeId v : actions) {
          acc += static_cast<double>(probs(0, v));
          if (r < acc) {
            action = v;
            break;
          }
          action = v;  // fall back to the last candidate on rounding
        }
      }
      double logp = std::log(static_cast<double>(probs(0, action)));
      auto out = env.step(action);
      episode.steps.push_back({action, out.reward, false});
      result.rewards.back().push_back(out.reward);
      result.log_probs.back().push_back(logp);
      result.total_reward += out.reward;
      if (out.episode_done) break;

      if (model_config.reencode_each_step) {
        auto next_emb = fwd.encode(build_features(env, model_config, user_index));
        if (use_lstm) std::tie(h, c) = fwd.lstm_step(tape.row(emb, action), h, c);
        emb = next_emb;
        if (!use_lstm) h = tape.row(emb, env.state().partial_path.back());
      } else {
        if (use_lstm)
          std::tie(h, c) = fwd.lstm_step(tape.row(emb, action), h, c);
        else
          h = tape.row(emb, action);
      }
    }
    result.trajectory.episodes.push_back(std::move(episode));
    if (!result.feasible) break;
  }
  result.tree = env.tree();
  return result;
}

template <typename S>
LossResult trajectory_loss(const ParamMap<S>& params, const ModelConfig& model_config,
                           const ProblemInstance& instance, const EnvConfig& env_config,
                           const Trajectory& trajectory, double baseline,
                           bool compute_grads) {
  ad::Tape<S> tape(compute_grads);
  Forward<S> fwd(tape, model_config, params, instance.graph);
  RoutingEnv env(instance, env_config);
  const int n = instance.graph.node_count();
  const double gamma = env_config.gamma;

  using Var = typename ad::Tape<S>::Var;
  Var loss = tape.constant(ad::Tape<S>::Mat::Zero(1, 1));
  bool loss_nonzero = false;

  int user_index = 0;
  for (const auto& episode : trajectory.episodes) {
    ++user_index;
    if (env.done()) throw ModelError("trajectory has more episodes than the env");
    if (env.state().active_user != episode.user)
      throw ModelError("trajectory user order does not match the environment");

    // Discounted return-to-go within the episode (forced rewards included).
    const size_t steps = episode.steps.size();
    std::vector<double> returns(steps, 0.0);
    double g = 0.0;
    for (size_t t = steps; t-- > 0;) {
      g = episode.steps[t].reward + gamma * g;
      returns[t] = g;
    }

    auto emb = fwd.encode(build_features(env, model_config, user_index));
    auto h = fwd.zero_state();
    auto c = fwd.zero_state();
    bool use_lstm = model_config.aggregator == AggregatorVariant::Lstm;
    if (use_lstm)
      std::tie(h, c) = fwd.lstm_step(tape.row(emb, env.state().active_user), h, c);
    else
      h = tape.row(emb, env.state().active_user);

    for (size_t t = 0; t < steps; ++t) {
      const auto& rec = episode.steps[t];
      if (rec.forced) {
        env.force_hub_transition();
        continue;
      }
      auto actions = env.valid_actions();
      auto probs = fwd.pointer_probs(h, emb, allowed_from_actions(n, actions));
      Var logp = tape.log(tape.pick(probs, 0, rec.action));
      double advantage = returns[t] - baseline;
      loss = tape.add(loss, tape.scale(logp, static_cast<S>(-advantage)));
      loss_nonzero = true;
      auto out = env.step(rec.action);
      if (out.episode_done) break;
      if (model_config.reencode_each_step) {
        auto next_emb = fwd.encode(build_features(env, model_config, user_index));
        if (use_lstm) std::tie(h, c) = fwd.lstm_step(tape.row(emb, rec.action), h, c);
        emb = next_emb;
        if (!use_lstm) h = tape.row(emb, env.state().partial_path.back());
      } else {
        if (use_lstm)
          std::tie(h, c) = fwd.lstm_step(tape.row(emb, rec.action), h, c);
        else
          h = tape.row(emb, rec.action);
      }
    }
  }

  LossResult result;
  result.loss = static_cast<double>(tape.value(loss)(0, 0));
  if (compute_grads) {
    if (loss_nonzero) tape.backward(loss);
    for (const auto& [name, shape] : param_shapes(model_config)) {
      if (loss_nonzero) {
        result.grads[name] = tape.grad(fwd.param(name)).template cast<double>();
      } else {
        result.grads[name] = Eigen::MatrixXd::Zero(shape.first, shape.second);
      }
    }
  }
  return result;
}

Eigen::MatrixXd encode_nodes(const ParamMap<double>& params, const ModelConfig& config,
                             const NetworkGraph& graph,
                             const Eigen::MatrixXd& features) {
  ad::Tape<double> tape(false);
  Forward<double> fwd(tape, config, params, graph);
  return tape.value(fwd.encode(features));
}

std::pair<Eigen::RowVectorXd, Eigen::RowVectorXd> aggregate_path(
    const ParamMap<double>& params, const ModelConfig& config,
    const Eigen::MatrixXd& sequence) {
  if (sequence.rows() == 0) throw ModelError("empty path sequence");
  ad::Tape<double> tape(false);
  NetworkGraph dummy = NetworkGraph::from_edges(2, {{0, 1, 1.0}});
  Forward<double> fwd(tape, config, params, dummy);
  auto h = fwd.zero_state();
  auto c = fwd.zero_state();
  for (Eigen::Index i = 0; i < sequence.rows(); ++i) {
    auto x = tape.constant(sequence.row(i));
    std::tie(h, c) = fwd.lstm_step(x, h, c);
  }
  return {tape.value(h).row(0), tape.value(c).row(0)};
}

Eigen::RowVectorXd pointer_distribution(const ParamMap<double>& params,
                                        const ModelConfig& config,
                                        const NetworkGraph& graph,
                                        const Eigen::MatrixXd& embeddings,
                                        const Eigen::RowVectorXd& hidden,
                                        const std::vector<char>& allowed) {
  ad::Tape<double> tape(false);
  Forward<double> fwd(tape, config, params, graph);
  auto emb = tape.constant(embeddings);
  auto h = tape.constant(hidden);
  return tape.value(fwd.pointer_probs(h, emb, allowed)).row(0);
}

Solution gpn_solve(const ModelParams& params, const ModelConfig& model_config,
                   const ProblemInstance& instance, const EnvConfig& env_config) {
  const auto t0 = std::chrono::steady_clock::now();
  auto result = rollout<float>(params, model_config, instance, env_config,
                               RolloutMode::Greedy, 0);
  if (!result.feasible) throw InfeasibleError("gpn rollout hit a dead end without a hub");
  Solution sol;
  sol.tree = result.tree;
  sol.cost = tree_cost(instance.graph, sol.tree, instance.demands);
  sol.flows = compute_flows(sol.tree, instance.demands);
  sol.solver_tag = "gpn";
  sol.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

Solution gpn_solve_warm(const ModelParams& params, const ModelConfig& model_config,
                        const ProblemInstance& instance, const EnvConfig& env_config,
                        const MulticastTree& base) {
  const auto t0 = std::chrono::steady_clock::now();
  ad::Tape<float> tape(false);
  Forward<float> fwd(tape, model_config, params, instance.graph);
  RoutingEnv env(instance, env_config, base);
  const int n = instance.graph.node_count();

  int user_index = 0;
  while (!env.done()) {
    ++user_index;
    auto emb = fwd.encode(build_features(env, model_config, user_index));
    auto h = fwd.zero_state();
    auto c = fwd.zero_state();
    bool use_lstm = model_config.aggregator == AggregatorVariant::Lstm;
    if (use_lstm)
      std::tie(h, c) = fwd.lstm_step(tape.row(emb, env.state().active_user), h, c);
    else
      h = tape.row(emb, env.state().active_user);
    while (true) {
      if (env.state().step_count >= env.max_steps() || env.valid_actions().empty()) {
        auto out = env.force_hub_transition();
        if (out.episode_done) break;
        continue;
      }
      auto actions = env.valid_actions();
      auto probs_var = fwd.pointer_probs(h, emb, allowed_from_actions(n, actions));
      const auto& probs = tape.value(probs_var);
      NodeId action = actions.front();
      for (NodeId v : actions)
        if (probs(0, v) > probs(0, action)) action = v;
      auto out = env.step(action);
      if (out.episode_done) break;
      if (model_config.reencode_each_step)
        emb = fwd.encode(build_features(env, model_config, user_index));
      if (use_lstm)
        std::tie(h, c) = fwd.lstm_step(tape.row(emb, action), h, c);
      else
        h = tape.row(emb, env.state().partial_path.back());
    }
  }
  Solution sol;
  sol.tree = env.tree();
  sol.cost = tree_cost(instance.graph, sol.tree, instance.demands);
  sol.flows = compute_flows(sol.tree, instance.demands);
  sol.solver_tag = "gpn-warm";
  sol.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

template RolloutResult rollout<float>(const ParamMap<float>&, const ModelConfig&,
                                      const ProblemInstance&, const EnvConfig&,
                                      RolloutMode, std::uint64_t);
template RolloutResult rollout<double>(const ParamMap<double>&, const ModelConfig&,
                                       const ProblemInstance&, const EnvConfig&,
                                       RolloutMode, std::uint64_t);
template LossResult trajectory_loss<float>(const ParamMap<float>&, const ModelConfig&,
                                           const ProblemInstance&, const EnvConfig&,
                                           const Trajectory&, double, bool);
template LossResult trajectory_loss<double>(const ParamMap<double>&, const ModelConfig&,
                                            const ProblemInstance&, const EnvConfig&,
                                            const Trajectory&, double, bool);

}  // namespace mcr
