// Command-line front end: instance generation, solving, training,
// evaluation and the benchmark suites.
#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mcr/bench.hpp"
#include "mcr/checkpoint.hpp"
#include "mcr/train.hpp"

namespace {

// Exit codes: 0 success, 1 infeasible, 2 bad input, 3 internal error.
constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitInternal = 3;

int default_threads() {
  if (const char* env = std::getenv("MCR_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mcr::InstanceError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

mcr::Topology parse_topology(const std::string& name) {
  if (name == "regular") return mcr::Topology::RandomRegular;
  if (name == "er") return mcr::Topology::ErdosRenyi;
  if (name == "avgdeg") return mcr::Topology::AverageDegree;
  throw mcr::InstanceError("unknown topology: " + name);
}

mcr::TrainConfig parse_train_config(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path));
  mcr::TrainConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("lr", c.lr);
  get("grad_clip", c.grad_clip);
  get("lr_decay", c.lr_decay);
  get("lr_milestone", c.lr_milestone);
  get("batch_size", c.batch_size);
  get("epochs", c.epochs);
  get("steps_per_epoch", c.steps_per_epoch);
  get("baseline_decay", c.baseline_decay);
  get("seed", c.seed);
  get("train_nodes", c.train_nodes);
  get("train_users", c.train_users);
  get("train_p", c.train_p);
  get("val_nodes", c.val_nodes);
  get("val_users", c.val_users);
  get("val_p", c.val_p);
  get("val_instances", c.val_instances);
  get("val_interval", c.val_interval);
  get("threads", c.threads);
  get("metrics_path", c.metrics_path);
  return c;
}

mcr::Solution solve_instance(const std::string& algo, const mcr::ProblemInstance& inst,
                             std::uint64_t seed, const std::string& checkpoint_path) {
  if (algo == "bruteforce") return mcr::brute_force(inst);
  if (algo == "dp") return mcr::dreyfus_wagner(inst);
  if (algo == "dijkstra") return mcr::dijkstra_reuse(inst);
  if (algo == "greedy") return mcr::sequential_greedy(inst);
  if (algo == "ga") {
    mcr::GaConfig c;
    c.seed = seed;
    return mcr::genetic_algorithm(inst, c);
  }
  if (algo == "bco") {
    mcr::BcoConfig c;
    c.seed = seed;
    return mcr::bee_colony(inst, c);
  }
  if (algo == "gpn") {
    if (checkpoint_path.empty())
      throw mcr::InstanceError("--checkpoint is required for --algo gpn");
    auto ckpt = mcr::load_checkpoint(checkpoint_path);
    return mcr::gpn_solve(ckpt.params, ckpt.model_config,
                          mcr::attach_virtual_hub(inst), mcr::EnvConfig{});
  }
  throw mcr::InstanceError("unknown algorithm: " + algo);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demand-heterogeneous single-source multicast routing"};
  app.require_subcommand(1);
  app.fallthrough();  // --seed/--threads/--out may follow the subcommand

  std::uint64_t seed = 0;
  int threads = default_threads();
  std::string out;
  app.add_option("--seed", seed, "Global random seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker thread count (env MCR_THREADS)")
      ->capture_default_str();
  app.add_option("--out", out, "Output path");

  // --- gen ---
  auto* gen_cmd = app.add_subcommand("gen", "Generate problem instances");
  int gen_nodes = 30, gen_users = 12, gen_degree = 4, gen_count = 1;
  double gen_p = 0.1, gen_avg = 4.0;
  std::string gen_topology = "regular";
  gen_cmd->add_option("--nodes", gen_nodes)->capture_default_str();
  gen_cmd->add_option("--users", gen_users)->capture_default_str();
  gen_cmd->add_option("--topology", gen_topology, "regular | er | avgdeg")
      ->capture_default_str();
  gen_cmd->add_option("--degree", gen_degree)->capture_default_str();
  gen_cmd->add_option("--p", gen_p, "ER edge probability")->capture_default_str();
  gen_cmd->add_option("--avg-degree", gen_avg)->capture_default_str();
  gen_cmd->add_option("--count", gen_count, "Number of instances")->capture_default_str();

  // --- solve ---
  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance file");
  std::string solve_algo = "dp", solve_instance_path, solve_checkpoint;
  solve_cmd->add_option("--algo", solve_algo,
                        "bruteforce|dp|dijkstra|greedy|ga|bco|gpn")
      ->capture_default_str();
  solve_cmd->add_option("--instance", solve_instance_path, "Instance JSON file")
      ->required();
  solve_cmd->add_option("--checkpoint", solve_checkpoint, "Model checkpoint (gpn)");

  // --- train ---
  auto* train_cmd = app.add_subcommand("train", "Train the policy network");
  std::string train_config_path, train_resume, train_variant = "full";
  std::string train_metrics;
  int train_epochs = -1, train_steps = -1;
  train_cmd->add_option("--config", train_config_path, "TrainConfig JSON file");
  train_cmd->add_option("--variant", train_variant, "full|gcn|no-lstm|mlp")
      ->capture_default_str();
  train_cmd->add_option("--resume", train_resume, "Checkpoint to resume from");
  train_cmd->add_option("--epochs", train_epochs, "Override epoch count");
  train_cmd->add_option("--steps-per-epoch", train_steps, "Override steps per epoch");
  train_cmd->add_option("--metrics", train_metrics, "Metrics CSV path");

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "Greedy validation against the optimum");
  std::string eval_checkpoint;
  int eval_instances = 50, eval_nodes = 30, eval_users = 9;
  double eval_p = 0.08;
  eval_cmd->add_option("--checkpoint", eval_checkpoint)->required();
  eval_cmd->add_option("--instances", eval_instances)->capture_default_str();
  eval_cmd->add_option("--nodes", eval_nodes)->capture_default_str();
  eval_cmd->add_option("--users", eval_users)->capture_default_str();
  eval_cmd->add_option("--p", eval_p)->capture_default_str();

  // --- bench / incremental / ablation ---
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite");
  std::string bench_suite = "node-sweep", bench_checkpoint, bench_algos;
  int bench_instances = 100;
  bench_cmd->add_option("--suite", bench_suite,
                        "node-sweep|degree-sweep|user-sweep|incremental|ablation")
      ->capture_default_str();
  bench_cmd->add_option("--instances", bench_instances, "Instances per suite point")
      ->capture_default_str();
  bench_cmd->add_option("--algos", bench_algos, "Comma-separated solver list");
  bench_cmd->add_option("--checkpoint", bench_checkpoint, "Model checkpoint (gpn)");

  auto* inc_cmd = app.add_subcommand("incremental", "Warm vs cold incremental runs");
  std::string inc_checkpoint;
  int inc_instances = 20;
  inc_cmd->add_option("--instances", inc_instances)->capture_default_str();
  inc_cmd->add_option("--checkpoint", inc_checkpoint, "Model checkpoint (gpn-warm)");

  auto* abl_cmd = app.add_subcommand("ablation", "Compare trained model variants");
  std::string abl_full, abl_gcn, abl_nolstm, abl_mlp;
  int abl_instances = 50;
  abl_cmd->add_option("--instances", abl_instances)->capture_default_str();
  abl_cmd->add_option("--checkpoint-full", abl_full);
  abl_cmd->add_option("--checkpoint-gcn", abl_gcn);
  abl_cmd->add_option("--checkpoint-no-lstm", abl_nolstm);
  abl_cmd->add_option("--checkpoint-mlp", abl_mlp);

  // --- viz ---
  auto* viz_cmd = app.add_subcommand("viz", "Export instance + trees as Graphviz");
  std::string viz_instance;
  std::vector<std::string> viz_trees;  // label=path
  viz_cmd->add_option("--instance", viz_instance)->required();
  viz_cmd->add_option("--tree", viz_trees, "label=tree-file (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      mcr::GenConfig cfg;
      cfg.topology = parse_topology(gen_topology);
      cfg.node_count = gen_nodes;
      cfg.user_count = gen_users;
      cfg.degree = gen_degree;
      cfg.edge_prob = gen_p;
      cfg.avg_degree = gen_avg;
      for (int i = 0; i < gen_count; ++i) {
        cfg.seed = seed + static_cast<std::uint64_t>(i);
        auto inst = mcr::generate_instance(cfg);
        std::string text = mcr::serialize_instance(inst);
        if (out.empty()) {
          std::cout << text << '\n';
        } else {
          std::string path = gen_count == 1
                                 ? out
                                 : out + "." + std::to_string(i) + ".json";
          write_file(path, text);
          std::cout << path << '\n';
        }
      }
      return kExitOk;
    }

    if (*solve_cmd) {
      auto inst = mcr::parse_instance(read_file(solve_instance_path));
      mcr::Solution sol;
      try {
        sol = solve_instance(solve_algo, inst, seed, solve_checkpoint);
      } catch (const mcr::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
      }
      std::cout << "solver: " << sol.solver_tag << "\ncost: " << sol.cost
                << "\nruntime_seconds: " << sol.runtime_seconds << '\n';
      if (!out.empty()) write_file(out, mcr::serialize_tree(sol.tree));
      return kExitOk;
    }

    if (*train_cmd) {
      mcr::TrainConfig cfg;
      if (!train_config_path.empty()) cfg = parse_train_config(train_config_path);
      if (app.count("--seed")) cfg.seed = seed;
      if (train_epochs > 0) cfg.epochs = train_epochs;
      if (train_steps > 0) cfg.steps_per_epoch = train_steps;
      if (!train_metrics.empty()) cfg.metrics_path = train_metrics;
      cfg.threads = threads;
      mcr::ModelConfig model = mcr::ablation_model_config(train_variant);
      std::optional<mcr::Checkpoint> resume;
      if (!train_resume.empty()) resume = mcr::load_checkpoint(train_resume);
      auto result = mcr::train(cfg, model, resume, [](const mcr::MetricsRow& row) {
        if (row.step % 25 == 0 || row.val_cost_ratio) {
          std::cout << "step " << row.step << " lr " << row.lr << " cost "
                    << row.mean_batch_cost;
          if (row.val_cost_ratio) std::cout << " val_ratio " << *row.val_cost_ratio;
          std::cout << '\n';
        }
      });
      if (!out.empty()) {
        mcr::save_checkpoint(result.checkpoint, out);
        std::cout << "checkpoint: " << out << '\n';
      }
      return kExitOk;
    }

    if (*eval_cmd) {
      auto ckpt = mcr::load_checkpoint(eval_checkpoint);
      std::uint64_t counter = 0;
      double ratio_sum = 0.0;
      for (int i = 0; i < eval_instances; ++i) {
        auto inst = mcr::attach_virtual_hub(mcr::sample_train_instance(
            eval_nodes, eval_users, eval_p, seed ^ 0x45564C31ULL, counter));
        double dp = mcr::dreyfus_wagner(inst).cost;
        double got =
            mcr::gpn_solve(ckpt.params, ckpt.model_config, inst, mcr::EnvConfig{}).cost;
        ratio_sum += got / dp;
      }
      std::cout << "mean_cost_ratio: " << ratio_sum / eval_instances << '\n';
      return kExitOk;
    }

    if (*bench_cmd || *inc_cmd || *abl_cmd) {
      mcr::SuiteConfig cfg;
      cfg.seed = seed;
      cfg.threads = threads;
      if (*bench_cmd) {
        cfg.suite = mcr::parse_suite(bench_suite);
        cfg.instances_per_point = bench_instances;
        cfg.checkpoint_path = bench_checkpoint;
        if (!bench_algos.empty()) {
          std::stringstream ss(bench_algos);
          std::string tag;
          while (std::getline(ss, tag, ',')) cfg.solvers.push_back(tag);
        }
      } else if (*inc_cmd) {
        cfg.suite = mcr::SuiteKind::Incremental;
        cfg.instances_per_point = inc_instances;
        cfg.checkpoint_path = inc_checkpoint;
      } else {
        cfg.suite = mcr::SuiteKind::Ablation;
        cfg.instances_per_point = abl_instances;
        if (!abl_full.empty()) cfg.ablation_checkpoints["full"] = abl_full;
        if (!abl_gcn.empty()) cfg.ablation_checkpoints["gcn"] = abl_gcn;
        if (!abl_nolstm.empty()) cfg.ablation_checkpoints["no-lstm"] = abl_nolstm;
        if (!abl_mlp.empty()) cfg.ablation_checkpoints["mlp"] = abl_mlp;
      }
      auto rows = mcr::run_suite(cfg);
      if (!out.empty()) mcr::write_csv(rows, out);
      std::cout << mcr::summary_block(rows);
      return kExitOk;
    }

    if (*viz_cmd) {
      auto inst = mcr::parse_instance(read_file(viz_instance));
      std::vector<std::pair<std::string, mcr::MulticastTree>> trees;
      for (const auto& spec : viz_trees) {
        auto eq = spec.find('=');
        if (eq == std::string::npos)
          throw mcr::InstanceError("--tree expects label=path, got " + spec);
        trees.emplace_back(spec.substr(0, eq),
                           mcr::parse_tree(read_file(spec.substr(eq + 1))));
      }
      std::string dot = mcr::export_dot(inst, trees);
      if (out.empty())
        std::cout << dot;
      else
        write_file(out, dot);
      return kExitOk;
    }
  } catch (const mcr::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const mcr::InstanceError& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const mcr::TreeError& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const mcr::CheckpointError& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
