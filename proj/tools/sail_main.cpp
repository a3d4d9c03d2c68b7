// Experiment driver: seeded training runs, method comparisons, exact
// operator reports and sweeps over loss variants / stickiness / alpha.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sail/config.hpp"
#include "sail/mdp.hpp"
#include "sail/metrics.hpp"
#include "sail/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRunFailure = 2;

struct TrainFlags {
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  std::string variant;
  std::string representation;
  double sticky = -1.0;
  double alpha = -1.0;
  std::int64_t steps = 0;
  std::string env_name;
  bool dump_buffer = false;
  int workers = 0;
};

sail::RunConfig resolve_config(const TrainFlags& flags) {
  sail::RunConfig config;
  if (!flags.config_path.empty()) {
    config = sail::load_run_config(flags.config_path);
  }
  if (!flags.seeds.empty()) config.seeds = flags.seeds;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (!flags.variant.empty()) config.agent.loss_variant = sail::parse_loss_variant(flags.variant);
  if (!flags.representation.empty()) {
    config.agent.representation = sail::parse_representation(flags.representation);
  }
  if (flags.sticky >= 0.0) config.env.sticky_p = flags.sticky;
  if (flags.alpha >= 0.0) config.agent.alpha = flags.alpha;
  if (flags.steps > 0) config.total_steps = flags.steps;
  if (!flags.env_name.empty()) config.env.name = flags.env_name;
  if (flags.dump_buffer) config.dump_buffer = true;
  config.validate();
  return config;
}

int report_results(const std::vector<sail::TrainResult>& results) {
  bool any_failed = false;
  for (const sail::TrainResult& result : results) {
    if (result.failed) {
      any_failed = true;
      std::cout << "seed " << result.record.seed << "  FAILED: " << result.failure_reason << "\n";
      continue;
    }
    std::cout << "seed " << result.record.seed << "  final eval return "
              << sail::format_double(result.final_eval_return());
    if (!result.csv_path.empty()) std::cout << "  -> " << result.csv_path;
    std::cout << "\n";
  }
  return any_failed ? kExitRunFailure : kExitOk;
}

int cmd_train(const TrainFlags& flags) {
  const sail::RunConfig config = resolve_config(flags);
  const std::vector<sail::TrainResult> results = sail::train_all(config, flags.workers);
  return report_results(results);
}

int cmd_compare(const std::string& path_a, const std::string& path_b, double eps,
                const std::string& out_path) {
  const std::vector<sail::RunRecord> runs_a = sail::parse_csv(path_a);
  const std::vector<sail::RunRecord> runs_b = sail::parse_csv(path_b);
  const std::vector<sail::SummaryRow> rows = sail::compare_methods(runs_a, runs_b, eps);
  for (const sail::SummaryRow& row : rows) {
    std::cout << row.method << " on " << row.env << ": relative improvement "
              << sail::format_double(100.0 * row.rel_improvement_vs_baseline)
              << "%, final mean " << sail::format_double(row.final_score_mean)
              << ", final median " << sail::format_double(row.final_score_median) << "\n";
  }
  if (!out_path.empty()) {
    sail::emit_summary_csv(rows, out_path);
    std::cout << "summary written to " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_oracle(const std::string& mdp_path, int states, int actions, double gamma,
               std::uint64_t mdp_seed, double alpha, double tol) {
  sail::TabularMdp mdp;
  if (!mdp_path.empty()) {
    mdp = sail::load_mdp(mdp_path);
  } else {
    sail::Rng rng(sail::derive_seed(mdp_seed, sail::Stream::MdpGen));
    mdp = sail::random_mdp(states, actions, gamma, rng);
  }
  const sail::QTable q_star = sail::value_iteration(mdp, tol);
  const sail::QTable q_al = sail::al_fixed_point(mdp, alpha, tol);
  const std::vector<int> policy_star = sail::greedy_policy(q_star);
  const std::vector<int> policy_al = sail::greedy_policy(q_al);

  int agree = 0;
  for (int s = 0; s < mdp.n_states; ++s) {
    if (policy_star[s] == policy_al[s]) ++agree;
  }
  const double gap_star = sail::mean_gap(q_star);
  const double gap_al = sail::mean_gap(q_al);
  const double ratio = gap_star > 0.0 ? gap_al / gap_star : 1.0;

  std::cout << "mdp: " << mdp.n_states << " states, " << mdp.n_actions << " actions, gamma "
            << sail::format_double(mdp.gamma) << ", alpha " << sail::format_double(alpha) << "\n";
  std::cout << "greedy policy agreement: "
            << sail::format_double(100.0 * agree / static_cast<double>(mdp.n_states)) << "% ("
            << agree << "/" << mdp.n_states << " states)\n";
  std::cout << "mean action gap (optimal): " << sail::format_double(gap_star) << "\n";
  std::cout << "mean action gap (AL fixed point): " << sail::format_double(gap_al) << "\n";
  std::cout << "gap ratio: " << sail::format_double(ratio) << "\n";
  return kExitOk;
}

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_sweep(const std::string& config_path, const std::string& axis, const std::string& values,
              const std::string& out_dir, double eps, int workers) {
  sail::RunConfig base;
  if (!config_path.empty()) base = sail::load_run_config(config_path);
  if (!out_dir.empty()) base.out_dir = out_dir;

  std::string value_list = values;
  if (value_list.empty()) {
    if (axis == "variant") value_list = "dqn,al,strsil,sail";
    else if (axis == "stickiness") value_list = "0,0.25,0.5";
    else if (axis == "alpha") value_list = "0,0.5,0.9";
  }
  const std::vector<std::string> axis_values = split_values(value_list);
  if (axis_values.empty()) {
    throw std::invalid_argument("sweep: empty axis value list");
  }

  std::vector<sail::RunConfig> configs;
  for (const std::string& value : axis_values) {
    sail::RunConfig config = base;
    if (axis == "variant") {
      config.agent.loss_variant = sail::parse_loss_variant(value);
      config.method_label.clear();
    } else if (axis == "stickiness") {
      config.env.sticky_p = sail::parse_double(value);
    } else if (axis == "alpha") {
      config.agent.alpha = sail::parse_double(value);
      config.method_label = config.method_name() + "_alpha" + value;
    } else {
      throw std::invalid_argument("sweep: unknown axis '" + axis +
                                  "' (variant|stickiness|alpha)");
    }
    config.validate();
    configs.push_back(std::move(config));
  }

  bool any_failed = false;
  std::vector<std::vector<sail::RunRecord>> per_value_records(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::cout << "== sweep " << axis << " = " << axis_values[i] << " ==\n";
    const std::vector<sail::TrainResult> results = sail::train_all(configs[i], workers);
    if (report_results(results) != kExitOk) any_failed = true;
    for (const sail::TrainResult& result : results) {
      if (!result.failed) per_value_records[i].push_back(result.record);
    }
  }

  // The first axis value acts as the sweep baseline.
  std::vector<sail::SummaryRow> summary;
  if (!per_value_records[0].empty()) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      if (per_value_records[i].empty()) continue;
      for (sail::SummaryRow& row :
           sail::compare_methods(per_value_records[i], per_value_records[0], eps)) {
        summary.push_back(std::move(row));
      }
    }
  }
  const std::string summary_path = base.out_dir + "/summary.csv";
  sail::emit_summary_csv(summary, summary_path);
  std::cout << "sweep summary written to " << summary_path << "\n";
  return any_failed ? kExitRunFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale value-based RL lab: self-imitation advantage learning and baselines"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  CLI::App* train = app.add_subcommand("train", "Run seeded training and write metrics CSVs");
  train->add_option("--config", train_flags.config_path, "Run config file");
  train->add_option("--seed", train_flags.seeds, "Seed (repeatable; overrides config)");
  train->add_option("--out", train_flags.out_dir, "Output directory");
  train->add_option("--variant", train_flags.variant, "Loss variant: dqn|al|strsil|sail");
  train->add_option("--representation", train_flags.representation,
                    "Q representation: tabular|linear|mlp");
  train->add_option("--sticky", train_flags.sticky, "Sticky-action repeat probability");
  train->add_option("--alpha", train_flags.alpha, "Bonus weight alpha");
  train->add_option("--steps", train_flags.steps, "Total environment steps");
  train->add_option("--env", train_flags.env_name, "Environment: keydoor|chain");
  train->add_flag("--dump-buffer", train_flags.dump_buffer, "Dump the replay buffer per seed");
  train->add_option("--workers", train_flags.workers, "Worker pool size (0 = CPU count)");

  std::string cmp_a, cmp_b, cmp_out;
  double cmp_eps = 1e-6;
  CLI::App* compare = app.add_subcommand("compare", "Relative improvement of A over baseline B");
  compare->add_option("--a", cmp_a, "Metrics CSV of the method")->required();
  compare->add_option("--b", cmp_b, "Metrics CSV of the baseline")->required();
  compare->add_option("--eps", cmp_eps, "Denominator epsilon");
  compare->add_option("--out", cmp_out, "Summary CSV path");

  std::string oracle_mdp;
  int oracle_states = 5, oracle_actions = 3;
  double oracle_gamma = 0.9, oracle_alpha = 0.9, oracle_tol = 1e-10;
  std::uint64_t oracle_seed = 1;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Exact operator report: optimal vs gap-increasing fixed point");
  oracle->add_option("--mdp", oracle_mdp, "MDP spec file (default: random MDP)");
  oracle->add_option("--states", oracle_states, "Random MDP states");
  oracle->add_option("--actions", oracle_actions, "Random MDP actions");
  oracle->add_option("--gamma", oracle_gamma, "Random MDP discount");
  oracle->add_option("--mdp-seed", oracle_seed, "Random MDP seed");
  oracle->add_option("--alpha", oracle_alpha, "Gap-increase weight");
  oracle->add_option("--tol", oracle_tol, "Fixed-point tolerance");

  std::string sweep_config, sweep_axis, sweep_values, sweep_out = "runs";
  double sweep_eps = 1e-6;
  int sweep_workers = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "Expand one axis and aggregate a summary");
  sweep->add_option("--config", sweep_config, "Base run config file");
  sweep->add_option("--axis", sweep_axis, "Axis: variant|stickiness|alpha")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated axis values");
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep->add_option("--eps", sweep_eps, "Comparison denominator epsilon");
  sweep->add_option("--workers", sweep_workers, "Worker pool size (0 = CPU count)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(train_flags);
    if (compare->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_eps, cmp_out);
    if (oracle->parsed()) {
      return cmd_oracle(oracle_mdp, oracle_states, oracle_actions, oracle_gamma, oracle_seed,
                        oracle_alpha, oracle_tol);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_config, sweep_axis, sweep_values, sweep_out, sweep_eps,
                       sweep_workers);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}
