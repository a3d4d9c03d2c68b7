#include "sail/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "sail/agent.hpp"
#include "sail/mdp.hpp"
#include "sail/replay.hpp"
#include "sail/rng.hpp"

namespace sail {

namespace {

constexpr std::size_t kDiagnosticBatch = 256;

struct EvalOutcome {
  double mean_return = 0.0;
  std::vector<int> visited_states;
};

EvalOutcome evaluate_policy(const QFunction& online, Env& eval_env, const EvalConfig& eval,
                            std::uint64_t seed, std::int64_t eval_index) {
  EvalOutcome outcome;
  Rng policy_rng(derive_seed(seed, Stream::EvalEnv, static_cast<std::uint64_t>(eval_index)));
  for (int ep = 0; ep < eval.episodes; ++ep) {
    const std::uint64_t episode_seed = derive_seed(
        seed, Stream::EvalEnv,
        static_cast<std::uint64_t>(eval_index) * 1000003ULL + static_cast<std::uint64_t>(ep) + 1);
    Trajectory trajectory;
    int obs = eval_env.reset(episode_seed);
    outcome.visited_states.push_back(obs);
    bool done = false;
    while (!done) {
      const std::vector<double> qvals = online.q_values(obs);
      const int action = epsilon_greedy(qvals, eval.epsilon, policy_rng);
      const EnvStep step = eval_env.step(action);
      trajectory.steps.push_back({obs, action, step.reward});
      obs = step.next_observation;
      outcome.visited_states.push_back(obs);
      done = step.done;
      trajectory.terminal_flag = step.done && !step.truncated;
    }
    for (const Trajectory::Step& step : trajectory.steps) {
      outcome.mean_return += step.reward;
    }
  }
  outcome.mean_return /= static_cast<double>(eval.episodes);
  return outcome;
}

void check_params_finite(const QFunction& qf) {
  for (double v : qf.params()) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("training diverged: non-finite parameter");
    }
  }
}

}  // namespace

double TrainResult::final_eval_return() const {
  if (record.points.empty()) return std::numeric_limits<double>::quiet_NaN();
  return record.points.back().eval_return;
}

TrainResult train_single(const RunConfig& config, std::uint64_t seed) {
  config.validate();

  TrainResult result;
  std::unique_ptr<Env> env = make_env(config.env);
  std::unique_ptr<Env> eval_env = make_env(config.env);
  result.record.method = config.method_name();
  result.record.env = env->name();
  result.record.seed = seed;

  Agent agent(config.agent, env->n_states(), env->n_actions(),
              Rng(derive_seed(seed, Stream::AgentInit)));
  ReplayBuffer buffer(config.replay.capacity);
  Rng explore_rng(derive_seed(seed, Stream::Exploration));
  Rng replay_rng(derive_seed(seed, Stream::ReplaySampling));
  Rng diag_rng(derive_seed(seed, Stream::Diagnostics));

  std::uint64_t episode_index = 0;
  int obs = env->reset(derive_seed(seed, Stream::EnvDynamics, episode_index));
  std::vector<TransitionRecord> batch;
  double loss_accum = 0.0;
  std::int64_t loss_count = 0;
  std::int64_t eval_index = 0;

  try {
    for (std::int64_t step_no = 1; step_no <= config.total_steps; ++step_no) {
      const int action = agent.act(obs, explore_rng);
      const EnvStep step = env->step(action);

      TransitionRecord record;
      record.state = obs;
      record.action = action;
      record.reward = step.reward;
      record.next_state = step.next_observation;
      // Truncated cutoffs keep done=false so TD targets still bootstrap.
      record.done = step.done && !step.truncated;
      buffer.store(std::move(record));

      if (step.done) {
        buffer.finalize_episode(config.agent.gamma, step.truncated);
        ++episode_index;
        obs = env->reset(derive_seed(seed, Stream::EnvDynamics, episode_index));
      } else {
        obs = step.next_observation;
      }

      if (buffer.finalized_size() >= config.replay.warmup &&
          buffer.sample_uniform(static_cast<std::size_t>(config.agent.batch_size), replay_rng,
                                batch)) {
        loss_accum += agent.update(batch);
        ++loss_count;
      }

      if (step_no % config.eval.period == 0) {
        check_params_finite(agent.online());
        const EvalOutcome eval =
            evaluate_policy(agent.online(), *eval_env, config.eval, seed, eval_index);
        EvalPoint point;
        point.step = step_no;
        point.eval_return = eval.mean_return;
        point.mean_action_gap = mean_action_gap(agent.online(), eval.visited_states);
        double bonus = 0.0;
        if (buffer.finalized_size() > 0) {
          std::vector<TransitionRecord> diag;
          buffer.sample_uniform(std::min(kDiagnosticBatch, buffer.finalized_size()), diag_rng,
                                diag);
          point.stale_fraction = stale_fraction(diag, agent.target());
          bonus = bonus_magnitude(agent.target(), diag, config.agent);
        }
        point.loss = loss_count > 0 ? loss_accum / static_cast<double>(loss_count) : 0.0;
        loss_accum = 0.0;
        loss_count = 0;
        result.record.points.push_back(point);
        result.bonus_magnitude.emplace_back(step_no, bonus);
        ++eval_index;
      }
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.failure_reason = e.what();
  }

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::ostringstream name;
    name << result.record.method << "_" << result.record.env << "_seed" << seed;
    result.csv_path = config.out_dir + "/" + name.str() + ".csv";
    emit_csv(std::span<const RunRecord>(&result.record, 1), result.csv_path);
    if (config.dump_buffer) {
      const std::string dump_path = config.out_dir + "/" + name.str() + "_buffer.csv";
      std::ofstream dump(dump_path);
      if (!dump) {
        throw std::runtime_error(dump_path + ": cannot open buffer dump for writing");
      }
      buffer.dump_csv(dump);
    }
    if (config.save_checkpoints) {
      agent.online().save(config.out_dir + "/" + name.str() + ".qf");
    }
  }
  return result;
}

namespace {

// Per-state action toward the nearest terminal transition, via backward
// breadth-first search over the deterministic transition model.
std::vector<int> shortest_path_policy(const KeyDoorTreasureEnv& env) {
  const int n = env.n_states();
  std::vector<int> action(n, 0);
  std::vector<int> dist(n, -1);
  std::vector<std::vector<std::pair<int, int>>> incoming(n);  // next -> (state, action)
  std::vector<int> frontier;
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < env.n_actions(); ++a) {
      const auto outcome = env.simulate(s, a);
      if (outcome.terminal) {
        if (dist[s] < 0) {
          dist[s] = 1;
          action[s] = a;
          frontier.push_back(s);
        }
      } else if (outcome.next_state != s) {
        incoming[outcome.next_state].emplace_back(s, a);
      }
    }
  }
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const int s = frontier[head];
    for (const auto& [prev, a] : incoming[s]) {
      if (dist[prev] < 0) {
        dist[prev] = dist[s] + 1;
        action[prev] = a;
        frontier.push_back(prev);
      }
    }
  }
  return action;
}

double scripted_policy_return(Env& env, const std::vector<int>& policy, int episodes,
                              std::uint64_t seed) {
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    int obs = env.reset(derive_seed(seed, Stream::EvalEnv, static_cast<std::uint64_t>(ep) + 1));
    bool done = false;
    while (!done) {
      const EnvStep step = env.step(policy[obs]);
      total += step.reward;
      obs = step.next_observation;
      done = step.done;
    }
  }
  return total / episodes;
}

}  // namespace

BaselineAnchors compute_anchors(const EnvConfig& env_config, int episodes, std::uint64_t seed) {
  BaselineAnchors anchors;
  std::unique_ptr<Env> env = make_env(env_config);
  anchors.s_random = random_policy_return(*env, episodes, seed);

  std::vector<int> policy;
  if (env_config.name == "keydoor") {
    GridMap map = env_config.map_file.empty() ? default_key_door_treasure_map()
                                              : load_grid_map(env_config.map_file);
    const KeyDoorTreasureEnv model(std::move(map),
                                   env_config.step_limit > 0 ? env_config.step_limit : 300);
    policy = shortest_path_policy(model);
  } else {
    policy.assign(static_cast<std::size_t>(env->n_states()), 1);  // chain: always right
  }
  anchors.s_reference = scripted_policy_return(*env, policy, episodes, seed ^ 0x5eedULL);
  return anchors;
}

std::vector<TrainResult> train_all(const RunConfig& config, int workers) {
  config.validate();
  const std::size_t n_runs = config.seeds.size();
  std::vector<TrainResult> results(n_runs);
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  const std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(workers), n_runs);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= n_runs) break;
      try {
        results[idx] = train_single(config, config.seeds[idx]);
      } catch (const std::exception& e) {
        results[idx].failed = true;
        results[idx].failure_reason = e.what();
        results[idx].record.method = config.method_name();
        results[idx].record.env = config.env.name;
        results[idx].record.seed = config.seeds[idx];
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  return results;
}

}  // namespace sail
