#pragma once

#include <span>
#include <string>
#include <vector>

#include "sail/qfunction.hpp"
#include "sail/replay.hpp"
#include "sail/rng.hpp"

namespace sail {

enum class LossVariant { Dqn, Al, StrSil, Sail };
enum class OptimizerKind { Sgd, RmsProp, Adam };

const char* loss_variant_name(LossVariant v);

// Clamp window applied to reward bonuses before they are added to the raw
// reward. Environment rewards themselves are never clipped here.
struct ClipBounds {
  double low = -1.0;
  double high = 1.0;

  static ClipBounds none();  // +-infinity, i.e. clipping disabled
  double clamp(double bonus) const;
};

struct AgentConfig {
  LossVariant loss_variant = LossVariant::Sail;
  Representation representation = Representation::Mlp;
  int hidden_width = 64;
  double alpha = 0.9;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_steps = 20000;
  int target_sync_period = 500;
  ClipBounds bonus_clip;
  double learning_rate = 5e-4;
  int batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::Adam;

  void validate() const;
};

// r + clamp(alpha * (max(G, q_sa) - q_max)). Both q terms come from the
// target network. Falls back to the advantage-learning reward when the
// return no longer exceeds the action-value estimate.
double sail_modified_reward(double r, double mc_return, double q_sa, double q_max,
                            double alpha, ClipBounds clip);

// r + clamp(alpha * (q_sa - q_max)); the bonus is never positive.
double al_modified_reward(double r, double q_sa, double q_max, double alpha,
                          ClipBounds clip);

// r + clamp(alpha * max(0, G - q_max)); the bonus is never negative.
double strsil_modified_reward(double r, double mc_return, double q_max, double alpha,
                              ClipBounds clip);

// r_mod + gamma * max_a Q_target(s', a), with zero bootstrap on terminals.
double td_target(double r_mod, double gamma, double q_target_next_max, bool done);

// With probability epsilon a uniform action, otherwise the lowest-index argmax.
int epsilon_greedy(std::span<const double> qvals, double epsilon, Rng& rng);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;
  double mean_bonus_abs = 0.0;  // mean |r_mod - r| over the batch
};

// Mean over the batch of 0.5 * (target - Q(s, a))^2. The target -- modified
// reward plus bootstrap, both read from the target network -- is a constant;
// the gradient flows only through Q(s, a) of the online network. Throws on
// placeholder returns in the batch.
LossResult loss_and_grad(const QFunction& qf, const QFunction& target_qf,
                         std::span<const TransitionRecord> batch, const AgentConfig& config);

// Mean |r_mod - r| a batch would receive under the config's loss variant.
double bonus_magnitude(const QFunction& target_qf, std::span<const TransitionRecord> batch,
                       const AgentConfig& config);

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, std::size_t n_params);

  // Applies one update in place. Throws std::runtime_error on a non-finite
  // gradient so callers can abort the run with a diagnostic.
  void step(std::vector<double>& params, const std::vector<double>& grad);

  OptimizerKind kind() const { return kind_; }

 private:
  OptimizerKind kind_;
  double learning_rate_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  long step_count_ = 0;
};

// Online/target pair plus exploration schedule and optimizer; one per run.
class Agent {
 public:
  Agent(const AgentConfig& config, int n_states, int n_actions, Rng init_rng);

  // Epsilon-greedy action for one environment step; advances the schedule.
  int act(int state, Rng& exploration_rng);

  // One gradient step on a sampled batch; syncs the target copy every
  // target_sync_period updates. Returns the batch loss.
  double update(std::span<const TransitionRecord> batch);

  void sync_target();

  double epsilon() const;  // current schedule value
  long env_steps() const { return env_steps_; }
  long updates() const { return updates_; }
  double last_bonus_abs() const { return last_bonus_abs_; }

  const QFunction& online() const { return online_; }
  const QFunction& target() const { return target_; }
  const AgentConfig& config() const { return config_; }

 private:
  AgentConfig config_;
  QFunction online_;
  QFunction target_;
  Optimizer optimizer_;
  long env_steps_ = 0;
  long updates_ = 0;
  double last_bonus_abs_ = 0.0;
};

}  // namespace sail
