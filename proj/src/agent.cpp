#include "sail/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sail/mdp.hpp"

namespace sail {

const char* loss_variant_name(LossVariant v) {
  switch (v) {
    case LossVariant::Dqn: return "dqn";
    case LossVariant::Al: return "al";
    case LossVariant::StrSil: return "strsil";
    case LossVariant::Sail: return "sail";
  }
  return "?";
}

ClipBounds ClipBounds::none() {
  return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
}

double ClipBounds::clamp(double bonus) const { return std::clamp(bonus, low, high); }

void AgentConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("AgentConfig: alpha must lie in [0, 1)");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("AgentConfig: gamma must lie in [0, 1)");
  }
  if (!(bonus_clip.low <= 0.0 && 0.0 <= bonus_clip.high)) {
    throw std::invalid_argument("AgentConfig: bonus clip must bracket zero");
  }
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) ||
      !(epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw std::invalid_argument("AgentConfig: epsilon bounds must lie in [0, 1]");
  }
  if (epsilon_decay_steps <= 0 || target_sync_period <= 0 || batch_size <= 0) {
    throw std::invalid_argument("AgentConfig: schedule and batch fields must be positive");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("AgentConfig: learning rate must be positive");
  }
  if (representation == Representation::Mlp && hidden_width <= 0) {
    throw std::invalid_argument("AgentConfig: mlp needs a positive hidden width");
  }
}

namespace {
void check_value_pair(double q_sa, double q_max) {
  if (q_sa > q_max + 1e-9) {
    throw std::logic_error("modified reward: q_sa exceeds the row maximum it came from");
  }
}
}  // namespace

double sail_modified_reward(double r, double mc_return, double q_sa, double q_max,
                            double alpha, ClipBounds clip) {
  check_value_pair(q_sa, q_max);
  const double bonus = alpha * (std::max(mc_return, q_sa) - q_max);
  return r + clip.clamp(bonus);
}

double al_modified_reward(double r, double q_sa, double q_max, double alpha,
                          ClipBounds clip) {
  check_value_pair(q_sa, q_max);
  const double bonus = alpha * (q_sa - q_max);
  return r + clip.clamp(bonus);
}

double strsil_modified_reward(double r, double mc_return, double q_max, double alpha,
                              ClipBounds clip) {
  const double bonus = alpha * std::max(0.0, mc_return - q_max);
  return r + clip.clamp(bonus);
}

double td_target(double r_mod, double gamma, double q_target_next_max, bool done) {
  return done ? r_mod : r_mod + gamma * q_target_next_max;
}

int epsilon_greedy(std::span<const double> qvals, double epsilon, Rng& rng) {
  if (rng.uniform01() < epsilon) {
    return rng.uniform_index(static_cast<int>(qvals.size()));
  }
  return argmax_lowest(qvals);
}

namespace {

double modified_reward(const TransitionRecord& rec, const QFunction& target_qf,
                       const AgentConfig& config) {
  if (config.loss_variant == LossVariant::Dqn) {
    return rec.reward;
  }
  if (!rec.mc_return.has_value()) {
    throw std::logic_error("loss: batch contains a record with the return placeholder");
  }
  const std::vector<double> row = target_qf.q_values(rec.state);
  const double q_sa = row[rec.action];
  const double q_max = *std::max_element(row.begin(), row.end());
  switch (config.loss_variant) {
    case LossVariant::Al:
      return al_modified_reward(rec.reward, q_sa, q_max, config.alpha, config.bonus_clip);
    case LossVariant::StrSil:
      return strsil_modified_reward(rec.reward, *rec.mc_return, q_max, config.alpha,
                                    config.bonus_clip);
    case LossVariant::Sail:
      return sail_modified_reward(rec.reward, *rec.mc_return, q_sa, q_max, config.alpha,
                                  config.bonus_clip);
    case LossVariant::Dqn: break;
  }
  return rec.reward;
}

}  // namespace

LossResult loss_and_grad(const QFunction& qf, const QFunction& target_qf,
                         std::span<const TransitionRecord> batch, const AgentConfig& config) {
  if (batch.empty()) {
    throw std::invalid_argument("loss_and_grad: empty batch");
  }
  for (const TransitionRecord& rec : batch) {
    if (!rec.mc_return.has_value()) {
      throw std::logic_error("loss_and_grad: batch contains a record with the return placeholder");
    }
  }
  LossResult result;
  result.grad.assign(qf.params().size(), 0.0);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (const TransitionRecord& rec : batch) {
    const double r_mod = modified_reward(rec, target_qf, config);
    const double next_max = rec.done ? 0.0 : target_qf.max_q(rec.next_state);
    const double target = td_target(r_mod, config.gamma, next_max, rec.done);
    const double q_online = qf.q_value(rec.state, rec.action);
    const double diff = q_online - target;
    result.loss += 0.5 * diff * diff;
    qf.accumulate_grad(rec.state, rec.action, diff * inv_batch, result.grad);
    result.mean_bonus_abs += std::abs(r_mod - rec.reward);
  }
  result.loss *= inv_batch;
  result.mean_bonus_abs *= inv_batch;
  return result;
}

double bonus_magnitude(const QFunction& target_qf, std::span<const TransitionRecord> batch,
                       const AgentConfig& config) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const TransitionRecord& rec : batch) {
    total += std::abs(modified_reward(rec, target_qf, config) - rec.reward);
  }
  return total / static_cast<double>(batch.size());
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::size_t n_params)
    : kind_(kind), learning_rate_(learning_rate) {
  if (kind_ != OptimizerKind::Sgd) {
    second_moment_.assign(n_params, 0.0);
  }
  if (kind_ == OptimizerKind::Adam) {
    first_moment_.assign(n_params, 0.0);
  }
}

void Optimizer::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (params.size() != grad.size()) {
    throw std::invalid_argument("Optimizer: parameter/gradient shape mismatch");
  }
  const std::size_t n = params.size();
  const double* __restrict g = grad.data();
  // x - x is zero for finite x and NaN for inf/NaN, so a zero sum certifies
  // a finite gradient without a branch per entry.
  double residue = 0.0;
  for (std::size_t i = 0; i < n; ++i) residue += g[i] - g[i];
  if (residue != 0.0) {
    throw std::runtime_error("Optimizer: non-finite gradient, aborting the run");
  }
  ++step_count_;
  double* __restrict p = params.data();
  switch (kind_) {
    case OptimizerKind::Sgd:
      for (std::size_t i = 0; i < n; ++i) {
        p[i] -= learning_rate_ * g[i];
      }
      break;
    case OptimizerKind::RmsProp: {
      constexpr double kDecay = 0.95;
      constexpr double kEps = 1e-6;
      double* __restrict v = second_moment_.data();
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = kDecay * v[i] + (1.0 - kDecay) * g[i] * g[i];
        p[i] -= learning_rate_ * g[i] / (std::sqrt(v[i]) + kEps);
      }
      break;
    }
    case OptimizerKind::Adam: {
      constexpr double kBeta1 = 0.9;
      constexpr double kBeta2 = 0.999;
      constexpr double kEps = 1e-8;
      const double inv_correction1 = 1.0 / (1.0 - std::pow(kBeta1, static_cast<double>(step_count_)));
      const double inv_correction2 = 1.0 / (1.0 - std::pow(kBeta2, static_cast<double>(step_count_)));
      double* __restrict m = first_moment_.data();
      double* __restrict v = second_moment_.data();
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
        const double m_hat = m[i] * inv_correction1;
        const double v_hat = v[i] * inv_correction2;
        p[i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + kEps);
      }
      break;
    }
  }
}

namespace {
QFunction build_qfunction(const AgentConfig& config, int n_states, int n_actions) {
  switch (config.representation) {
    case Representation::Tabular: return QFunction::tabular(n_states, n_actions);
    case Representation::Linear: return QFunction::linear(n_states, n_actions);
    case Representation::Mlp: return QFunction::mlp(n_states, n_actions, config.hidden_width);
  }
  throw std::invalid_argument("Agent: unknown representation");
}
}  // namespace

Agent::Agent(const AgentConfig& config, int n_states, int n_actions, Rng init_rng)
    : config_(config),
      online_(build_qfunction(config, n_states, n_actions)),
      target_(online_),
      optimizer_(config.optimizer, config.learning_rate, online_.params().size()) {
  config_.validate();
  online_.init_params(init_rng);
  target_ = online_;  // the target starts as a copy of the initial weights
}

double Agent::epsilon() const {
  const double fraction =
      std::max(0.0, 1.0 - static_cast<double>(env_steps_) /
                              static_cast<double>(config_.epsilon_decay_steps));
  return config_.epsilon_end + (config_.epsilon_start - config_.epsilon_end) * fraction;
}

int Agent::act(int state, Rng& exploration_rng) {
  const std::vector<double> qvals = online_.q_values(state);
  const int action = epsilon_greedy(qvals, epsilon(), exploration_rng);
  ++env_steps_;
  return action;
}

double Agent::update(std::span<const TransitionRecord> batch) {
  LossResult result = loss_and_grad(online_, target_, batch, config_);
  optimizer_.step(online_.params(), result.grad);
  last_bonus_abs_ = result.mean_bonus_abs;
  ++updates_;
  if (updates_ % config_.target_sync_period == 0) {
    sync_target();
  }
  return result.loss;
}

void Agent::sync_target() { target_ = online_; }

}  // namespace sail
