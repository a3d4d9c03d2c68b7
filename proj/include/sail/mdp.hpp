#pragma once

#include <span>
#include <string>
#include <vector>

#include "sail/rng.hpp"

namespace sail {

// Explicit finite MDP: transition tensor P[s][a][s'], reward table R[s][a],
// discount gamma in [0, 1) and a terminal flag per state. Terminal states
// self-loop with zero reward and contribute zero continuation to backups.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [s][a][s'], row-major
  std::vector<double> reward;      // [s][a]
  std::vector<char> terminal;      // per state
  double gamma = 0.99;

  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double& p(int s, int a, int s2) {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
  double& r(int s, int a) { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
  bool is_terminal(int s) const { return terminal[s] != 0; }

  static TabularMdp empty(int n_states, int n_actions, double gamma);

  // Throws std::invalid_argument on bad shapes, probability rows that do not
  // sum to 1 within 1e-12, probabilities outside [0, 1], gamma outside
  // [0, 1), or terminal states that are not zero-reward self-loops.
  void validate() const;
};

// Plain action-value table for exact operator work.
struct QTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> values;  // [s][a]

  static QTable zeros(int n_states, int n_actions);

  double at(int s, int a) const { return values[static_cast<std::size_t>(s) * n_actions + a]; }
  double& at(int s, int a) { return values[static_cast<std::size_t>(s) * n_actions + a]; }
  std::span<const double> row(int s) const {
    return {values.data() + static_cast<std::size_t>(s) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }
  double state_value(int s) const;  // max over actions
};

// One episode as recorded: (state, action, reward) triples.
struct Trajectory {
  struct Step {
    int state = 0;
    int action = 0;
    double reward = 0.0;
  };
  std::vector<Step> steps;
  bool terminal_flag = false;
};

// Lowest index among the maxima; deterministic tie-break used everywhere.
int argmax_lowest(std::span<const double> values);

// returns[t] = sum_{t'>=t} gamma^(t'-t) * rewards[t'], computed in one
// backward pass. Empty input yields empty output.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

// out[s][a] = R[s][a] + gamma * sum_s' P[s][a][s'] * max_a' q[s'][a'],
// with zero continuation at terminal successor states.
QTable bellman_optimality_backup(const QTable& q, const TabularMdp& mdp);

// Gap-increasing backup: optimality backup plus alpha * (q[s][a] - max_a' q[s][a']).
// alpha must lie in [0, 1).
QTable al_backup(const QTable& q, const TabularMdp& mdp, double alpha);

// Iterates the optimality backup from zeros until the sup-norm residual
// drops below tol. Iteration cap of 1e6 guards malformed inputs.
QTable value_iteration(const TabularMdp& mdp, double tol = 1e-10);

// Iterates the gap-increasing backup from zeros until the sup-norm residual
// drops below tol. Same iteration cap as value_iteration.
QTable al_fixed_point(const TabularMdp& mdp, double alpha, double tol = 1e-10);

// gap[a] = max_a' q[s][a'] - q[s][a]; nonnegative, zero at the argmax.
std::vector<double> action_gap(const QTable& q, int s);

// q[s][a] - max_a' q[s][a'] under the max-value convention; always <= 0.
double advantage(const QTable& q, int s, int a);

// Per-state argmax with lowest-index tie-break.
std::vector<int> greedy_policy(const QTable& q);

// Mean over all (s, a) pairs of the per-action gap.
double mean_gap(const QTable& q);

// Plain-text MDP spec: a header line `states actions gamma`, then one line
// per (s, a) pair in s-major order holding the reward followed by n_states
// transition probabilities. `#` starts a comment. States whose actions all
// self-loop with zero reward are marked terminal on load.
TabularMdp parse_mdp(std::istream& in, const std::string& source_name);
TabularMdp load_mdp(const std::string& path);
void save_mdp(const TabularMdp& mdp, const std::string& path);

// Random dense MDP with Dirichlet-ish transition rows and rewards in [0, 1].
TabularMdp random_mdp(int n_states, int n_actions, double gamma, Rng& rng);

}  // namespace sail
