#include "sail/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sail {

TabularMdp TabularMdp::empty(int n_states, int n_actions, double gamma) {
  if (n_states <= 0 || n_actions <= 0) {
    throw std::invalid_argument("TabularMdp: n_states and n_actions must be positive");
  }
  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.transition.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
  mdp.reward.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
  mdp.terminal.assign(n_states, 0);
  return mdp;
}

void TabularMdp::validate() const {
  if (n_states <= 0 || n_actions <= 0) {
    throw std::invalid_argument("TabularMdp: empty state or action space");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("TabularMdp: gamma must lie in [0, 1)");
  }
  const std::size_t want_p = static_cast<std::size_t>(n_states) * n_actions * n_states;
  const std::size_t want_r = static_cast<std::size_t>(n_states) * n_actions;
  if (transition.size() != want_p || reward.size() != want_r ||
      terminal.size() != static_cast<std::size_t>(n_states)) {
    throw std::invalid_argument("TabularMdp: table shapes disagree with n_states/n_actions");
  }
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      if (!std::isfinite(r(s, a))) {
        throw std::invalid_argument("TabularMdp: non-finite reward");
      }
      double row_sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double prob = p(s, a, s2);
        if (!(prob >= 0.0 && prob <= 1.0)) {
          throw std::invalid_argument("TabularMdp: probability outside [0, 1]");
        }
        row_sum += prob;
      }
      if (std::abs(row_sum - 1.0) > 1e-12) {
        throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
      }
      if (is_terminal(s) && (p(s, a, s) != 1.0 || r(s, a) != 0.0)) {
        throw std::invalid_argument("TabularMdp: terminal state must self-loop with zero reward");
      }
    }
  }
}

QTable QTable::zeros(int n_states, int n_actions) {
  QTable q;
  q.n_states = n_states;
  q.n_actions = n_actions;
  q.values.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
  return q;
}

double QTable::state_value(int s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> returns(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    returns[i] = acc;
  }
  return returns;
}

namespace {
void check_shapes(const QTable& q, const TabularMdp& mdp) {
  if (q.n_states != mdp.n_states || q.n_actions != mdp.n_actions) {
    throw std::invalid_argument("QTable shape does not match the MDP");
  }
}
}  // namespace

QTable bellman_optimality_backup(const QTable& q, const TabularMdp& mdp) {
  check_shapes(q, mdp);
  QTable out = QTable::zeros(mdp.n_states, mdp.n_actions);
  std::vector<double> continuation(mdp.n_states);
  for (int s2 = 0; s2 < mdp.n_states; ++s2) {
    continuation[s2] = mdp.is_terminal(s2) ? 0.0 : q.state_value(s2);
  }
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      double acc = 0.0;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        acc += mdp.p(s, a, s2) * continuation[s2];
      }
      out.at(s, a) = mdp.r(s, a) + mdp.gamma * acc;
    }
  }
  return out;
}

QTable al_backup(const QTable& q, const TabularMdp& mdp, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("al_backup: alpha must lie in [0, 1)");
  }
  QTable out = bellman_optimality_backup(q, mdp);
  for (int s = 0; s < mdp.n_states; ++s) {
    const double v = q.state_value(s);
    for (int a = 0; a < mdp.n_actions; ++a) {
      out.at(s, a) += alpha * (q.at(s, a) - v);
    }
  }
  return out;
}

namespace {
constexpr long kIterationCap = 1000000;

template <typename Backup>
QTable iterate_to_fixed_point(const TabularMdp& mdp, double tol, Backup&& backup,
                              const char* what) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument(std::string(what) + ": tol must be positive");
  }
  QTable q = QTable::zeros(mdp.n_states, mdp.n_actions);
  for (long iter = 0; iter < kIterationCap; ++iter) {
    QTable next = backup(q);
    double residual = 0.0;
    for (std::size_t i = 0; i < q.values.size(); ++i) {
      residual = std::max(residual, std::abs(next.values[i] - q.values[i]));
    }
    q = std::move(next);
    if (residual < tol) return q;
  }
  throw std::runtime_error(std::string(what) + ": no convergence within 1e6 iterations "
                           "(malformed MDP?)");
}
}  // namespace

QTable value_iteration(const TabularMdp& mdp, double tol) {
  mdp.validate();
  return iterate_to_fixed_point(
      mdp, tol, [&](const QTable& q) { return bellman_optimality_backup(q, mdp); },
      "value_iteration");
}

QTable al_fixed_point(const TabularMdp& mdp, double alpha, double tol) {
  mdp.validate();
  return iterate_to_fixed_point(
      mdp, tol, [&](const QTable& q) { return al_backup(q, mdp, alpha); },
      "al_fixed_point");
}

std::vector<double> action_gap(const QTable& q, int s) {
  if (s < 0 || s >= q.n_states) {
    throw std::out_of_range("action_gap: state index out of range");
  }
  const double v = q.state_value(s);
  std::vector<double> gaps(q.n_actions);
  for (int a = 0; a < q.n_actions; ++a) {
    gaps[a] = v - q.at(s, a);
  }
  return gaps;
}

double advantage(const QTable& q, int s, int a) {
  if (s < 0 || s >= q.n_states || a < 0 || a >= q.n_actions) {
    throw std::out_of_range("advantage: index out of range");
  }
  return q.at(s, a) - q.state_value(s);
}

std::vector<int> greedy_policy(const QTable& q) {
  std::vector<int> policy(q.n_states);
  for (int s = 0; s < q.n_states; ++s) {
    policy[s] = argmax_lowest(q.row(s));
  }
  return policy;
}

double mean_gap(const QTable& q) {
  double total = 0.0;
  for (int s = 0; s < q.n_states; ++s) {
    for (double g : action_gap(q, s)) total += g;
  }
  return total / (static_cast<double>(q.n_states) * q.n_actions);
}

namespace {

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& msg) {
  throw std::runtime_error(source + ":" + std::to_string(line) + ": " + msg);
}

// Strips comments, returns false for blank lines.
bool logical_line(std::string& line) {
  if (auto hash = line.find('#'); hash != std::string::npos) {
    line.erase(hash);
  }
  return line.find_first_not_of(" \t\r\n") != std::string::npos;
}

}  // namespace

TabularMdp parse_mdp(std::istream& in, const std::string& source_name) {
  std::string line;
  int line_no = 0;
  int n_states = 0, n_actions = 0;
  double gamma = 0.0;
  bool have_header = false;
  TabularMdp mdp;
  int pair = 0;  // (s, a) rows consumed so far
  int n_pairs = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!logical_line(line)) continue;
    std::istringstream fields(line);
    if (!have_header) {
      if (!(fields >> n_states >> n_actions >> gamma)) {
        parse_fail(source_name, line_no, "expected header `states actions gamma`");
      }
      if (n_states <= 0 || n_actions <= 0) {
        parse_fail(source_name, line_no, "states and actions must be positive");
      }
      if (!(gamma >= 0.0 && gamma < 1.0)) {
        parse_fail(source_name, line_no, "gamma must lie in [0, 1)");
      }
      mdp = TabularMdp::empty(n_states, n_actions, gamma);
      n_pairs = n_states * n_actions;
      have_header = true;
      continue;
    }
    if (pair >= n_pairs) {
      parse_fail(source_name, line_no, "extra data after the last (state, action) row");
    }
    const int s = pair / n_actions;
    const int a = pair % n_actions;
    double reward = 0.0;
    if (!(fields >> reward)) {
      parse_fail(source_name, line_no, "expected a reward value");
    }
    mdp.r(s, a) = reward;
    for (int s2 = 0; s2 < n_states; ++s2) {
      double prob = 0.0;
      if (!(fields >> prob)) {
        parse_fail(source_name, line_no,
                   "expected " + std::to_string(n_states) + " transition probabilities");
      }
      mdp.p(s, a, s2) = prob;
    }
    double extra;
    if (fields >> extra) {
      parse_fail(source_name, line_no, "trailing values after the transition row");
    }
    ++pair;
  }
  if (!have_header) {
    parse_fail(source_name, line_no, "missing header `states actions gamma`");
  }
  if (pair < n_pairs) {
    parse_fail(source_name, line_no,
               "expected " + std::to_string(n_pairs) + " (state, action) rows, got " +
                   std::to_string(pair));
  }

  // A state whose actions all self-loop with zero reward is terminal.
  for (int s = 0; s < n_states; ++s) {
    bool absorbing = true;
    for (int a = 0; a < n_actions && absorbing; ++a) {
      absorbing = mdp.p(s, a, s) == 1.0 && mdp.r(s, a) == 0.0;
    }
    mdp.terminal[s] = absorbing ? 1 : 0;
  }

  try {
    mdp.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(source_name + ": " + e.what());
  }
  return mdp;
}

TabularMdp load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open MDP file");
  }
  return parse_mdp(in, path);
}

void save_mdp(const TabularMdp& mdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out.precision(17);
  out << mdp.n_states << " " << mdp.n_actions << " " << mdp.gamma << "\n";
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      out << mdp.r(s, a);
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        out << " " << mdp.p(s, a, s2);
      }
      out << "\n";
    }
  }
  if (!out.good()) {
    throw std::runtime_error(path + ": write failed");
  }
}

TabularMdp random_mdp(int n_states, int n_actions, double gamma, Rng& rng) {
  TabularMdp mdp = TabularMdp::empty(n_states, n_actions, gamma);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      mdp.r(s, a) = rng.uniform01();
      double row_sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double w = rng.uniform01() + 1e-3;
        mdp.p(s, a, s2) = w;
        row_sum += w;
      }
      double renorm = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        mdp.p(s, a, s2) /= row_sum;
        renorm += mdp.p(s, a, s2);
      }
      // Push rounding residue into the last entry so the row sums to 1 exactly.
      mdp.p(s, a, n_states - 1) += 1.0 - renorm;
    }
  }
  mdp.validate();
  return mdp;
}

}  // namespace sail
