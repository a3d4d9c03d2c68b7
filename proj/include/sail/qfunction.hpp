#pragma once

#include <span>
#include <string>
#include <vector>

#include "sail/rng.hpp"

namespace sail {

enum class Representation { Tabular, Linear, Mlp };

const char* representation_name(Representation rep);

// Action-value approximator over one-hot state encodings. Three
// representations share one flat parameter vector so the optimizers and the
// checkpoint format stay representation-agnostic:
//   tabular: q(s) = theta[s]                      (table rows)
//   linear:  q(s) = W one_hot(s) + b
//   mlp:     q(s) = W2 relu(W1 one_hot(s) + b1) + b2
class QFunction {
 public:
  static QFunction tabular(int n_states, int n_actions);
  static QFunction linear(int n_states, int n_actions);
  static QFunction mlp(int n_states, int n_actions, int hidden);

  // Uniform init scaled by fan-in on weight matrices, zero biases. The
  // tabular representation starts at zero regardless.
  void init_params(Rng& rng);

  std::vector<double> q_values(int state) const;
  double q_value(int state, int action) const;
  double max_q(int state) const;

  // Adds upstream * dQ(state, action)/dtheta to grad (same layout as params).
  void accumulate_grad(int state, int action, double upstream,
                       std::vector<double>& grad) const;

  Representation representation() const { return rep_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int hidden() const { return hidden_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Versioned little-endian binary checkpoint: header (magic, representation,
  // shapes, count) followed by the raw 64-bit parameters.
  void save(const std::string& path) const;
  static QFunction load(const std::string& path);

 private:
  QFunction(Representation rep, int n_states, int n_actions, int hidden);

  // Parameter layout offsets.
  std::size_t w1_index(int h, int s) const { return static_cast<std::size_t>(h) * n_states_ + s; }
  std::size_t b1_index(int h) const { return w1_size() + h; }
  std::size_t w2_index(int a, int h) const {
    return w1_size() + hidden_ + static_cast<std::size_t>(a) * hidden_ + h;
  }
  std::size_t b2_index(int a) const { return w1_size() + hidden_ + w2_size() + a; }
  std::size_t w1_size() const { return static_cast<std::size_t>(hidden_) * n_states_; }
  std::size_t w2_size() const { return static_cast<std::size_t>(n_actions_) * hidden_; }

  Representation rep_;
  int n_states_;
  int n_actions_;
  int hidden_;  // 0 unless mlp
  std::vector<double> params_;
};

}  // namespace sail
