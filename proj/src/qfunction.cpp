#include "sail/qfunction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sail {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'I', 'L', 'Q', 'F', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

const char* representation_name(Representation rep) {
  switch (rep) {
    case Representation::Tabular: return "tabular";
    case Representation::Linear: return "linear";
    case Representation::Mlp: return "mlp";
  }
  return "?";
}

QFunction::QFunction(Representation rep, int n_states, int n_actions, int hidden)
    : rep_(rep), n_states_(n_states), n_actions_(n_actions), hidden_(hidden) {
  if (n_states_ <= 0 || n_actions_ <= 0) {
    throw std::invalid_argument("QFunction: n_states and n_actions must be positive");
  }
  std::size_t count = 0;
  switch (rep_) {
    case Representation::Tabular:
      count = static_cast<std::size_t>(n_states_) * n_actions_;
      break;
    case Representation::Linear:
      count = static_cast<std::size_t>(n_actions_) * n_states_ + n_actions_;
      break;
    case Representation::Mlp:
      if (hidden_ <= 0) {
        throw std::invalid_argument("QFunction: mlp needs a positive hidden width");
      }
      count = w1_size() + hidden_ + w2_size() + n_actions_;
      break;
  }
  params_.assign(count, 0.0);
}

QFunction QFunction::tabular(int n_states, int n_actions) {
  return QFunction(Representation::Tabular, n_states, n_actions, 0);
}

QFunction QFunction::linear(int n_states, int n_actions) {
  return QFunction(Representation::Linear, n_states, n_actions, 0);
}

QFunction QFunction::mlp(int n_states, int n_actions, int hidden) {
  return QFunction(Representation::Mlp, n_states, n_actions, hidden);
}

void QFunction::init_params(Rng& rng) {
  switch (rep_) {
    case Representation::Tabular:
      std::fill(params_.begin(), params_.end(), 0.0);
      break;
    case Representation::Linear: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(n_states_));
      for (std::size_t i = 0; i < static_cast<std::size_t>(n_actions_) * n_states_; ++i) {
        params_[i] = rng.uniform(-bound, bound);
      }
      for (int a = 0; a < n_actions_; ++a) {
        params_[static_cast<std::size_t>(n_actions_) * n_states_ + a] = 0.0;
      }
      break;
    }
    case Representation::Mlp: {
      const double bound1 = 1.0 / std::sqrt(static_cast<double>(n_states_));
      for (std::size_t i = 0; i < w1_size(); ++i) params_[i] = rng.uniform(-bound1, bound1);
      for (int h = 0; h < hidden_; ++h) params_[b1_index(h)] = 0.0;
      const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
      for (int a = 0; a < n_actions_; ++a) {
        for (int h = 0; h < hidden_; ++h) {
          params_[w2_index(a, h)] = rng.uniform(-bound2, bound2);
        }
        params_[b2_index(a)] = 0.0;
      }
      break;
    }
  }
}

std::vector<double> QFunction::q_values(int state) const {
  std::vector<double> q(n_actions_);
  switch (rep_) {
    case Representation::Tabular: {
      const std::size_t base = static_cast<std::size_t>(state) * n_actions_;
      for (int a = 0; a < n_actions_; ++a) q[a] = params_[base + a];
      break;
    }
    case Representation::Linear: {
      const std::size_t b_base = static_cast<std::size_t>(n_actions_) * n_states_;
      for (int a = 0; a < n_actions_; ++a) {
        q[a] = params_[static_cast<std::size_t>(a) * n_states_ + state] + params_[b_base + a];
      }
      break;
    }
    case Representation::Mlp: {
      for (int a = 0; a < n_actions_; ++a) q[a] = params_[b2_index(a)];
      for (int h = 0; h < hidden_; ++h) {
        const double pre = params_[w1_index(h, state)] + params_[b1_index(h)];
        if (pre > 0.0) {
          for (int a = 0; a < n_actions_; ++a) q[a] += params_[w2_index(a, h)] * pre;
        }
      }
      break;
    }
  }
  return q;
}

double QFunction::q_value(int state, int action) const {
  switch (rep_) {
    case Representation::Tabular:
      return params_[static_cast<std::size_t>(state) * n_actions_ + action];
    case Representation::Linear:
      return params_[static_cast<std::size_t>(action) * n_states_ + state] +
             params_[static_cast<std::size_t>(n_actions_) * n_states_ + action];
    case Representation::Mlp: {
      double acc = params_[b2_index(action)];
      for (int h = 0; h < hidden_; ++h) {
        const double pre = params_[w1_index(h, state)] + params_[b1_index(h)];
        if (pre > 0.0) acc += params_[w2_index(action, h)] * pre;
      }
      return acc;
    }
  }
  return 0.0;
}

double QFunction::max_q(int state) const {
  const std::vector<double> q = q_values(state);
  return *std::max_element(q.begin(), q.end());
}

void QFunction::accumulate_grad(int state, int action, double upstream,
                                std::vector<double>& grad) const {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("accumulate_grad: gradient shape mismatch");
  }
  switch (rep_) {
    case Representation::Tabular:
      grad[static_cast<std::size_t>(state) * n_actions_ + action] += upstream;
      break;
    case Representation::Linear:
      grad[static_cast<std::size_t>(action) * n_states_ + state] += upstream;
      grad[static_cast<std::size_t>(n_actions_) * n_states_ + action] += upstream;
      break;
    case Representation::Mlp: {
      for (int h = 0; h < hidden_; ++h) {
        const double pre = params_[w1_index(h, state)] + params_[b1_index(h)];
        if (pre > 0.0) {
          grad[w2_index(action, h)] += upstream * pre;
          const double dpre = upstream * params_[w2_index(action, h)];
          grad[w1_index(h, state)] += dpre;
          grad[b1_index(h)] += dpre;
        }
      }
      grad[b2_index(action)] += upstream;
      break;
    }
  }
}

void QFunction::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(path + ": cannot open checkpoint for writing");
  }
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, static_cast<std::uint32_t>(rep_));
  write_u32(out, static_cast<std::uint32_t>(n_states_));
  write_u32(out, static_cast<std::uint32_t>(n_actions_));
  write_u32(out, static_cast<std::uint32_t>(hidden_));
  write_u64(out, params_.size());
  for (double v : params_) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out.good()) {
    throw std::runtime_error(path + ": checkpoint write failed");
  }
}

QFunction QFunction::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error(path + ": cannot open checkpoint");
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in.good() || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + ": not a QFunction checkpoint");
  }
  const std::uint32_t tag = read_u32(in);
  const std::uint32_t n_states = read_u32(in);
  const std::uint32_t n_actions = read_u32(in);
  const std::uint32_t hidden = read_u32(in);
  const std::uint64_t count = read_u64(in);
  if (!in.good() || tag > 2) {
    throw std::runtime_error(path + ": corrupt checkpoint header");
  }
  QFunction qf(static_cast<Representation>(tag), static_cast<int>(n_states),
               static_cast<int>(n_actions), static_cast<int>(hidden));
  if (count != qf.params_.size()) {
    throw std::runtime_error(path + ": parameter count disagrees with the header shapes");
  }
  for (std::size_t i = 0; i < count; ++i) {
    qf.params_[i] = std::bit_cast<double>(read_u64(in));
  }
  if (!in.good()) {
    throw std::runtime_error(path + ": truncated checkpoint");
  }
  return qf;
}

}  // namespace sail
