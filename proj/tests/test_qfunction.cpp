#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sail/qfunction.hpp"

using namespace sail;

TEST_CASE("tabular: rows are stored exactly") {
  QFunction qf = QFunction::tabular(3, 2);
  qf.params()[2 * 2 + 0] = 1.0;  // state 2
  qf.params()[2 * 2 + 1] = 2.0;
  CHECK(qf.q_values(2) == std::vector<double>{1.0, 2.0});
  CHECK(qf.q_value(2, 1) == 2.0);
  CHECK(qf.max_q(2) == 2.0);
  CHECK(qf.q_values(0) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("mlp: zero weights give zero outputs everywhere") {
  QFunction qf = QFunction::mlp(6, 3, 8);
  for (int s = 0; s < 6; ++s) {
    for (double v : qf.q_values(s)) CHECK(v == 0.0);
  }
}

TEST_CASE("linear equals an identity-like mlp on matched weights") {
  const int n_states = 5, n_actions = 3;
  Rng rng(1);
  QFunction lin = QFunction::linear(n_states, n_actions);
  lin.init_params(rng);
  for (int a = 0; a < n_actions; ++a) {  // give the biases some signal too
    lin.params()[static_cast<std::size_t>(n_actions) * n_states + a] = 0.1 * (a + 1);
  }

  // hidden = n_states, W1 = I, b1 = C so every unit stays in the linear
  // regime; W2 copies the linear weights and b2 absorbs the C shift.
  const double shift = 10.0;
  QFunction mlp = QFunction::mlp(n_states, n_actions, n_states);
  std::vector<double>& p = mlp.params();
  const std::size_t w1 = 0;
  const std::size_t b1 = static_cast<std::size_t>(n_states) * n_states;
  const std::size_t w2 = b1 + n_states;
  const std::size_t b2 = w2 + static_cast<std::size_t>(n_actions) * n_states;
  for (int h = 0; h < n_states; ++h) {
    p[w1 + static_cast<std::size_t>(h) * n_states + h] = 1.0;
    p[b1 + h] = shift;
  }
  for (int a = 0; a < n_actions; ++a) {
    double row_sum = 0.0;
    for (int s = 0; s < n_states; ++s) {
      const double w = lin.params()[static_cast<std::size_t>(a) * n_states + s];
      p[w2 + static_cast<std::size_t>(a) * n_states + s] = w;
      row_sum += w;
    }
    const double bias = lin.params()[static_cast<std::size_t>(n_actions) * n_states + a];
    p[b2 + a] = bias - shift * row_sum;
  }

  for (int s = 0; s < n_states; ++s) {
    const std::vector<double> expect = lin.q_values(s);
    const std::vector<double> got = mlp.q_values(s);
    for (int a = 0; a < n_actions; ++a) {
      CHECK(std::abs(expect[a] - got[a]) <= 1e-12);
    }
  }
}

TEST_CASE("init is deterministic per seed and scaled by fan-in") {
  QFunction a = QFunction::mlp(10, 4, 16);
  QFunction b = QFunction::mlp(10, 4, 16);
  Rng ra(123), rb(123), rc(124);
  a.init_params(ra);
  b.init_params(rb);
  CHECK(a.params() == b.params());
  b.init_params(rc);
  CHECK(a.params() != b.params());

  const double bound = 1.0 / std::sqrt(10.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(16) * 10; ++i) {
    CHECK(std::abs(a.params()[i]) <= bound);
  }
}

TEST_CASE("accumulate_grad: tabular and linear are one-hot") {
  QFunction tab = QFunction::tabular(3, 2);
  std::vector<double> grad(tab.params().size(), 0.0);
  tab.accumulate_grad(1, 1, 2.5, grad);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    CHECK(grad[i] == (i == 1 * 2 + 1 ? 2.5 : 0.0));
  }

  QFunction lin = QFunction::linear(3, 2);
  std::vector<double> lgrad(lin.params().size(), 0.0);
  lin.accumulate_grad(2, 0, 1.0, lgrad);
  CHECK(lgrad[0 * 3 + 2] == 1.0);       // W[a=0][s=2]
  CHECK(lgrad[2 * 3 + 0] == 1.0);       // bias of action 0
  double total = 0.0;
  for (double v : lgrad) total += v;
  CHECK(total == 2.0);
}

TEST_CASE("checkpoint: save/load round-trips bit-for-bit") {
  Rng rng(9);
  QFunction qf = QFunction::mlp(7, 3, 5);
  qf.init_params(rng);
  const std::string path = "test_qf_checkpoint.bin";
  qf.save(path);
  const QFunction loaded = QFunction::load(path);
  CHECK(loaded.representation() == Representation::Mlp);
  CHECK(loaded.n_states() == 7);
  CHECK(loaded.n_actions() == 3);
  CHECK(loaded.hidden() == 5);
  CHECK(loaded.params() == qf.params());
  std::remove(path.c_str());
}

TEST_CASE("checkpoint: corrupt files are rejected") {
  const std::string path = "test_qf_bad.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint at all";
  }
  CHECK_THROWS_AS(QFunction::load(path), std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(QFunction::load("test_qf_missing.bin"), std::runtime_error);
}
