// Acceptance suite: runs every promised property at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sail/agent.hpp"
#include "sail/envs.hpp"
#include "sail/mdp.hpp"
#include "sail/metrics.hpp"
#include "sail/replay.hpp"
#include "sail/trainer.hpp"

using namespace sail;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// 1 & 2: reward-modification identities on shared random tuples.

struct Tuple {
  double r, mc_return, q_sa, q_max, alpha;
};

std::vector<Tuple> random_tuples(std::size_t n) {
  Rng rng(20240901);
  std::vector<Tuple> tuples(n);
  for (Tuple& t : tuples) {
    t.r = rng.uniform(-2.0, 2.0);
    t.mc_return = rng.uniform(-3.0, 3.0);
    t.q_max = rng.uniform(-2.0, 2.0);
    t.q_sa = t.q_max - rng.uniform(0.0, 3.0);
    t.alpha = rng.uniform(0.0, 1.0);
  }
  return tuples;
}

Criterion criterion_decomposition(const std::vector<Tuple>& tuples) {
  Criterion c{1, "decomposition identity: sail = al + alpha*(G - q_sa)_+"};
  const ClipBounds unclipped = ClipBounds::none();
  double worst = 0.0;
  for (const Tuple& t : tuples) {
    const double sail = sail_modified_reward(t.r, t.mc_return, t.q_sa, t.q_max, t.alpha, unclipped);
    const double al = al_modified_reward(t.r, t.q_sa, t.q_max, t.alpha, unclipped);
    const double rectified = t.alpha * std::max(0.0, t.mc_return - t.q_sa);
    worst = std::max(worst, std::abs(sail - (al + rectified)));
  }
  c.pass = worst <= 1e-12;
  std::ostringstream detail;
  detail << tuples.size() << " tuples, max |difference| = " << worst;
  c.detail = detail.str();
  return c;
}

Criterion criterion_dominance(const std::vector<Tuple>& tuples) {
  Criterion c{2, "dominance and degeneracy of the modified rewards"};
  const ClipBounds unclipped = ClipBounds::none();
  std::size_t violations = 0;
  for (const Tuple& t : tuples) {
    const double sail = sail_modified_reward(t.r, t.mc_return, t.q_sa, t.q_max, t.alpha, unclipped);
    const double al = al_modified_reward(t.r, t.q_sa, t.q_max, t.alpha, unclipped);
    if (sail < al) ++violations;
    if (t.mc_return <= t.q_sa || t.alpha == 0.0) {
      if (sail != al) ++violations;
    } else if (sail <= al) {
      ++violations;
    }
    const double strsil = strsil_modified_reward(t.r, t.mc_return, t.q_max, t.alpha, unclipped);
    if (t.mc_return <= t.q_max && strsil != t.r) ++violations;
    if (strsil < t.r) ++violations;
  }
  c.pass = violations == 0;
  std::ostringstream detail;
  detail << violations << " violations over " << tuples.size() << " tuples";
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------------------
// 3: gap-increasing operator keeps the greedy policy and widens gaps.

Criterion criterion_al_operator() {
  Criterion c{3, "AL fixed point: policy preservation and gap increase"};
  int policy_mismatches = 0;
  double worst_ratio = 1e9;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(derive_seed(seed, Stream::MdpGen));
    const TabularMdp mdp = random_mdp(5, 3, 0.9, rng);
    const QTable q_star = value_iteration(mdp, 1e-10);
    const std::vector<int> policy_star = greedy_policy(q_star);
    const double gap_star = mean_gap(q_star);
    for (double alpha : {0.1, 0.5, 0.9}) {
      const QTable q_al = al_fixed_point(mdp, alpha, 1e-10);
      if (greedy_policy(q_al) != policy_star) ++policy_mismatches;
      if (gap_star > 0.0) worst_ratio = std::min(worst_ratio, mean_gap(q_al) / gap_star);
    }
  }
  c.pass = policy_mismatches == 0 && worst_ratio >= 1.0 - 1e-8;
  std::ostringstream detail;
  detail << "100 MDPs x {0.1, 0.5, 0.9}: " << policy_mismatches
         << " policy mismatches, min gap ratio " << worst_ratio;
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------------------
// 4: return backfill against the quadratic forward-sum oracle.

std::vector<double> forward_sum_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> out(rewards.size(), 0.0);
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    for (std::size_t u = t; u < rewards.size(); ++u) {
      out[t] += std::pow(gamma, static_cast<double>(u - t)) * rewards[u];
    }
  }
  return out;
}

Criterion criterion_backfill() {
  Criterion c{4, "episodic return backfill matches the forward-sum oracle"};
  Rng rng(555);
  const double gamma = 0.99;
  double worst = 0.0;
  std::size_t checked = 0;
  for (int episode = 0; episode < 1000; ++episode) {
    const int length = 1 + rng.uniform_index(50);
    std::vector<double> rewards(length);
    for (double& r : rewards) r = rng.uniform(-1.0, 1.0);
    const std::vector<double> oracle = forward_sum_returns(rewards, gamma);
    const bool terminal = rng.bernoulli(0.5);

    ReplayBuffer wide(4096);
    ReplayBuffer tiny(4);  // forces evictions mid-episode
    for (int t = 0; t < length; ++t) {
      TransitionRecord rec;
      rec.state = t;
      rec.reward = rewards[t];
      rec.next_state = t + 1;
      rec.done = terminal && t + 1 == length;
      wide.store(rec);
      tiny.store(rec);
    }
    wide.finalize_episode(gamma, !terminal);
    tiny.finalize_episode(gamma, !terminal);
    for (std::size_t i = 0; i < wide.size(); ++i) {
      worst = std::max(worst, std::abs(*wide.at(i).mc_return - oracle[wide.at(i).state]));
      ++checked;
    }
    for (std::size_t i = 0; i < tiny.size(); ++i) {
      // The surviving suffix of an evicted episode still gets exact returns.
      worst = std::max(worst, std::abs(*tiny.at(i).mc_return - oracle[tiny.at(i).state]));
      ++checked;
    }
  }
  c.pass = worst <= 1e-12;
  std::ostringstream detail;
  detail << checked << " records over 1000 episodes, max |error| = " << worst;
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------------------
// 5: analytic gradients against central finite differences.

std::vector<TransitionRecord> random_batch(int n, int n_states, int n_actions, Rng& rng) {
  std::vector<TransitionRecord> batch(n);
  for (TransitionRecord& rec : batch) {
    rec.state = rng.uniform_index(n_states);
    rec.action = rng.uniform_index(n_actions);
    rec.reward = rng.uniform(-1.0, 1.0);
    rec.next_state = rng.uniform_index(n_states);
    rec.done = rng.bernoulli(0.25);
    rec.mc_return = rng.uniform(-2.0, 2.0);
  }
  return batch;
}

QFunction random_qfunction(Representation rep, int n_states, int n_actions, int hidden, Rng& rng) {
  QFunction qf = rep == Representation::Tabular  ? QFunction::tabular(n_states, n_actions)
                 : rep == Representation::Linear ? QFunction::linear(n_states, n_actions)
                                                 : QFunction::mlp(n_states, n_actions, hidden);
  qf.init_params(rng);
  if (rep == Representation::Tabular) {
    for (double& v : qf.params()) v = rng.uniform(-0.5, 0.5);
  }
  return qf;
}

Criterion criterion_gradients() {
  Criterion c{5, "analytic gradients vs central finite differences"};
  Rng rng(777);
  const int n_states = 6, n_actions = 3, hidden = 8;
  const double h = 1e-5;
  double worst = 0.0;
  for (Representation rep :
       {Representation::Tabular, Representation::Linear, Representation::Mlp}) {
    for (LossVariant variant :
         {LossVariant::Dqn, LossVariant::Al, LossVariant::StrSil, LossVariant::Sail}) {
      AgentConfig config;
      config.representation = rep;
      config.hidden_width = hidden;
      config.loss_variant = variant;
      config.alpha = 0.9;
      for (int probe = 0; probe < 20; ++probe) {
        QFunction qf = random_qfunction(rep, n_states, n_actions, hidden, rng);
        const QFunction target = random_qfunction(rep, n_states, n_actions, hidden, rng);
        const std::vector<TransitionRecord> batch = random_batch(4, n_states, n_actions, rng);
        const LossResult analytic = loss_and_grad(qf, target, batch, config);
        const std::size_t index = rng.uniform_int(qf.params().size());

        const double original = qf.params()[index];
        qf.params()[index] = original + h;
        const double up = loss_and_grad(qf, target, batch, config).loss;
        qf.params()[index] = original - h;
        const double down = loss_and_grad(qf, target, batch, config).loss;
        qf.params()[index] = original;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic.grad[index]), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic.grad[index] - numeric) / denom);
      }
    }
  }
  c.pass = worst <= 1e-4;
  std::ostringstream detail;
  detail << "3 representations x 4 variants x 20 probes, max relative error = " << worst;
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------------------
// 6: alpha = 0 collapses every variant onto the plain backup.

Criterion criterion_alpha_zero_collapse() {
  Criterion c{6, "alpha=0: all four loss variants bit-identical"};
  Rng rng(31337);
  QFunction qf = random_qfunction(Representation::Mlp, 8, 4, 16, rng);
  const QFunction target = random_qfunction(Representation::Mlp, 8, 4, 16, rng);
  const std::vector<TransitionRecord> batch = random_batch(32, 8, 4, rng);

  AgentConfig config;
  config.representation = Representation::Mlp;
  config.hidden_width = 16;
  config.alpha = 0.0;

  bool identical = true;
  config.loss_variant = LossVariant::Dqn;
  const LossResult reference = loss_and_grad(qf, target, batch, config);
  for (LossVariant variant : {LossVariant::Al, LossVariant::StrSil, LossVariant::Sail}) {
    config.loss_variant = variant;
    const LossResult result = loss_and_grad(qf, target, batch, config);
    identical = identical && result.loss == reference.loss && result.grad == reference.grad;
  }
  c.pass = identical;
  c.detail = identical ? "losses and gradients identical" : "variants diverged";
  return c;
}

// ---------------------------------------------------------------------------
// 7: sticky wrapper repeat frequency.

Criterion criterion_sticky() {
  Criterion c{7, "sticky wrapper: empirical repeat frequency within 0.02 of p"};
  std::ostringstream detail;
  c.pass = true;
  for (double p : {0.1, 0.25, 0.5}) {
    StickyWrapper env(std::make_unique<SparseChainEnv>(1000000, 10000000), p);
    env.reset(2024);
    int requested = 0;
    for (int i = 0; i < 100000; ++i) {
      env.step(requested);
      requested = 1 - requested;
    }
    const double freq =
        static_cast<double>(env.repeat_count()) / static_cast<double>(env.draw_count());
    c.pass = c.pass && std::abs(freq - p) <= 0.02;
    detail << "p=" << p << " -> " << freq << "  ";
  }
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------------------
// 8 & 9: behavioral runs on Key-Door-Treasure.

struct RunBlock {
  std::vector<double> final_returns;       // per seed, final eval point
  std::vector<double> final_stale;         // per seed
  std::vector<double> final_bonus;         // per seed
  int failures = 0;
};

using BlockKey = std::tuple<LossVariant, double, std::uint64_t>;
std::map<BlockKey, RunBlock> g_block_cache;

std::vector<std::uint64_t> seed_block(std::uint64_t base) {
  std::vector<std::uint64_t> seeds(6);
  for (std::uint64_t i = 0; i < 6; ++i) seeds[i] = base + i;
  return seeds;
}

const RunBlock& run_block(LossVariant variant, double sticky_p, std::uint64_t seed_base) {
  const BlockKey key{variant, sticky_p, seed_base};
  auto cached = g_block_cache.find(key);
  if (cached != g_block_cache.end()) return cached->second;

  RunConfig config;  // defaults throughout: the criterion runs as shipped
  config.agent.loss_variant = variant;
  config.env.sticky_p = sticky_p;
  config.seeds = seed_block(seed_base);
  config.out_dir = "acceptance_runs";
  std::ostringstream label;
  label << loss_variant_name(variant) << "_b" << seed_base;
  config.method_label = label.str();

  std::cout << "  running " << loss_variant_name(variant) << " at p=" << sticky_p << ", seeds "
            << seed_base << ".." << (seed_base + 5) << " ..." << std::endl;
  RunBlock block;
  for (const TrainResult& result : train_all(config, 0)) {
    if (result.failed || result.record.points.empty()) {
      ++block.failures;
      continue;
    }
    block.final_returns.push_back(result.record.points.back().eval_return);
    block.final_stale.push_back(result.record.points.back().stale_fraction);
    block.final_bonus.push_back(result.bonus_magnitude.back().second);
  }
  return g_block_cache.emplace(key, std::move(block)).first->second;
}

int solved_count(const std::vector<double>& finals) {
  int count = 0;
  for (double v : finals) count += v >= 6.9 ? 1 : 0;
  return count;
}

constexpr double kDefaultSticky = 0.25;  // the standard setting

bool behavioral_block_passes(std::uint64_t seed_base, std::string& detail) {
  const RunBlock& sail = run_block(LossVariant::Sail, kDefaultSticky, seed_base);
  const RunBlock& al = run_block(LossVariant::Al, kDefaultSticky, seed_base);
  const RunBlock& dqn = run_block(LossVariant::Dqn, kDefaultSticky, seed_base);
  const RunBlock& strsil = run_block(LossVariant::StrSil, kDefaultSticky, seed_base);
  if (sail.failures + al.failures + dqn.failures + strsil.failures > 0) {
    detail = "training runs failed";
    return false;
  }
  const double median_sail = median(sail.final_returns);
  const double median_al = median(al.final_returns);
  const double median_dqn = median(dqn.final_returns);
  const int sail_solved = solved_count(sail.final_returns);
  const int dqn_solved = solved_count(dqn.final_returns);
  const double strsil_stale = median(strsil.final_stale);
  const double sail_bonus = median(sail.final_bonus);

  std::ostringstream out;
  out << "medians sail=" << median_sail << " al=" << median_al << " dqn=" << median_dqn
      << "; solved sail=" << sail_solved << "/6 dqn=" << dqn_solved << "/6"
      << "; strsil final stale=" << strsil_stale << "; sail final |bonus|=" << sail_bonus;
  detail = out.str();

  return median_sail >= median_al && median_sail >= median_dqn  // (a)
         && sail_solved >= 4 && dqn_solved < sail_solved        // (b)
         && strsil_stale < 0.2 && sail_bonus > 0.0;             // (c)
}

Criterion criterion_behavioral() {
  Criterion c{8, "Key-Door-Treasure behavior: self-imitation pays off"};
  std::string detail;
  c.pass = behavioral_block_passes(1, detail);
  c.detail = detail;
  if (!c.pass) {
    // Statistical criterion: one fresh seed block before declaring regression.
    std::string retry_detail;
    c.pass = behavioral_block_passes(101, retry_detail);
    c.detail = detail + " | retry: " + retry_detail;
  }
  return c;
}

bool stochasticity_block_passes(std::uint64_t seed_base, std::string& detail) {
  const RunBlock& sail_p0 = run_block(LossVariant::Sail, 0.0, seed_base);
  const RunBlock& sail_p25 = run_block(LossVariant::Sail, 0.25, seed_base);
  const RunBlock& sail_p50 = run_block(LossVariant::Sail, 0.5, seed_base);
  const RunBlock& dqn_p25 = run_block(LossVariant::Dqn, 0.25, seed_base);
  if (sail_p0.failures + sail_p25.failures + sail_p50.failures + dqn_p25.failures > 0) {
    detail = "training runs failed";
    return false;
  }
  const double m0 = median(sail_p0.final_returns);
  const double m25 = median(sail_p25.final_returns);
  const double m50 = median(sail_p50.final_returns);
  const double dqn25 = median(dqn_p25.final_returns);
  std::ostringstream out;
  out << "sail medians p0=" << m0 << " p0.25=" << m25 << " p0.5=" << m50
      << "; dqn median p0.25=" << dqn25;
  detail = out.str();
  return m0 >= m25 && m25 >= m50 && m25 > dqn25;
}

Criterion criterion_stochasticity() {
  Criterion c{9, "stochasticity sweep: graceful degradation, still above the baseline"};
  std::string detail;
  c.pass = stochasticity_block_passes(1, detail);
  c.detail = detail;
  if (!c.pass) {
    std::string retry_detail;
    c.pass = stochasticity_block_passes(101, retry_detail);
    c.detail = detail + " | retry: " + retry_detail;
  }
  return c;
}

// ---------------------------------------------------------------------------
// 10: metric fixtures.

Criterion criterion_metric_fixtures() {
  Criterion c{10, "metric fixtures: relative improvement and normalized median"};
  const std::vector<double> twos{2.0, 2.0, 2.0};
  const std::vector<double> ones{1.0, 1.0, 1.0};
  bool ok = mean_relative_improvement(twos, ones, 0.0) == 1.0;
  ok = ok && mean_relative_improvement(twos, twos, 1e-6) == 0.0;

  const std::map<std::string, BaselineAnchors> anchors{
      {"a", {0.0, 10.0}}, {"b", {5.0, 25.0}}, {"c", {-2.0, 2.0}}};
  ok = ok && normalized_median({{"a", 10.0}, {"b", 25.0}, {"c", 2.0}}, anchors) == 1.0;
  ok = ok && normalized_median({{"a", 0.0}, {"b", 5.0}, {"c", -2.0}}, anchors) == 0.0;
  ok = ok && normalized_median({{"a", 2.0}, {"b", 15.0}, {"c", 1.6}}, anchors) == 0.5;

  c.pass = ok;
  c.detail = ok ? "all fixtures exact" : "fixture mismatch";
  return c;
}

void report(const Criterion& c, double seconds) {
  std::printf("[%2d] %s  %s (%s) [%.1fs]\n", c.id, c.pass ? "PASS" : "FAIL", c.name.c_str(),
              c.detail.c_str(), seconds);
  std::fflush(stdout);
}

}  // namespace

int main() {
  const std::vector<Tuple> tuples = random_tuples(100000);
  std::vector<std::function<Criterion()>> criteria{
      [&] { return criterion_decomposition(tuples); },
      [&] { return criterion_dominance(tuples); },
      [] { return criterion_al_operator(); },
      [] { return criterion_backfill(); },
      [] { return criterion_gradients(); },
      [] { return criterion_alpha_zero_collapse(); },
      [] { return criterion_sticky(); },
      [] { return criterion_behavioral(); },
      [] { return criterion_stochasticity(); },
      [] { return criterion_metric_fixtures(); },
  };

  bool all_pass = true;
  for (const auto& run : criteria) {
    const auto start = std::chrono::steady_clock::now();
    const Criterion c = run();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(c, seconds);
    all_pass = all_pass && c.pass;
  }
  std::printf("acceptance: %s\n", all_pass ? "ALL CRITERIA PASS" : "FAILURES PRESENT");
  return all_pass ? 0 : 1;
}
