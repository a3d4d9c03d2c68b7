#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sail/qfunction.hpp"
#include "sail/replay.hpp"

namespace sail {

// One evaluation checkpoint of a training run.
struct EvalPoint {
  std::int64_t step = 0;
  double eval_return = 0.0;
  double mean_action_gap = 0.0;
  double stale_fraction = 0.0;
  double loss = 0.0;

  bool operator==(const EvalPoint&) const = default;
};

// Scores of one (method, env, seed) run, ordered by eval step.
struct RunRecord {
  std::string method;
  std::string env;
  std::uint64_t seed = 0;
  std::vector<EvalPoint> points;

  bool operator==(const RunRecord&) const = default;
};

// Per-env anchor pair used to normalize scores: a uniform-random policy's
// score and a scripted near-optimal reference score.
struct BaselineAnchors {
  double s_random = 0.0;
  double s_reference = 1.0;
};

// (mean(x) - mean(base)) / (|mean(base)| + eps). Lengths must match and be
// nonzero; inputs are per-step means already averaged across seeds.
double mean_relative_improvement(std::span<const double> scores_x,
                                 std::span<const double> scores_base, double eps);

// Normalizes each env's score against its anchors, then takes the median
// across envs (mean of the two middle values for even counts).
double normalized_median(const std::map<std::string, double>& per_env_scores,
                         const std::map<std::string, BaselineAnchors>& anchors);

// Mean over the sampled states of (best minus second-best action value);
// zero for single-action functions.
double mean_action_gap(const QFunction& qf, std::span<const int> states);

// Fraction of records whose stored return exceeds the target network's
// estimate for the taken action. Quantifies how much of a batch still
// carries returns the value function has not caught up with.
double stale_fraction(std::span<const TransitionRecord> batch, const QFunction& target_qf);

// Shortest round-trip decimal rendering (and its inverse) used everywhere
// numbers hit disk, so emitted files are byte-stable and re-parseable.
std::string format_double(double value);
double parse_double(const std::string& text);

// CSV schema: method,env,seed,step,eval_return,mean_action_gap,
// stale_fraction,loss -- rows ordered by (method, env, seed, step).
void emit_csv(std::span<const RunRecord> records, const std::string& path);
std::vector<RunRecord> parse_csv(const std::string& path);

struct SummaryRow {
  std::string method;
  std::string env;
  double rel_improvement_vs_baseline = 0.0;
  double final_score_mean = 0.0;
  double final_score_median = 0.0;
};

void emit_summary_csv(std::span<const SummaryRow> rows, const std::string& path);

// Seed-averaged eval_return curve of runs sharing one (method, env). All
// runs must use the same eval step grid.
std::vector<double> mean_curve(std::span<const RunRecord> runs);

double median(std::vector<double> values);

// Per-env improvement of `method_runs` over `baseline_runs` plus final-score
// statistics across seeds.
std::vector<SummaryRow> compare_methods(std::span<const RunRecord> method_runs,
                                        std::span<const RunRecord> baseline_runs, double eps);

}  // namespace sail
