#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sail/config.hpp"
#include "sail/metrics.hpp"

namespace sail {

struct TrainResult {
  RunRecord record;
  bool failed = false;
  std::string failure_reason;
  // Mean |r_mod - r| on the diagnostic batch at each eval step; tracks how
  // much bonus the loss variant is still injecting.
  std::vector<std::pair<std::int64_t, double>> bonus_magnitude;
  std::string csv_path;  // empty when out_dir is empty

  double final_eval_return() const;
};

// One seeded run of the interact/store/finalize/update loop: one environment
// step per iteration, one gradient update per step once the buffer holds the
// warmup quota of finalized records, periodic target sync and evaluation.
// Non-finite losses or parameters abort the run and set `failed`; the eval
// points gathered so far are kept. Writes one metrics CSV per seed unless
// out_dir is empty.
TrainResult train_single(const RunConfig& config, std::uint64_t seed);

// Runs every seed of the config on a bounded worker pool (0 = CPU count).
std::vector<TrainResult> train_all(const RunConfig& config, int workers = 0);

// Score anchors for normalized metrics: a uniform-random policy and a
// scripted near-optimal reference (shortest-path feedback policy on
// Key-Door-Treasure, always-right on the chain), both averaged over
// `episodes` rollouts of the configured environment.
BaselineAnchors compute_anchors(const EnvConfig& env_config, int episodes, std::uint64_t seed);

}  // namespace sail
