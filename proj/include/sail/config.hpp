#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sail/agent.hpp"
#include "sail/envs.hpp"

namespace sail {

struct EnvConfig {
  std::string name = "keydoor";  // keydoor | chain
  double sticky_p = 0.25;        // the standard setting; 0 disables the wrapper
  int step_limit = 0;            // 0 = environment default
  int chain_length = 20;
  std::string map_file;  // optional ASCII map override for keydoor
};

struct ReplayConfig {
  std::size_t capacity = 50000;
  std::size_t warmup = 1000;  // finalized records required before updates start
};

struct EvalConfig {
  int period = 1000;
  int episodes = 10;
  double epsilon = 0.01;
};

struct RunConfig {
  EnvConfig env;
  AgentConfig agent;
  ReplayConfig replay;
  EvalConfig eval;
  std::int64_t total_steps = 200000;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6};
  std::string out_dir = "runs";
  std::string method_label;  // defaults to the loss variant name
  bool dump_buffer = false;
  bool save_checkpoints = false;  // final online parameters per seed

  std::string method_name() const;
  void validate() const;
};

// Flat sectioned key-value file:
//   [agent]
//   variant = sail
//   alpha = 0.9
// `#` starts a comment. Unknown sections or keys are errors.
RunConfig parse_run_config(std::istream& in, const std::string& source_name);
RunConfig load_run_config(const std::string& path);

LossVariant parse_loss_variant(const std::string& text);
Representation parse_representation(const std::string& text);
OptimizerKind parse_optimizer(const std::string& text);

std::unique_ptr<Env> make_env(const EnvConfig& config);

}  // namespace sail
