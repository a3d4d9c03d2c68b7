#include "sail/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sail {

std::string RunConfig::method_name() const {
  return method_label.empty() ? loss_variant_name(agent.loss_variant) : method_label;
}

void RunConfig::validate() const {
  agent.validate();
  if (seeds.empty()) {
    throw std::invalid_argument("RunConfig: seed list must not be empty");
  }
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) {
    throw std::invalid_argument("RunConfig: seeds must be distinct");
  }
  if (total_steps <= 0) {
    throw std::invalid_argument("RunConfig: total_steps must be positive");
  }
  if (env.name != "keydoor" && env.name != "chain") {
    throw std::invalid_argument("RunConfig: unknown env '" + env.name + "'");
  }
  if (!(env.sticky_p >= 0.0 && env.sticky_p <= 1.0)) {
    throw std::invalid_argument("RunConfig: sticky_p must lie in [0, 1]");
  }
  if (replay.capacity == 0) {
    throw std::invalid_argument("RunConfig: replay capacity must be positive");
  }
  if (eval.period <= 0 || eval.episodes <= 0) {
    throw std::invalid_argument("RunConfig: eval period and episodes must be positive");
  }
}

LossVariant parse_loss_variant(const std::string& text) {
  if (text == "dqn") return LossVariant::Dqn;
  if (text == "al") return LossVariant::Al;
  if (text == "strsil") return LossVariant::StrSil;
  if (text == "sail") return LossVariant::Sail;
  throw std::invalid_argument("unknown loss variant '" + text + "' (dqn|al|strsil|sail)");
}

Representation parse_representation(const std::string& text) {
  if (text == "tabular") return Representation::Tabular;
  if (text == "linear") return Representation::Linear;
  if (text == "mlp") return Representation::Mlp;
  throw std::invalid_argument("unknown representation '" + text + "' (tabular|linear|mlp)");
}

OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "sgd") return OptimizerKind::Sgd;
  if (text == "rmsprop") return OptimizerKind::RmsProp;
  if (text == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + text + "' (sgd|rmsprop|adam)");
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void config_fail(const std::string& source, int line, const std::string& msg) {
  throw std::invalid_argument(source + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& source, int line, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    config_fail(source, line, "expected a number, got '" + value + "'");
  }
}

long to_long(const std::string& source, int line, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    config_fail(source, line, "expected an integer, got '" + value + "'");
  }
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::string& source_name) {
  RunConfig config;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_fail(source_name, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "env" && section != "agent" && section != "replay" && section != "eval" &&
          section != "run") {
        config_fail(source_name, line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_fail(source_name, line_no, "expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) config_fail(source_name, line_no, "empty key or value");

    try {
      if (section == "env") {
        if (key == "name") config.env.name = value;
        else if (key == "sticky_p") config.env.sticky_p = to_double(source_name, line_no, value);
        else if (key == "step_limit") config.env.step_limit = static_cast<int>(to_long(source_name, line_no, value));
        else if (key == "chain_length") config.env.chain_length = static_cast<int>(to_long(source_name, line_no, value));
        else if (key == "map_file") config.env.map_file = value;
        else config_fail(source_name, line_no, "unknown key '" + key + "' in [env]");
      } else if (section == "agent") {
        if (key == "variant") config.agent.loss_variant = parse_loss_variant(value);
        else if (key == "representation") config.agent.representation = parse_representation(value);
        else if (key == "hidden_width") config.agent.hidden_width = static_cast<int>(to_long(source_name, line_no, value));
        else if (key == "alpha") config.agent.alpha = to_double(source_name, line_no, value);
        else if (key == "gamma") config.agent.gamma = to_double(source_name, line_no, value);
        else if (key == "epsilon_start") config.agent.epsilon_start = to_double(source_name, line_no, value);
        else if (key == "epsilon_end") config.agent.epsilon_end = to_double(source_name, line_no, value);
        else if (key == "epsilon_decay_steps") config.agent.epsilon_decay_steps = static_cast<int>(to_long(source_name, line_no, value));
        else if (key == "target_sync_period") config.agent.target_sync_period = static_cast<int>(to_long(source_name, line_no, value));
        else if (key == "bonus_clip_low") config.agent.bonus_clip.low = to_double(source_name, line_no, value);
        else if (key == "bonus_clip_high") config.agent.bonus_clip.high = to_double(source_name, line_no, value);
        else if (key == "learning_rate") config.agent.learning_rate = to_double(source_name, line_no, value);
        else if (key == "batch_size") config.agent.batch_size = static_cast<int>(to_long(source_name, line_no, value));
        else if (key == "optimizer") config.agent.optimizer = parse_optimizer(value);
        else config_fail(source_name, line_no, "unknown key '" + key + "' in [agent]");
      } else if (section == "replay") {
        if (key == "capacity") config.replay.capacity = static_cast<std::size_t>(to_long(source_name, line_no, value));
        else if (key == "warmup") config.replay.warmup = static_cast<std::size_t>(to_long(source_name, line_no, value));
        else config_fail(source_name, line_no, "unknown key '" + key + "' in [replay]");
      } else if (section == "eval") {
        if (key == "period") config.eval.period = static_cast<int>(to_long(source_name, line_no, value));
        else if (key == "episodes") config.eval.episodes = static_cast<int>(to_long(source_name, line_no, value));
        else if (key == "epsilon") config.eval.epsilon = to_double(source_name, line_no, value);
        else config_fail(source_name, line_no, "unknown key '" + key + "' in [eval]");
      } else if (section == "run") {
        if (key == "steps") config.total_steps = to_long(source_name, line_no, value);
        else if (key == "out_dir") config.out_dir = value;
        else if (key == "method_label") config.method_label = value;
        else if (key == "dump_buffer") config.dump_buffer = to_long(source_name, line_no, value) != 0;
        else if (key == "save_checkpoints") config.save_checkpoints = to_long(source_name, line_no, value) != 0;
        else if (key == "seeds") {
          config.seeds.clear();
          std::istringstream seeds(value);
          std::uint64_t seed = 0;
          while (seeds >> seed) config.seeds.push_back(seed);
          if (config.seeds.empty()) config_fail(source_name, line_no, "empty seed list");
        } else {
          config_fail(source_name, line_no, "unknown key '" + key + "' in [run]");
        }
      } else {
        config_fail(source_name, line_no, "key '" + key + "' outside any section");
      }
    } catch (const std::invalid_argument& e) {
      // Re-tag value-level errors with the file position.
      const std::string msg = e.what();
      if (msg.find(source_name + ":") == 0) throw;
      config_fail(source_name, line_no, msg);
    }
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument(path + ": cannot open config file");
  }
  return parse_run_config(in, path);
}

std::unique_ptr<Env> make_env(const EnvConfig& config) {
  std::unique_ptr<Env> env;
  if (config.name == "keydoor") {
    GridMap map = config.map_file.empty() ? default_key_door_treasure_map()
                                          : load_grid_map(config.map_file);
    env = std::make_unique<KeyDoorTreasureEnv>(std::move(map),
                                               config.step_limit > 0 ? config.step_limit : 300);
  } else if (config.name == "chain") {
    env = std::make_unique<SparseChainEnv>(config.chain_length,
                                           config.step_limit > 0 ? config.step_limit : 60);
  } else {
    throw std::invalid_argument("make_env: unknown env '" + config.name + "'");
  }
  if (config.sticky_p > 0.0) {
    env = std::make_unique<StickyWrapper>(std::move(env), config.sticky_p);
  }
  return env;
}

}  // namespace sail
