#include "sail/envs.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sail {

namespace {
constexpr int kDeltaRow[4] = {-1, 1, 0, 0};  // up, down, left, right
constexpr int kDeltaCol[4] = {0, 0, -1, 1};
}  // namespace

GridMap parse_grid_map(const std::string& ascii_art, const std::string& source_name) {
  std::istringstream in(ascii_art);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) {
    throw std::runtime_error(source_name + ": empty map");
  }
  GridMap map;
  map.height = static_cast<int>(rows.size());
  map.width = static_cast<int>(rows[0].size());
  map.walls.assign(map.n_cells(), 0);
  for (int row = 0; row < map.height; ++row) {
    if (static_cast<int>(rows[row].size()) != map.width) {
      throw std::runtime_error(source_name + ": row " + std::to_string(row + 1) +
                               " has a different width");
    }
    for (int col = 0; col < map.width; ++col) {
      const int cell = row * map.width + col;
      switch (rows[row][col]) {
        case '#': map.walls[cell] = 1; break;
        case '.': break;
        case 'A':
          if (map.start_cell >= 0) throw std::runtime_error(source_name + ": duplicate A");
          map.start_cell = cell;
          break;
        case 'K':
          if (map.key_cell >= 0) throw std::runtime_error(source_name + ": duplicate K");
          map.key_cell = cell;
          break;
        case 'D':
          if (map.door_cell >= 0) throw std::runtime_error(source_name + ": duplicate D");
          map.door_cell = cell;
          break;
        case 'T':
          if (map.treasure_cell >= 0) throw std::runtime_error(source_name + ": duplicate T");
          map.treasure_cell = cell;
          break;
        default:
          throw std::runtime_error(source_name + ": unknown map character '" +
                                   std::string(1, rows[row][col]) + "'");
      }
    }
  }
  for (auto [cell, marker] : {std::pair{map.start_cell, 'A'}, {map.key_cell, 'K'},
                              {map.door_cell, 'D'}, {map.treasure_cell, 'T'}}) {
    if (cell < 0) {
      throw std::runtime_error(source_name + ": missing marker '" + std::string(1, marker) + "'");
    }
  }
  return map;
}

GridMap load_grid_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open map file");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_grid_map(text.str(), path);
}

GridMap default_key_door_treasure_map() {
  // The treasure corridor above the wall makes full successes rare: random
  // exploration reaches it only occasionally, so stored returns matter.
  return parse_grid_map(
      "T........\n"
      "########D\n"
      ".........\n"
      ".........\n"
      ".........\n"
      ".........\n"
      "K.......A\n",
      "default_key_door_treasure_map");
}

KeyDoorTreasureEnv::KeyDoorTreasureEnv(GridMap map, int step_limit)
    : map_(std::move(map)), step_limit_(step_limit) {
  if (step_limit_ <= 0) {
    throw std::invalid_argument("KeyDoorTreasureEnv: step_limit must be positive");
  }
}

int KeyDoorTreasureEnv::encode(int cell, bool has_key, bool door_open) const {
  return cell + map_.n_cells() * ((has_key ? 1 : 0) + 2 * (door_open ? 1 : 0));
}

KeyDoorTreasureEnv::Layout KeyDoorTreasureEnv::decode(int state) const {
  Layout layout;
  layout.cell = state % map_.n_cells();
  const int flags = state / map_.n_cells();
  layout.has_key = (flags & 1) != 0;
  layout.door_open = (flags & 2) != 0;
  return layout;
}

KeyDoorTreasureEnv::Outcome KeyDoorTreasureEnv::simulate(int state, int action) const {
  if (action < 0 || action >= 4) {
    throw std::invalid_argument("KeyDoorTreasureEnv: action out of range");
  }
  Layout at = decode(state);
  const int row = at.cell / map_.width;
  const int col = at.cell % map_.width;
  const int to_row = row + kDeltaRow[action];
  const int to_col = col + kDeltaCol[action];

  Outcome out;
  out.next_state = state;
  if (to_row < 0 || to_row >= map_.height || to_col < 0 || to_col >= map_.width) {
    return out;  // off-grid, stay put
  }
  const int to_cell = to_row * map_.width + to_col;
  if (map_.is_wall(to_cell)) {
    return out;
  }
  bool has_key = at.has_key;
  bool door_open = at.door_open;
  if (to_cell == map_.door_cell && !door_open) {
    if (!has_key) {
      return out;  // closed door acts as a wall
    }
    door_open = true;
    has_key = false;  // the door consumes the key
    out.reward += 1.0;
  }
  // The key lies on the floor only while neither carried nor spent.
  if (to_cell == map_.key_cell && !has_key && !door_open) {
    has_key = true;
    out.reward += 1.0;
  }
  if (to_cell == map_.treasure_cell) {
    out.reward += 5.0;
    out.terminal = true;
  }
  out.next_state = encode(to_cell, has_key, door_open);
  return out;
}

int KeyDoorTreasureEnv::reset(std::uint64_t /*seed*/) {
  state_ = start_state();
  steps_taken_ = 0;
  done_ = false;
  return state_;
}

EnvStep KeyDoorTreasureEnv::step(int action) {
  if (done_) {
    throw std::logic_error("KeyDoorTreasureEnv: step on a finished episode");
  }
  Outcome out = simulate(state_, action);
  EnvStep result;
  ++steps_taken_;
  state_ = out.next_state;
  result.next_observation = out.next_state;
  result.reward = out.reward;
  result.step_index = steps_taken_;
  if (out.terminal) {
    result.done = true;
  } else if (steps_taken_ >= step_limit_) {
    result.done = true;
    result.truncated = true;
  }
  done_ = result.done;
  return result;
}

SparseChainEnv::SparseChainEnv(int length, int step_limit)
    : length_(length), step_limit_(step_limit) {
  if (length_ <= 0 || step_limit_ <= 0) {
    throw std::invalid_argument("SparseChainEnv: length and step_limit must be positive");
  }
}

int SparseChainEnv::reset(std::uint64_t /*seed*/) {
  position_ = 0;
  steps_taken_ = 0;
  done_ = false;
  return position_;
}

EnvStep SparseChainEnv::step(int action) {
  if (done_) {
    throw std::logic_error("SparseChainEnv: step on a finished episode");
  }
  if (action < 0 || action >= 2) {
    throw std::invalid_argument("SparseChainEnv: action out of range");
  }
  ++steps_taken_;
  position_ = action == 1 ? position_ + 1 : std::max(0, position_ - 1);
  EnvStep result;
  result.step_index = steps_taken_;
  result.next_observation = position_;
  if (position_ == length_) {
    result.reward = 1.0;
    result.done = true;
  } else if (steps_taken_ >= step_limit_) {
    result.done = true;
    result.truncated = true;
  }
  done_ = result.done;
  return result;
}

StickyWrapper::StickyWrapper(std::unique_ptr<Env> inner, double repeat_probability)
    : inner_(std::move(inner)), repeat_probability_(repeat_probability) {
  if (!inner_) {
    throw std::invalid_argument("StickyWrapper: missing inner environment");
  }
  if (!(repeat_probability_ >= 0.0 && repeat_probability_ <= 1.0)) {
    throw std::invalid_argument("StickyWrapper: repeat probability must lie in [0, 1]");
  }
}

std::string StickyWrapper::name() const {
  if (repeat_probability_ == 0.0) return inner_->name();
  std::ostringstream label;
  label << inner_->name() << "_p" << repeat_probability_;
  return label.str();
}

int StickyWrapper::reset(std::uint64_t seed) {
  rng_ = Rng(derive_seed(seed, Stream::StickyDraws));
  last_action_ = -1;
  return inner_->reset(seed);
}

EnvStep StickyWrapper::step(int action) {
  int executed = action;
  if (last_action_ >= 0) {
    ++draws_;
    if (rng_.bernoulli(repeat_probability_)) {
      executed = last_action_;
      ++repeats_;
    }
  }
  last_action_ = executed;
  return inner_->step(executed);
}

double random_policy_return(Env& env, int episodes, std::uint64_t seed) {
  Rng rng(derive_seed(seed, Stream::EvalEnv));
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(derive_seed(seed, Stream::EvalEnv, static_cast<std::uint64_t>(ep) + 1));
    bool done = false;
    while (!done) {
      EnvStep step = env.step(rng.uniform_index(env.n_actions()));
      total += step.reward;
      done = step.done;
    }
  }
  return total / episodes;
}

}  // namespace sail
