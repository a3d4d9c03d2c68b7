#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sail/rng.hpp"

namespace sail {

struct EnvStep {
  int next_observation = 0;
  double reward = 0.0;
  bool done = false;       // episode over, reset required
  bool truncated = false;  // step limit hit without a terminal transition
  int step_index = 0;      // steps taken in the episode so far
};

class Env {
 public:
  virtual ~Env() = default;
  virtual int reset(std::uint64_t seed) = 0;
  virtual EnvStep step(int action) = 0;
  virtual int n_states() const = 0;
  virtual int n_actions() const = 0;
  virtual std::string name() const = 0;
};

// Rectangular grid parsed from ASCII art: `#` wall, `.` floor, `A` start,
// `K` key, `D` door, `T` treasure. Exactly one of each marker.
struct GridMap {
  int width = 0;
  int height = 0;
  std::vector<char> walls;  // 1 = wall cell
  int start_cell = -1;
  int key_cell = -1;
  int door_cell = -1;
  int treasure_cell = -1;

  int n_cells() const { return width * height; }
  bool is_wall(int cell) const { return walls[cell] != 0; }
};

GridMap parse_grid_map(const std::string& ascii_art, const std::string& source_name = "map");
GridMap load_grid_map(const std::string& path);

// 7x9 layout with one interior wall row holding the door. The key and the
// start sit below the wall, the treasure above it.
GridMap default_key_door_treasure_map();

// Sparse latched-subgoal gridworld: +1 on picking up the key, +1 on opening
// the door (which consumes the key), +5 on reaching the treasure (episode
// ends). Moves into walls or the closed door are no-ops costing one step.
// Actions: 0 up, 1 down, 2 left, 3 right.
class KeyDoorTreasureEnv : public Env {
 public:
  explicit KeyDoorTreasureEnv(GridMap map = default_key_door_treasure_map(),
                              int step_limit = 300);

  int reset(std::uint64_t seed) override;
  EnvStep step(int action) override;
  int n_states() const override { return map_.n_cells() * 4; }
  int n_actions() const override { return 4; }
  std::string name() const override { return "keydoor"; }

  // Bijective encoding of (agent cell, has_key, door_open).
  int encode(int cell, bool has_key, bool door_open) const;
  struct Layout {
    int cell = 0;
    bool has_key = false;
    bool door_open = false;
  };
  Layout decode(int state) const;

  struct Outcome {
    int next_state = 0;
    double reward = 0.0;
    bool terminal = false;
  };
  // Deterministic transition model, independent of episode bookkeeping.
  // Test oracles (breadth-first search) and reference policies build on it.
  Outcome simulate(int state, int action) const;

  const GridMap& map() const { return map_; }
  int step_limit() const { return step_limit_; }
  int start_state() const { return encode(map_.start_cell, false, false); }

 private:
  GridMap map_;
  int step_limit_;
  int state_ = 0;
  int steps_taken_ = 0;
  bool done_ = true;
};

// Length-n corridor with positions 0..n; the far end pays +1 and terminates.
// Actions: 0 left (clamped at 0), 1 right.
class SparseChainEnv : public Env {
 public:
  explicit SparseChainEnv(int length = 20, int step_limit = 60);

  int reset(std::uint64_t seed) override;
  EnvStep step(int action) override;
  int n_states() const override { return length_ + 1; }
  int n_actions() const override { return 2; }
  std::string name() const override { return "chain"; }

  int length() const { return length_; }

 private:
  int length_;
  int step_limit_;
  int position_ = 0;
  int steps_taken_ = 0;
  bool done_ = true;
};

// Repeats the previously executed action with probability p instead of the
// requested one. The first step of an episode always honors the request.
class StickyWrapper : public Env {
 public:
  StickyWrapper(std::unique_ptr<Env> inner, double repeat_probability);

  int reset(std::uint64_t seed) override;
  EnvStep step(int action) override;
  int n_states() const override { return inner_->n_states(); }
  int n_actions() const override { return inner_->n_actions(); }
  std::string name() const override;

  double repeat_probability() const { return repeat_probability_; }
  // Diagnostics: sticky draws made / draws that fired.
  std::int64_t draw_count() const { return draws_; }
  std::int64_t repeat_count() const { return repeats_; }

 private:
  std::unique_ptr<Env> inner_;
  double repeat_probability_;
  Rng rng_{0};
  int last_action_ = -1;
  std::int64_t draws_ = 0;
  std::int64_t repeats_ = 0;
};

// Undiscounted mean episode return of the uniform-random policy.
double random_policy_return(Env& env, int episodes, std::uint64_t seed);

}  // namespace sail
