#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sail/rng.hpp"

namespace sail {

// One stored interaction. mc_return stays empty (the placeholder) until the
// owning episode is finalized, at which point it holds the discounted
// Monte-Carlo return from this step onward. Truncated episodes keep
// done=false on their last record so TD targets still bootstrap.
struct TransitionRecord {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
  bool done = false;
  std::optional<double> mc_return;
  std::int64_t episode_id = -1;
  int t_within_episode = -1;
};

// Circular episodic buffer with strictly oldest-first eviction. At most one
// episode is open at a time; its records carry the return placeholder and
// are excluded from sampling until finalize_episode backfills them.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  // Appends a placeholder record, evicting the oldest when full. Throws
  // std::invalid_argument if the record already carries a return.
  void store(TransitionRecord record);

  // Backfills mc_return over the surviving records of the open episode in a
  // single backward pass and closes the episode. Unless `truncated`, the
  // episode's last record must have done=true.
  void finalize_episode(double gamma, bool truncated = false);

  // Draws batch_size records i.i.d. uniformly (with replacement) from the
  // finalized records. Returns false when none are finalized yet; callers
  // skip the update in that case.
  bool sample_uniform(std::size_t batch_size, Rng& rng,
                      std::vector<TransitionRecord>& out) const;

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;
  std::size_t finalized_size() const;
  bool episode_open() const { return open_; }

  // Oldest-first access, index in [0, size()).
  const TransitionRecord& at(std::size_t index) const;

  // CSV dump, oldest-first: state,action,reward,next_state,done,mc_return,
  // episode_id,t. Placeholder returns print as nan.
  void dump_csv(std::ostream& out) const;

 private:
  std::uint64_t oldest_logical() const;
  std::uint64_t open_base() const;  // first logical index excluded from sampling

  std::size_t capacity_;
  std::vector<TransitionRecord> slots_;
  std::uint64_t total_ = 0;       // records ever stored
  std::uint64_t open_begin_ = 0;  // logical start of the open episode
  bool open_ = false;
  std::int64_t next_episode_id_ = 0;
};

}  // namespace sail
