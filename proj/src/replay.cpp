#include "sail/replay.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace sail {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  }
  slots_.resize(capacity_);
}

std::size_t ReplayBuffer::size() const {
  return static_cast<std::size_t>(std::min<std::uint64_t>(total_, capacity_));
}

std::uint64_t ReplayBuffer::oldest_logical() const { return total_ - size(); }

std::uint64_t ReplayBuffer::open_base() const {
  if (!open_) return total_;
  return std::max(open_begin_, oldest_logical());
}

std::size_t ReplayBuffer::finalized_size() const {
  return static_cast<std::size_t>(open_base() - oldest_logical());
}

const TransitionRecord& ReplayBuffer::at(std::size_t index) const {
  if (index >= size()) {
    throw std::out_of_range("ReplayBuffer: index out of range");
  }
  return slots_[(oldest_logical() + index) % capacity_];
}

void ReplayBuffer::store(TransitionRecord record) {
  if (record.mc_return.has_value()) {
    throw std::invalid_argument("ReplayBuffer: stored records must carry the return placeholder");
  }
  if (!open_) {
    open_ = true;
    open_begin_ = total_;
    ++next_episode_id_;
  }
  record.episode_id = next_episode_id_ - 1;
  record.t_within_episode = static_cast<int>(total_ - open_begin_);
  slots_[total_ % capacity_] = std::move(record);
  ++total_;
}

void ReplayBuffer::finalize_episode(double gamma, bool truncated) {
  if (!open_ || open_begin_ == total_) {
    throw std::invalid_argument("ReplayBuffer: no open episode to finalize");
  }
  const TransitionRecord& last = slots_[(total_ - 1) % capacity_];
  if (!truncated && !last.done) {
    throw std::invalid_argument(
        "ReplayBuffer: episode is not terminal; pass truncated=true to finalize a cutoff");
  }
  // The evicted prefix is gone; the surviving suffix still gets exact
  // returns because G_t only depends on rewards from t onward.
  const std::uint64_t begin = std::max(open_begin_, oldest_logical());
  double acc = 0.0;
  for (std::uint64_t logical = total_; logical-- > begin;) {
    TransitionRecord& rec = slots_[logical % capacity_];
    acc = rec.reward + gamma * acc;
    rec.mc_return = acc;
  }
  open_ = false;
}

bool ReplayBuffer::sample_uniform(std::size_t batch_size, Rng& rng,
                                  std::vector<TransitionRecord>& out) const {
  const std::uint64_t first = oldest_logical();
  const std::uint64_t count = open_base() - first;
  if (count == 0) {
    return false;
  }
  out.clear();
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::uint64_t logical = first + rng.uniform_int(count);
    out.push_back(slots_[logical % capacity_]);
  }
  return true;
}

void ReplayBuffer::dump_csv(std::ostream& out) const {
  out << "state,action,reward,next_state,done,mc_return,episode_id,t\n";
  out.precision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    const TransitionRecord& rec = at(i);
    out << rec.state << ',' << rec.action << ',' << rec.reward << ',' << rec.next_state << ','
        << (rec.done ? 1 : 0) << ',';
    if (rec.mc_return.has_value()) {
      out << *rec.mc_return;
    } else {
      out << "nan";
    }
    out << ',' << rec.episode_id << ',' << rec.t_within_episode << '\n';
  }
}

}  // namespace sail
