#pragma once

#include <cstdint>
#include <random>

namespace sail {

// Fixed labels for the per-component random streams of a run. Every stream is
// derived from the master seed plus one of these labels, so a (config, seed)
// pair fully determines every random draw of a run.
enum class Stream : std::uint64_t {
  EnvDynamics = 1,
  StickyDraws = 2,
  AgentInit = 3,
  Exploration = 4,
  ReplaySampling = 5,
  EvalEnv = 6,
  Diagnostics = 7,
  MdpGen = 8,
};

namespace detail {
// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Mixes (master seed, stream label, index) into an independent derived seed.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                 std::uint64_t index = 0) {
  std::uint64_t x = detail::mix64(master);
  x = detail::mix64(x ^ (static_cast<std::uint64_t>(stream) * 0xd1342543de82ef95ULL));
  x = detail::mix64(x ^ (index * 0xaf251af3b0f025b5ULL));
  return x;
}

// mt19937_64 with hand-rolled draw helpers. The standard library
// distributions are implementation-defined, so all sampling goes through
// these to keep runs bit-reproducible across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Modulo bias is negligible for desk-scale n.
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

  int uniform_index(int n) {
    return static_cast<int>(uniform_int(static_cast<std::uint64_t>(n)));
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace sail
