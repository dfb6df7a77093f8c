#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace absa {

// Deterministic random source. All sampling paths are hand-rolled on top of
// mt19937_64 so that a given seed produces the same stream on every platform
// (std::uniform_real_distribution and std::shuffle make no such guarantee).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  void seed(std::uint64_t s) { engine_.seed(s); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    const double unit = (next_u64() >> 11) * (1.0 / 9007199254740992.0);
    return lo + (hi - lo) * unit;
  }

  bool bernoulli(double p_true) { return uniform(0.0, 1.0) < p_true; }

  // Uniform integer in [0, n). Modulo bias is irrelevant at our scales.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Process-wide generator used by initialization, dropout, batching and the
// training schedule. Seeded once from the run config.
Rng& global_rng();
void seed_global_rng(std::uint64_t seed);

}  // namespace absa
