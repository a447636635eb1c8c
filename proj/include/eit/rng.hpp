#pragma once
#include <cmath>
#include <cstdint>

namespace eit {

// SplitMix64 stream. Used directly for sampling and for deriving child
// seeds, so that every random quantity in the pipeline is reproducible
// across platforms (no std:: distributions involved).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1), 53-bit resolution
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int n) { return int(next_u64() % std::uint64_t(n)); }

  // Box-Muller, cosine branch only; deterministic everywhere.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double stdev) { return mean + stdev * normal(); }

  // Child seed for a tagged substream of `parent`.
  static std::uint64_t derive(std::uint64_t parent, std::uint64_t tag) {
    Rng r(parent ^ (0xd1b54a32d192ed03ull * (tag + 0x632be59bd9b4e019ull)));
    r.next_u64();
    return r.next_u64();
  }

private:
  std::uint64_t state_;
};

} // namespace eit
