#pragma once
// Seeded sampling helpers for the event simulator.
//
// std::mt19937_64 supplies the raw bits, but the exponential/normal transforms
// are written out explicitly (inverse CDF, Box-Muller) so that a given seed
// produces the same tag stream on every platform; libstdc++'s distribution
// objects do not guarantee that.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace twinrange::rng {

// splitmix64, the usual seed expander. Good enough to decorrelate substreams
// derived from (master seed, stream tag).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_tag) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream_tag));
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  std::uint64_t bits() { return gen_(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift; bias is < 2^-64 per draw, irrelevant at our draw counts.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // Exponential inter-arrival gap for a Poisson process of the given rate.
  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  // One Gaussian draw via Box-Muller. The second value of the pair is
  // discarded on purpose: no hidden cache, so the draw sequence is a pure
  // function of the preceding call count.
  double normal(double mean, double sigma) {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace twinrange::rng
