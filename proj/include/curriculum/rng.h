#ifndef CURRICULUM_RNG_H_
#define CURRICULUM_RNG_H_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace curriculum {

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds a list of counters into a stream key:
//   key = Mix64(... Mix64(Mix64(master) + c0) ... + cn)
// Streams for (master_seed, run, student, channel) are derived this way so
// that every draw depends only on its coordinates, never on execution order.
constexpr std::uint64_t DeriveSeed(std::uint64_t master,
                                   std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = Mix64(master ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t c : path) key = Mix64(key + 0x9e3779b97f4a7c15ULL * (c + 1));
  return key;
}

// Counter-based SplitMix64 stream. Satisfies UniformRandomBitGenerator, but
// the helpers below are used in preference to <random> distributions so that
// draws are identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix64(state_);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t Below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::Below: empty range");
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t v;
    do {
      v = (*this)();
    } while (v >= limit);
    return v % n;
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Box-Muller; consumes two draws per call.
  double Normal() {
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace curriculum

#endif  // CURRICULUM_RNG_H_
