#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace amagold {

// Mixes a master seed with a counter into an independent 64-bit seed
// (SplitMix64 finalizer applied to both words).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) noexcept;

// A seeded random stream. Streams are passed explicitly everywhere; nothing in
// the library owns hidden global randomness.
class RandomStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  // Independent sub-stream number `counter` of `master`.
  static RandomStream derive(std::uint64_t master, std::uint64_t counter) {
    return RandomStream(derive_seed(master, counter));
  }

  // Splits off a child stream; advances this stream by one draw.
  RandomStream split() { return RandomStream(derive_seed(engine_(), seed_)); }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return normal_(engine_); }

  // Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 64>(engine_); }

  // Vector of i.i.d. N(0, stddev^2) entries.
  Eigen::VectorXd normal_vector(Eigen::Index size, double stddev = 1.0);

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t seed_;
};

}  // namespace amagold
