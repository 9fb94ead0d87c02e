#pragma once

#include <cstdint>
#include <random>

namespace qttt {

/// Seedable deterministic random stream. Two streams built from the same
/// seed produce identical sequences.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  std::uint64_t next_u64() { return engine_(); }
  double normal(double mean, double stddev);

  std::mt19937_64& engine() { return engine_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent child seed from a base seed and up to two tags.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag_a, std::uint64_t tag_b = 0);

}  // namespace qttt
