#pragma once

#include <cstdint>
#include <random>

namespace lrca {

/// SplitMix64 finalizer applied to x + golden gamma; a bijection on 64 bits.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Stream seed for replication `index` of an experiment. For a fixed master
/// seed the map index -> seed is injective (composition of bijections).
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

/// Seed for auxiliary draws (e.g. fixed covariates) tagged by a label value.
std::uint64_t derived_seed(std::uint64_t master_seed, std::uint64_t tag_a,
                           std::uint64_t tag_b) noexcept;

/// Platform-independent variate stream: mt19937_64 bits with hand-rolled
/// uniform and Box-Muller normal transforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace lrca
