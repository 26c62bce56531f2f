#pragma once

#include <array>
#include <cstdint>

namespace ridgelab {

/// splitmix64 finalizer; used to derive keys, never as a generator.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Identifies one reproducible random stream. Equal values give equal
/// sequences; distinct stream indices map to disjoint Philox counter ranges.
struct SeedStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  /// Independent stream for a sub-task (resampling attempt, inner MC, ...).
  /// salt 0 is the identity.
  SeedStream derive(std::uint64_t salt) const noexcept {
    if (salt == 0) return *this;
    return {mix64(master_seed ^ mix64(salt)), stream_index};
  }

  friend bool operator==(const SeedStream&, const SeedStream&) = default;
};

/// Counter-based generator over (master_seed, stream_index, position).
///
/// The Philox key is the master seed, the high 64 counter bits are the stream
/// index and the low 64 bits the block position, so the n-th draw of a stream
/// is a pure function of (seed, stream, n).
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(SeedStream stream) noexcept : stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  SeedStream stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  SeedStream stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ridgelab
