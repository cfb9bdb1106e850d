#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace wire {

/// Counter-based deterministic random generator (Philox 4x32-10).
///
/// The stream is a pure function of (seed, stream id), so identical seeds
/// reproduce identical draws on every platform. Independent sub-streams are
/// derived by index or by name; parallel workers each take their own
/// sub-stream and never contend on shared state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Derives an independent child stream. Children with distinct indices
  /// (or distinct names) produce statistically independent sequences.
  [[nodiscard]] Rng substream(std::uint64_t index) const;
  [[nodiscard]] Rng substream(std::string_view name) const;
  [[nodiscard]] Rng substream(std::string_view name, std::uint64_t index) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; the spare value is cached.
  double gaussian();

  /// Uniform integer in [0, bound), unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint32_t, 2> key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 4;  // 32-bit words already consumed from block_
  bool have_spare_ = false;
  double spare_ = 0.0;

  std::uint32_t next_u32();
};

}  // namespace wire
