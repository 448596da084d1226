#pragma once

#include <array>
#include <cstdint>

namespace hybridsim {

// Philox4x64-10 counter-based generator.  Each trajectory owns a stream
// keyed by (master_seed, stream_index), so ensembles are reproducible under
// any parallel schedule.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : key_{seed, stream}, ctr_{0, 0, 0, 0}, pos_(4) {}

  std::uint64_t next_u64();

  // uniform in [0,1) with 53-bit resolution
  double next_double();
  // uniform in (0,1]; safe as a log() argument
  double next_double_open();
  // standard normal via Box-Muller; pairs cached
  double next_gaussian();

  // raw block function, exposed for known-answer tests
  static std::array<std::uint64_t, 4> block(
      const std::array<std::uint64_t, 4>& counter,
      const std::array<std::uint64_t, 2>& key);

 private:
  void refill();
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> ctr_;
  std::array<std::uint64_t, 4> buf_{};
  int pos_;
  bool has_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

}  // namespace hybridsim
