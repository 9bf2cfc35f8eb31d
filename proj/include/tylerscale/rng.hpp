#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace tylerscale {

/// Identifies one reproducible random stream: trial t of an experiment uses
/// stream_index = t under the experiment's master seed.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based generator over one (seed, stream, lane) triple.
///
/// The key is the master seed; the counter holds the stream index, a lane
/// number and a block index. Distinct lanes of the same stream are
/// independent, so a consumer can split e.g. directions and radii into
/// separate lanes and keep one unaffected by how many draws the other takes.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(SeedSpec seed, std::uint32_t lane = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on the open interval (0, 1), 53 random bits.
  double uniform();

  // Standard normal via the Box-Muller transform; the second value of each
  // pair is cached for the next call.
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tylerscale
