#pragma once

#include <array>
#include <cstdint>

#include "ustatlab/normal.hpp"

namespace ustatlab {

// Stream roles. Distinct roles give disjoint counter blocks, so the path
// generator, oracle sampler and subset sampler of one experiment never
// collide even at equal (seed, replication).
enum class StreamRole : std::uint32_t {
  path = 1,
  oracle = 2,
  subsets = 3,
  centering = 4,
  probe = 5,
  projection = 6,
  sigma = 7,
};

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// A stream is identified by (seed, stream_id, salt); the 64-bit block
// counter advances within the stream. Pure function of its key and
// counter, hence bitwise-reproducible on any platform and trivially
// splittable across replications.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint32_t stream_id, StreamRole role,
               std::uint32_t salt_extra = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id),
        salt_(static_cast<std::uint32_t>(role) | (salt_extra << 8)) {}

  std::uint64_t next_u64() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const std::array<std::uint32_t, 4> block = next_block();
    spare_ = (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
    have_spare_ = true;
    return (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
  }

  // Uniform on (0,1), both endpoints excluded.
  double next_double() {
    const std::uint64_t v = next_u64() >> 11;
    return (static_cast<double>(v) + 0.5) * 0x1.0p-53;
  }

  // Standard normal by inverse-transform sampling. One uniform per draw;
  // no rejection, so consumption is deterministic.
  double next_normal() { return inverse_normal_cdf(next_double()); }

  // Uniform integer in [0, bound) by rejection on the top of the range.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

  // UniformRandomBitGenerator interface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return UINT64_MAX; }
  result_type operator()() { return next_u64(); }

  // Raw block transform, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(
      const std::array<std::uint32_t, 4>& counter,
      const std::array<std::uint32_t, 2>& key);

 private:
  std::array<std::uint32_t, 4> next_block() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_counter_),
        static_cast<std::uint32_t>(block_counter_ >> 32), salt_, stream_id_};
    ++block_counter_;
    return block(ctr, key_);
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_id_;
  std::uint32_t salt_;
  std::uint64_t block_counter_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

// 64-bit FNV-1a, used to derive deterministic sub-stream salts from
// argument bytes (e.g. projection points).
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace ustatlab
