#pragma once
// Counter-based random number generation (Philox4x32-10).
//
// Streams are addressed by (seed, replication, stream tag, round). The seed
// forms the Philox key; replication, tag and round sit in the counter block
// together with a per-round draw index, so re-seeking a round always replays
// the same draws no matter how many values earlier rounds consumed.
//
// Scalar draws are derived from the 32-bit outputs as:
//   uniform double in [0,1):  (u64 >> 11) * 2^-53
//   standard normal:          Box-Muller cosine branch, two uniforms per draw
//   bernoulli(p):             next uniform < p

#include <array>
#include <cmath>
#include <cstdint>

namespace glmcs {

struct Philox4x32 {
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                       std::array<uint32_t, 2> key) {
    for (int round = 0;; ++round) {
      const uint64_t p0 = uint64_t(kMul0) * ctr[0];
      const uint64_t p1 = uint64_t(kMul1) * ctr[2];
      ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], uint32_t(p1),
             uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], uint32_t(p0)};
      if (round == 9) return ctr;
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
  }
};

class CounterRng {
 public:
  explicit CounterRng(uint64_t seed, uint32_t replication = 0, uint32_t stream = 0)
      : key_{uint32_t(seed), uint32_t(seed >> 32)},
        replication_(replication),
        stream_(stream) {}

  // Positions the stream at the start of a round's draw sequence.
  void seek_round(uint32_t round) {
    round_ = round;
    draw_ = 0;
    available_ = 0;
  }

  uint32_t round() const { return round_; }

  uint64_t next_u64() {
    if (available_ == 0) {
      block_ = Philox4x32::block({draw_, round_, replication_, stream_}, key_);
      ++draw_;
      available_ = 2;
    }
    --available_;
    const int base = available_ == 1 ? 0 : 2;
    return uint64_t(block_[base]) | (uint64_t(block_[base + 1]) << 32);
  }

  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double next_normal() {
    const double u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool next_bernoulli(double p) { return next_double() < p; }

 private:
  std::array<uint32_t, 2> key_;
  uint32_t replication_;
  uint32_t stream_;
  uint32_t round_ = 0;
  uint32_t draw_ = 0;
  std::array<uint32_t, 4> block_{};
  int available_ = 0;
};

}  // namespace glmcs
