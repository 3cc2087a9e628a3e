// Counter-based random number streams (Philox4x32-10).
//
// Every draw is a pure function of (master_seed, stream_id, draw_index), so
// results are reproducible under any parallel schedule: workers simply use
// distinct stream ids. Distinct streams are statistically independent.
#pragma once

#include <array>
#include <cstdint>

namespace lerwlab {

namespace detail {

// One Philox4x32-10 block. Verified against the published known-answer
// vectors (e.g. ctr=0,key=0 -> 6627e8d5 e169c58d bc57ac4c 9b00dbd8).
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t ctr_lo,
                                               std::uint64_t ctr_hi,
                                               std::uint64_t key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  std::uint32_t c0 = static_cast<std::uint32_t>(ctr_lo);
  std::uint32_t c1 = static_cast<std::uint32_t>(ctr_lo >> 32);
  std::uint32_t c2 = static_cast<std::uint32_t>(ctr_hi);
  std::uint32_t c3 = static_cast<std::uint32_t>(ctr_hi >> 32);
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c0;
    std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c2;
    std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
    std::uint32_t n1 = static_cast<std::uint32_t>(p1);
    std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
    std::uint32_t n3 = static_cast<std::uint32_t>(p0);
    c0 = n0; c1 = n1; c2 = n2; c3 = n3;
    k0 += W0; k1 += W1;
  }
  return {c0, c1, c2, c3};
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Hash a few integers into a stream id (fed by experiment id, rung index,
// replicate index, ...).
inline std::uint64_t mix_stream(std::uint64_t a, std::uint64_t b) {
  return detail::splitmix64(a ^ detail::splitmix64(b));
}
inline std::uint64_t mix_stream(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_stream(mix_stream(a, b), c);
}

std::uint64_t hash_stream_name(const char* s);  // FNV-1a over bytes, mixed

class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : seed_(master_seed), stream_(stream_id) {}

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  // Independent child stream; used for per-trial randomness so that trial k
  // sees the same draws no matter which thread runs it.
  RngStream substream(std::uint64_t k) const {
    return RngStream(seed_, mix_stream(stream_, k));
  }

  std::uint64_t next_u64() {
    if (have_ == 0) {
      auto b = detail::philox4x32(counter_++, stream_, seed_);
      buf_[1] = static_cast<std::uint64_t>(b[0]) | (static_cast<std::uint64_t>(b[1]) << 32);
      buf_[0] = static_cast<std::uint64_t>(b[2]) | (static_cast<std::uint64_t>(b[3]) << 32);
      have_ = 2;
    }
    return buf_[--have_];
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0,...,n-1} by 128-bit multiply; consumes exactly one draw.
  // The reduction bias is < n / 2^64, far below any statistical resolution
  // reachable here.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // One direction draw per step; packs two 32-bit reductions into each u64
  // (bias < two_d / 2^32, irrelevant at any trial count used here).
  int direction(int two_d) {
    if (!have_half_) {
      std::uint64_t w = next_u64();
      half_ = static_cast<std::uint32_t>(w >> 32);
      have_half_ = true;
      return static_cast<int>((static_cast<std::uint64_t>(static_cast<std::uint32_t>(w)) *
                               static_cast<std::uint64_t>(two_d)) >> 32);
    }
    have_half_ = false;
    return static_cast<int>((static_cast<std::uint64_t>(half_) *
                             static_cast<std::uint64_t>(two_d)) >> 32);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int have_ = 0;
  std::uint32_t half_ = 0;
  bool have_half_ = false;
};

}  // namespace lerwlab
