#pragma once

#include <cmath>
#include <cstdint>

namespace bubblelab {

// Identifies one reproducible random substream. Equal (seed, stream) pairs
// always reproduce the same draw sequence bit-for-bit.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngSpec offset(std::uint64_t k) const { return RngSpec{seed, stream + k}; }
};

// PCG64 (XSL-RR 128/64). The stream id selects the LCG increment, so every
// stream is a distinct full-period sequence of the same generator family.
class Pcg64 {
 public:
  using result_type = std::uint64_t;

  explicit Pcg64(RngSpec spec) : Pcg64(spec.seed, spec.stream) {}

  Pcg64(std::uint64_t seed, std::uint64_t stream) {
    const u128 initstate = expand(seed, 0x9E3779B97F4A7C15ULL);
    const u128 initseq = expand(stream, 0xD1B54A32D192ED03ULL);
    state_ = 0;
    inc_ = (initseq << 1) | 1u;
    next();
    state_ += initstate;
    next();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Lemire multiply-shift; slight bias is far below
  // anything observable at 64-bit word size.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<u128>(next()) * n) >> 64);
  }

  // Standard normal via Box-Muller. Consumes exactly two words per call so the
  // draw order never depends on caller history.
  double normal() {
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;          // [0, 1)
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  using u128 = unsigned __int128;

  static constexpr u128 mult() {
    return (static_cast<u128>(2549297995355413924ULL) << 64) | 4865540595714422341ULL;
  }

  std::uint64_t next() {
    state_ = state_ * mult() + inc_;
    const auto xored = static_cast<std::uint64_t>((state_ >> 64) ^ state_);
    const auto rot = static_cast<unsigned>(state_ >> 122);
    return (xored >> rot) | (xored << ((64u - rot) & 63u));
  }

  // SplitMix64 expansion of one word into 128 bits of seed material.
  static u128 expand(std::uint64_t v, std::uint64_t salt) {
    std::uint64_t x = v + salt;
    const std::uint64_t hi = mix(x += 0x9E3779B97F4A7C15ULL);
    const std::uint64_t lo = mix(x += 0x9E3779B97F4A7C15ULL);
    return (static_cast<u128>(hi) << 64) | lo;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  u128 state_ = 0;
  u128 inc_ = 0;
};

}  // namespace bubblelab
