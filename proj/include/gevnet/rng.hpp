#pragma once

#include <cmath>
#include <cstdint>

namespace gevnet {

// SplitMix64 (Steele, Lea & Flood 2014). Chosen over std::mt19937 because the
// update is a fixed 64-bit mixing function of the state, so streams replay
// bit-identically on every platform and substreams can be derived by hashing
// (seed, stream) pairs. All randomized pipeline stages take one of these (or a
// seed) explicitly.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Uniform on the open interval (0,1): 53-bit mantissa, offset by half an ulp
  // so 0 and 1 are unreachable.
  double next_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Uniform on (lo, hi), strictly interior.
  double next_uniform(double lo, double hi) {
    double v = lo + (hi - lo) * next_open01();
    // Guard against rounding up to an open endpoint.
    if (v >= hi) v = std::nextafter(hi, lo);
    if (v <= lo) v = std::nextafter(lo, hi);
    return v;
  }

  // Finalizer of SplitMix64; full-period bijection on 64-bit ints.
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Decorrelated child seed for (base, stream). Used wherever work items need
  // independent streams that do not depend on scheduling order.
  static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
    return mix(base + 0x9E3779B97F4A7C15ull * (stream + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace gevnet
