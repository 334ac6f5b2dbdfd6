#pragma once

#include <cstdint>
#include <random>

namespace latentis {

/// Seeded random stream used everywhere randomness is needed. Uniforms come
/// from MT19937-64 (fully specified by the C++ standard, so streams reproduce
/// across platforms); normals are produced by the Box-Muller transform on two
/// uniforms rather than std::normal_distribution, whose output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; draws are consumed in pairs.
  double gaussian();

  /// Integer in [0, bound) by rejection-free scaling (bound << 2^53).
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound));
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace latentis
