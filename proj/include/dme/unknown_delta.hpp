#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "dme/rotation.hpp"
#include "dme/types.hpp"

namespace dme {

/// Smallest j >= 0 such that applying ln j times to a gives a value < 1.
int iterated_log_star(double a);

/// Scale grid for the distance-adaptive quantizers: M_j^2 = (6/d) e^{*j}
/// with the iterated-exponential tower e^{*0} = 1, e^{*j} = e^{e^{*(j-1)}},
/// and h = 2^ceil(log2(1 + ln*(d/6))) scales. The final scale always covers
/// the rotated unit ball (M_{h-1} >= 1).
struct RdaqLevels {
  std::size_t d = 0;
  std::size_t h = 0;
  std::vector<double> scale_bound;  // M_0 < M_1 < ... < M_{h-1}

  /// Wire width of one scale index: ceil(log2 h) bits (0 when h = 1).
  unsigned scale_bits() const {
    return std::bit_width(static_cast<std::uint64_t>(h - 1));
  }
};

RdaqLevels rdaq_levels(std::size_t d);

/// One-bit-per-coordinate correlated sampling: bit i is 1{U(i) <= x(i)} with
/// U(i) ~ Unif[-1, 1] shared between encoder and decoder. Input must lie in
/// the unit ball.
std::vector<std::uint8_t> daq_encode(const Vector& x, RandomStream& root);

/// Recomputes the side-information bits with the same uniforms and returns
/// 2(w - ytilde) + y: exactly unbiased, MSE = 2|x-y|_1 - |x-y|_2^2.
Vector daq_decode(const std::vector<std::uint8_t>& bits, const Vector& y,
                  RandomStream& root);

/// Rotated multi-scale message: h correlated-sampling bits plus one scale
/// index per coordinate, z(i) = min{j : |Rx(i)| <= M_j}.
struct RdaqMessage {
  std::vector<std::uint8_t> bits;    // size d*h, coordinate-major
  std::vector<std::uint8_t> scales;  // size d

  std::uint8_t bit(std::size_t i, std::size_t j, std::size_t h) const {
    return bits[i * h + j];
  }
};

RdaqMessage rdaq_encode(const Vector& x, const RdaqLevels& levels,
                        RandomStream& root);
Vector rdaq_decode(const RdaqMessage& msg, const Vector& y,
                   const RdaqLevels& levels, RandomStream& root);

/// Subsampled variant: the per-coordinate payload is kept only for a shared
/// random subset of `sampled` coordinates (bits/scales are indexed by
/// position within the sorted subset).
RdaqMessage srdaq_encode(const Vector& x, const RdaqLevels& levels,
                         std::size_t sampled, RandomStream& root);
Vector srdaq_decode(const RdaqMessage& msg, const Vector& y,
                    const RdaqLevels& levels, std::size_t sampled,
                    RandomStream& root);

/// Boosted variant: per (coordinate, scale) the encoder repeats the
/// correlated-sampling bit N times with fresh shared uniforms and transmits
/// the ones-count.
struct BrdaqMessage {
  std::vector<std::uint32_t> counts;  // size d*h, coordinate-major
  std::vector<std::uint8_t> scales;   // size d

  std::uint32_t count(std::size_t i, std::size_t j, std::size_t h) const {
    return counts[i * h + j];
  }
};

BrdaqMessage brdaq_encode(const Vector& x, const RdaqLevels& levels,
                          std::size_t repetitions, RandomStream& root);
Vector brdaq_decode(const BrdaqMessage& msg, const Vector& y,
                    const RdaqLevels& levels, std::size_t repetitions,
                    RandomStream& root);

/// Budget-derived configuration for the distance-unaware schemes.
struct UnknownParams {
  std::size_t d = 0;
  std::size_t r = 0;
  RdaqLevels levels;
  std::size_t sampled = 0;      // low precision: mu*d
  std::size_t repetitions = 1;  // boosted: N
  Precision regime = Precision::low;

  std::size_t message_bits() const;
};

UnknownParams unknown_params(std::size_t d, std::size_t r, Precision regime);

/// Wire formats (little-endian bit packing, no header): correlated-sampling
/// bits first, then scale indices; boosted counts use ceil(log2(N+1)) bits.
std::vector<std::uint8_t> serialize(const RdaqMessage& msg,
                                    const RdaqLevels& levels);
RdaqMessage deserialize_rdaq(std::span<const std::uint8_t> bytes,
                             const RdaqLevels& levels, std::size_t entries);
std::vector<std::uint8_t> serialize(const BrdaqMessage& msg,
                                    const RdaqLevels& levels,
                                    std::size_t repetitions);
BrdaqMessage deserialize_brdaq(std::span<const std::uint8_t> bytes,
                               const RdaqLevels& levels,
                               std::size_t repetitions, std::size_t entries);

std::vector<std::uint8_t> serialize_daq(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> deserialize_daq(std::span<const std::uint8_t> bytes,
                                          std::size_t d);

}  // namespace dme
