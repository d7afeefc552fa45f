#pragma once

#include <cstdint>
#include <vector>

#include "dme/modulo_quantizer.hpp"
#include "dme/rotation.hpp"
#include "dme/types.hpp"

namespace dme {

/// Per-client configuration for the known-distance quantizers. Derived from
/// (n, d, r, delta) by known_params(); d is the padded dimension and all bit
/// accounting refers to it.
struct WzKnownParams {
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t r = 0;
  double delta = 0.0;        // distance budget for this client
  double delta_small = 0.0;  // bias knob, 0 < delta_small < delta
  MqParams mq;
  std::size_t sampled = 0;  // coordinates transmitted (mu*d; = d when full)
  Precision regime = Precision::low;
  bool rotated = true;  // false for the per-coordinate baseline

  /// Exact side information: no bits carry information, decoder returns y.
  bool degenerate() const { return delta == 0.0; }

  double sampling_fraction() const {
    return static_cast<double>(sampled) / static_cast<double>(d);
  }
  std::size_t message_bits() const { return sampled * mq.bit_width(); }
};

/// Low precision: delta_small = delta/sqrt(n), log k = ceil(log2(2 +
/// sqrt(12 ln n))), mu*d = floor(r / log k); requires n >= 2 and
/// d >= r >= 2 log k. High precision: r = m*d with integer m >= 2, k = 2^m,
/// delta_small = delta / (sqrt(n) (2^m - 2)), no subsampling. Both use
/// delta_prime = sqrt(6 (delta^2/d) ln(delta/delta_small)). delta = 0 yields
/// a degenerate config.
WzKnownParams known_params(std::size_t n, std::size_t d, std::size_t r,
                           double delta, Precision regime);

/// Full-dimension rotated-quantizer configuration with an explicit
/// resolution k and bias knob delta_small in (0, delta). sampled = d.
WzKnownParams rmq_params(std::size_t d, double delta, double delta_small,
                         std::uint32_t k);

/// Matched-budget comparison scheme: per-coordinate MQ without rotation,
/// delta_prime = delta (always in the exact-recovery range, hence unbiased),
/// same k and sampled count as the low-precision config.
WzKnownParams baseline_params(std::size_t n, std::size_t d, std::size_t r,
                              double delta);

/// Rotate with stream-drawn signs, then one MQ word per coordinate.
std::vector<MqWord> rmq_encode(const Vector& x, const WzKnownParams& params,
                               RandomStream& root);

/// Replays the signs, decodes each coordinate against the rotated side
/// information, and inverse-rotates.
Vector rmq_decode(const std::vector<MqWord>& words, const Vector& y,
                  const WzKnownParams& params, RandomStream& root);

/// MQ words for the sampled coordinates only, ascending coordinate index.
/// The subset is reconstructed from shared randomness, never transmitted.
struct SwzMessage {
  std::vector<MqWord> words;
};

SwzMessage swz_encode(const Vector& x, const WzKnownParams& params,
                      RandomStream& root);

/// Sampled coordinates are centered on the side information and scaled by
/// 1/mu; unsampled coordinates fall back to the side information.
Vector swz_decode(const SwzMessage& msg, const Vector& y,
                  const WzKnownParams& params, RandomStream& root);

/// Wire format: sampled-count fields of ceil(log2 k) bits, little-endian bit
/// packing, no header.
std::vector<std::uint8_t> serialize(const SwzMessage& msg,
                                    const WzKnownParams& params);
SwzMessage deserialize_swz(std::span<const std::uint8_t> bytes,
                           const WzKnownParams& params);

}  // namespace dme
