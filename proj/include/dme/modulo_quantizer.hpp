#pragma once

#include <bit>
#include <cstdint>

#include "dme/random.hpp"

namespace dme {

/// Scalar modulo-quantizer configuration. The lattice is eps * Z; the encoder
/// sends the dithered lattice index mod k, and a decoder holding side
/// information within delta_prime of the input recovers the index exactly
/// whenever k * eps >= 2 * (eps + delta_prime).
struct MqParams {
  std::uint32_t k = 0;
  double delta_prime = 0.0;
  double epsilon = 0.0;

  /// Wire width of one word: ceil(log2(k)) bits.
  unsigned bit_width() const { return std::bit_width(k - 1); }
};

/// Params with epsilon = 2 * delta_prime / (k - 2), which meets the recovery
/// condition with equality. Requires k >= 3 and delta_prime > 0.
MqParams mq_params(std::uint32_t k, double delta_prime);

using MqWord = std::uint32_t;

/// Randomized rounding of x onto eps * Z followed by mod-k reduction. The
/// dithered index ztilde satisfies E[ztilde * eps] = x and
/// |x - ztilde * eps| < eps; the word is the nonnegative remainder mod k.
/// Consumes exactly one draw from the stream per call.
MqWord mq_encode(double x, const MqParams& params, RandomStream& dither);

/// Nearest point to y in the coset {(z*k + w) * eps : z in Z}. Always within
/// k * eps of y; recovers ztilde * eps exactly when |x - y| <= delta_prime
/// and the params meet the recovery condition.
double mq_decode(MqWord w, double y, const MqParams& params);

}  // namespace dme
