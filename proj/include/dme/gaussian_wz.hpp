#pragma once

#include <cstdint>

#include "dme/modulo_quantizer.hpp"
#include "dme/types.hpp"

namespace dme {

/// Test source for the correlated-source experiment: X(i) = Y(i) + Z(i) with
/// Y Gaussian and Z either Gaussian with variance sigma_z^2 or uniform on
/// [-sigma_z, sigma_z] (bounded, hence subgaussian with variance factor
/// sigma_z^2).
enum class NoiseSource { gaussian, bounded };

struct GwzConfig {
  std::size_t d = 0;
  double sigma_y = 1.0;
  double sigma_z = 1.0;
  double distortion_target = 0.0;  // D, per coordinate
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  NoiseSource source = NoiseSource::gaussian;
};

struct GwzResult {
  double empirical_distortion_per_dim = 0.0;
  double distortion_stderr = 0.0;
  double rate_per_dim = 0.0;     // ceil(log2 k) bits per coordinate
  double shannon_rate = 0.0;     // (1/2) log2(sigma_z^2 / D)
  double excess_rate = 0.0;
};

/// Modulo-quantizer parameters achieving per-coordinate distortion D against
/// side information corrupted by subgaussian noise of variance factor
/// sigma_z^2. Requires D <= sigma_z^2 / 308.
MqParams gwz_params(double sigma_z, double distortion_target);

/// Samples (Y, Z), quantizes each coordinate of X = Y + Z with the modulo
/// quantizer, decodes against Y, and reports rate and distortion.
GwzResult gwz_run(const GwzConfig& config);

}  // namespace dme
