#include "dme/gaussian_wz.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dme/random.hpp"

namespace dme {

MqParams gwz_params(double sigma_z, double distortion_target) {
  if (!(sigma_z > 0.0)) {
    throw std::invalid_argument("gwz_params: sigma_z must be positive");
  }
  const double variance = sigma_z * sigma_z;
  if (!(distortion_target > 0.0) ||
      distortion_target > variance / 308.0 * (1.0 + 1e-12)) {
    throw std::invalid_argument("gwz_params: need 0 < D <= sigma_z^2 / 308");
  }
  const double ratio = variance / distortion_target;
  const double delta_small = std::sqrt(distortion_target / 308.0);
  const unsigned log_k = static_cast<unsigned>(std::ceil(
      std::log2(2.0 + std::sqrt(24.0 * ratio * std::log(308.0 * ratio)))));
  if (log_k > 30) throw std::invalid_argument("gwz_params: D too small");
  const std::uint32_t k = std::uint32_t{1} << log_k;
  const double delta_prime =
      std::sqrt(6.0 * variance * std::log(sigma_z / delta_small));
  return MqParams{k, delta_prime, 2.0 * delta_prime / (k - 2)};
}

GwzResult gwz_run(const GwzConfig& config) {
  if (config.d == 0 || config.trials == 0) {
    throw std::invalid_argument("gwz_run: d and trials must be >= 1");
  }
  const MqParams params = gwz_params(config.sigma_z, config.distortion_target);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    RandomStream root(config.seed, 0, "gwz/trial/" + std::to_string(t));
    auto side_stream = root.substream("side");
    auto noise_stream = root.substream("noise");
    auto dither = root.substream("dither");
    double trial_sq = 0.0;
    for (std::size_t i = 0; i < config.d; ++i) {
      const double y = draw_gaussian(side_stream, 0.0, config.sigma_y);
      const double z = config.source == NoiseSource::gaussian
                           ? draw_gaussian(noise_stream, 0.0, config.sigma_z)
                           : draw_uniform(noise_stream, -config.sigma_z,
                                          config.sigma_z);
      const double x = y + z;
      const MqWord w = mq_encode(x, params, dither);
      const double xhat = mq_decode(w, y, params);
      trial_sq += (xhat - x) * (xhat - x);
    }
    const double per_dim = trial_sq / static_cast<double>(config.d);
    sum += per_dim;
    sum_sq += per_dim * per_dim;
  }

  GwzResult result;
  const double trials = static_cast<double>(config.trials);
  result.empirical_distortion_per_dim = sum / trials;
  const double var = std::max(
      0.0, sum_sq / trials - result.empirical_distortion_per_dim *
                                 result.empirical_distortion_per_dim);
  result.distortion_stderr = std::sqrt(var / trials);
  result.rate_per_dim = params.bit_width();
  result.shannon_rate = 0.5 * std::log2(config.sigma_z * config.sigma_z /
                                        config.distortion_target);
  result.excess_rate = result.rate_per_dim - result.shannon_rate;
  return result;
}

}  // namespace dme
