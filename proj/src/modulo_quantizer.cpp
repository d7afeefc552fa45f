#include "dme/modulo_quantizer.hpp"

#include <cmath>
#include <stdexcept>

namespace dme {
namespace {

// Relative tolerance for treating x/eps as an exact lattice index. Keeps the
// Bernoulli probability away from rounding-induced 0/1 pathologies.
constexpr double kLatticeTol = 1e-12;

}  // namespace

MqParams mq_params(std::uint32_t k, double delta_prime) {
  if (k < 3) throw std::invalid_argument("mq_params: k must be >= 3");
  if (!(delta_prime > 0.0)) {
    throw std::invalid_argument("mq_params: delta_prime must be positive");
  }
  return MqParams{k, delta_prime, 2.0 * delta_prime / (k - 2)};
}

MqWord mq_encode(double x, const MqParams& params, RandomStream& dither) {
  if (!std::isfinite(x)) throw std::invalid_argument("mq_encode: x not finite");
  const double t = x / params.epsilon;
  // One draw per call regardless of branch, so stream positions stay
  // data-independent.
  const double u = dither.next_unit();
  const double nearest = std::round(t);
  long long ztilde;
  if (std::abs(t - nearest) <= kLatticeTol * std::max(1.0, std::abs(t))) {
    ztilde = static_cast<long long>(nearest);
  } else {
    const long long zl = static_cast<long long>(std::floor(t));
    ztilde = (u < t - static_cast<double>(zl)) ? zl + 1 : zl;
  }
  const long long k = params.k;
  return static_cast<MqWord>(((ztilde % k) + k) % k);
}

double mq_decode(MqWord w, double y, const MqParams& params) {
  const double eps = params.epsilon;
  const double k = static_cast<double>(params.k);
  // Coset points are (z*k + w) * eps; the closest one to y has z near
  // (y/eps - w) / k. Check the rounding neighbors to cover the boundary.
  const double z0 = std::round((y / eps - static_cast<double>(w)) / k);
  double best = 0.0;
  double best_dist = 0.0;
  bool have = false;
  for (int offset = -1; offset <= 1; ++offset) {
    const double candidate = ((z0 + offset) * k + static_cast<double>(w)) * eps;
    const double dist = std::abs(candidate - y);
    // Equidistant candidates resolve to the smaller value.
    if (!have || dist < best_dist ||
        (dist == best_dist && candidate < best)) {
      best = candidate;
      best_dist = dist;
      have = true;
    }
  }
  return best;
}

}  // namespace dme
