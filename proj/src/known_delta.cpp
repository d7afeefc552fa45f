#include "dme/known_delta.hpp"

#include <cmath>
#include <stdexcept>

#include "dme/bitstream.hpp"

namespace dme {
namespace {

double derive_delta_prime(double delta, double delta_small, std::size_t d) {
  return std::sqrt(6.0 * (delta * delta / static_cast<double>(d)) *
                   std::log(delta / delta_small));
}

Vector maybe_rotate(const Vector& v, const SignVector& signs, bool rotated) {
  return rotated ? rotate(v, signs) : v;
}

}  // namespace

WzKnownParams known_params(std::size_t n, std::size_t d, std::size_t r,
                           double delta, Precision regime) {
  if (!is_power_of_two(d)) {
    throw std::invalid_argument("known_params: d must be a power of 2");
  }
  if (delta < 0.0 || !std::isfinite(delta)) {
    throw std::invalid_argument("known_params: delta must be >= 0");
  }

  WzKnownParams params;
  params.d = d;
  params.n = n;
  params.r = r;
  params.delta = delta;
  params.regime = regime;

  if (regime == Precision::low) {
    if (n < 2) throw std::invalid_argument("known_params: low regime needs n >= 2");
    const unsigned log_k = static_cast<unsigned>(
        std::ceil(std::log2(2.0 + std::sqrt(12.0 * std::log(static_cast<double>(n))))));
    if (r < 2 * log_k) {
      throw std::invalid_argument("known_params: budget below 2*log k");
    }
    if (r > d) throw std::invalid_argument("known_params: low regime needs r <= d");
    params.sampled = r / log_k;
    const std::uint32_t k = std::uint32_t{1} << log_k;
    if (delta == 0.0) {
      params.mq = MqParams{k, 0.0, 0.0};
      return params;
    }
    params.delta_small = delta / std::sqrt(static_cast<double>(n));
    params.mq = mq_params(k, derive_delta_prime(delta, params.delta_small, d));
  } else {
    if (r % d != 0 || r / d < 2) {
      throw std::invalid_argument(
          "known_params: high regime needs r = m*d with integer m >= 2");
    }
    const std::size_t m = r / d;
    if (m > 30) throw std::invalid_argument("known_params: r/d too large");
    if (n < 1) throw std::invalid_argument("known_params: n must be >= 1");
    params.sampled = d;
    const std::uint32_t k = std::uint32_t{1} << m;
    if (delta == 0.0) {
      params.mq = MqParams{k, 0.0, 0.0};
      return params;
    }
    params.delta_small =
        delta / (std::sqrt(static_cast<double>(n)) * (std::pow(2.0, double(m)) - 2.0));
    params.mq = mq_params(k, derive_delta_prime(delta, params.delta_small, d));
  }
  return params;
}

WzKnownParams rmq_params(std::size_t d, double delta, double delta_small,
                         std::uint32_t k) {
  if (!is_power_of_two(d)) {
    throw std::invalid_argument("rmq_params: d must be a power of 2");
  }
  WzKnownParams params;
  params.d = d;
  params.n = 1;
  params.delta = delta;
  params.sampled = d;
  if (delta == 0.0) {
    params.mq = MqParams{k, 0.0, 0.0};
  } else {
    if (!(delta_small > 0.0) || !(delta_small < delta)) {
      throw std::invalid_argument("rmq_params: need 0 < delta_small < delta");
    }
    params.delta_small = delta_small;
    params.mq = mq_params(k, derive_delta_prime(delta, delta_small, d));
  }
  params.r = d * params.mq.bit_width();
  return params;
}

WzKnownParams baseline_params(std::size_t n, std::size_t d, std::size_t r,
                              double delta) {
  WzKnownParams params = known_params(n, d, r, delta, Precision::low);
  params.rotated = false;
  if (delta > 0.0) {
    // In the unrotated scheme every coordinate satisfies |x(i) - y(i)| <=
    // delta, so delta itself is the per-coordinate recovery range.
    params.delta_small = delta;
    params.mq = mq_params(params.mq.k, delta);
  }
  return params;
}

std::vector<MqWord> rmq_encode(const Vector& x, const WzKnownParams& params,
                               RandomStream& root) {
  if (x.size() != params.d) {
    throw std::invalid_argument("rmq_encode: dimension mismatch");
  }
  if (params.degenerate()) return std::vector<MqWord>(params.d, 0);
  auto signs_stream = root.substream("signs");
  const SignVector signs = draw_signs(signs_stream, params.d);
  const Vector xr = maybe_rotate(x, signs, params.rotated);
  auto dither = root.substream("dither");
  std::vector<MqWord> words(params.d);
  for (std::size_t i = 0; i < params.d; ++i) {
    words[i] = mq_encode(xr[i], params.mq, dither);
  }
  return words;
}

Vector rmq_decode(const std::vector<MqWord>& words, const Vector& y,
                  const WzKnownParams& params, RandomStream& root) {
  if (words.size() != params.d || y.size() != params.d) {
    throw std::invalid_argument("rmq_decode: dimension mismatch");
  }
  for (const MqWord w : words) {
    if (w >= params.mq.k) throw std::invalid_argument("rmq_decode: word out of range");
  }
  if (params.degenerate()) return y;
  auto signs_stream = root.substream("signs");
  const SignVector signs = draw_signs(signs_stream, params.d);
  const Vector yr = maybe_rotate(y, signs, params.rotated);
  Vector xhat_r(params.d);
  for (std::size_t i = 0; i < params.d; ++i) {
    xhat_r[i] = mq_decode(words[i], yr[i], params.mq);
  }
  return params.rotated ? rotate_inverse(xhat_r, signs) : xhat_r;
}

SwzMessage swz_encode(const Vector& x, const WzKnownParams& params,
                      RandomStream& root) {
  if (x.size() != params.d) {
    throw std::invalid_argument("swz_encode: dimension mismatch");
  }
  if (params.sampled == 0) {
    throw std::invalid_argument("swz_encode: no sampled coordinates");
  }
  if (params.degenerate()) {
    return SwzMessage{std::vector<MqWord>(params.sampled, 0)};
  }
  auto signs_stream = root.substream("signs");
  const SignVector signs = draw_signs(signs_stream, params.d);
  auto subset_stream = root.substream("subset");
  const IndexSubset subset = draw_subset(subset_stream, params.d, params.sampled);
  const Vector xr = maybe_rotate(x, signs, params.rotated);
  auto dither = root.substream("dither");
  SwzMessage msg;
  msg.words.reserve(params.sampled);
  for (const std::uint32_t i : subset) {
    msg.words.push_back(mq_encode(xr[i], params.mq, dither));
  }
  return msg;
}

Vector swz_decode(const SwzMessage& msg, const Vector& y,
                  const WzKnownParams& params, RandomStream& root) {
  if (msg.words.size() != params.sampled) {
    throw std::invalid_argument("swz_decode: message length mismatch");
  }
  if (y.size() != params.d) {
    throw std::invalid_argument("swz_decode: dimension mismatch");
  }
  for (const MqWord w : msg.words) {
    if (w >= params.mq.k) throw std::invalid_argument("swz_decode: word out of range");
  }
  if (params.degenerate()) return y;
  auto signs_stream = root.substream("signs");
  const SignVector signs = draw_signs(signs_stream, params.d);
  auto subset_stream = root.substream("subset");
  const IndexSubset subset = draw_subset(subset_stream, params.d, params.sampled);
  const Vector yr = maybe_rotate(y, signs, params.rotated);
  Vector xhat_r = yr;
  const double inv_mu = 1.0 / params.sampling_fraction();
  for (std::size_t j = 0; j < subset.size(); ++j) {
    const std::uint32_t i = subset[j];
    const double decoded = mq_decode(msg.words[j], yr[i], params.mq);
    xhat_r[i] = yr[i] + inv_mu * (decoded - yr[i]);
  }
  return params.rotated ? rotate_inverse(xhat_r, signs) : xhat_r;
}

std::vector<std::uint8_t> serialize(const SwzMessage& msg,
                                    const WzKnownParams& params) {
  BitWriter writer;
  for (const MqWord w : msg.words) writer.write(w, params.mq.bit_width());
  return writer.take();
}

SwzMessage deserialize_swz(std::span<const std::uint8_t> bytes,
                           const WzKnownParams& params) {
  BitReader reader(bytes);
  SwzMessage msg;
  msg.words.reserve(params.sampled);
  for (std::size_t i = 0; i < params.sampled; ++i) {
    msg.words.push_back(static_cast<MqWord>(reader.read(params.mq.bit_width())));
  }
  return msg;
}

}  // namespace dme
