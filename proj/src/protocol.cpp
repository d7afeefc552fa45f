#include "dme/protocol.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dme {
namespace {

constexpr double kDistanceTol = 1e-9;

double l2_norm(const Vector& v) {
  double s = 0.0;
  for (const double e : v) s += e * e;
  return std::sqrt(s);
}

double sq_distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

Vector unit_direction(std::size_t d, RandomStream& stream) {
  Vector u(d);
  double norm = 0.0;
  do {
    for (auto& e : u) e = draw_gaussian(stream, 0.0, 1.0);
    norm = l2_norm(u);
  } while (norm == 0.0);
  for (auto& e : u) e /= norm;
  return u;
}

}  // namespace

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::known_low: return "known_low";
    case Scheme::known_high: return "known_high";
    case Scheme::unknown_low: return "unknown_low";
    case Scheme::unknown_boosted: return "unknown_boosted";
    case Scheme::baseline_mq: return "baseline_mq";
  }
  return "unknown";
}

std::optional<Scheme> scheme_from_string(std::string_view name) {
  if (name == "known_low") return Scheme::known_low;
  if (name == "known_high") return Scheme::known_high;
  if (name == "unknown_low") return Scheme::unknown_low;
  if (name == "unknown_boosted") return Scheme::unknown_boosted;
  if (name == "baseline_mq") return Scheme::baseline_mq;
  return std::nullopt;
}

bool scheme_needs_unit_ball(Scheme scheme) {
  return scheme == Scheme::unknown_low || scheme == Scheme::unknown_boosted;
}

ClientCodec::ClientCodec(Scheme scheme, std::size_t n, std::size_t d,
                         std::size_t r, double delta)
    : scheme_(scheme), d_(d), r_(r) {
  switch (scheme) {
    case Scheme::known_low:
      known_ = known_params(n, d, r, delta, Precision::low);
      break;
    case Scheme::known_high:
      known_ = known_params(n, d, r, delta, Precision::high);
      break;
    case Scheme::baseline_mq:
      known_ = baseline_params(n, d, r, delta);
      break;
    case Scheme::unknown_low:
      unknown_ = unknown_params(d, r, Precision::low);
      break;
    case Scheme::unknown_boosted:
      unknown_ = unknown_params(d, r, Precision::high);
      break;
  }
  if (message_bits() > allowed_bits()) {
    throw std::logic_error("ClientCodec: message exceeds the bit budget");
  }
}

std::size_t ClientCodec::message_bits() const {
  switch (scheme_) {
    case Scheme::known_low:
    case Scheme::known_high:
    case Scheme::baseline_mq:
      return known_.message_bits();
    default:
      return unknown_.message_bits();
  }
}

std::size_t ClientCodec::allowed_bits() const {
  if (scheme_ == Scheme::unknown_boosted) {
    // The counts need ceil(log2(N+1)) bits instead of log2(N): one extra bit
    // per (coordinate, scale) on top of the nominal budget.
    return r_ + d_ * unknown_.levels.h;
  }
  return r_;
}

std::vector<std::uint8_t> ClientCodec::encode(const Vector& x,
                                              RandomStream& root) const {
  switch (scheme_) {
    case Scheme::known_low:
    case Scheme::baseline_mq:
      return serialize(swz_encode(x, known_, root), known_);
    case Scheme::known_high:
      return serialize(SwzMessage{rmq_encode(x, known_, root)}, known_);
    case Scheme::unknown_low:
      return serialize(srdaq_encode(x, unknown_.levels, unknown_.sampled, root),
                       unknown_.levels);
    case Scheme::unknown_boosted:
      return serialize(brdaq_encode(x, unknown_.levels, unknown_.repetitions, root),
                       unknown_.levels, unknown_.repetitions);
  }
  throw std::logic_error("ClientCodec: unreachable");
}

Vector ClientCodec::decode(const std::vector<std::uint8_t>& message,
                           const Vector& y, RandomStream& root) const {
  switch (scheme_) {
    case Scheme::known_low:
    case Scheme::baseline_mq:
      return swz_decode(deserialize_swz(message, known_), y, known_, root);
    case Scheme::known_high:
      return rmq_decode(deserialize_swz(message, known_).words, y, known_, root);
    case Scheme::unknown_low:
      return srdaq_decode(
          deserialize_rdaq(message, unknown_.levels, unknown_.sampled), y,
          unknown_.levels, unknown_.sampled, root);
    case Scheme::unknown_boosted:
      return brdaq_decode(
          deserialize_brdaq(message, unknown_.levels, unknown_.repetitions,
                            unknown_.d),
          y, unknown_.levels, unknown_.repetitions, root);
  }
  throw std::logic_error("ClientCodec: unreachable");
}

Vector ClientCodec::quantize(const Vector& x, const Vector& y,
                             RandomStream& root) const {
  return decode(encode(x, root), y, root);
}

ProtocolResult run_protocol(const std::vector<Vector>& inputs,
                            const std::vector<Vector>& side_info,
                            const ProtocolConfig& config) {
  const std::size_t n = config.n;
  if (n == 0) throw std::invalid_argument("run_protocol: n must be >= 1");
  if (inputs.size() != n || side_info.size() != n) {
    throw std::invalid_argument("run_protocol: need n inputs and n side infos");
  }
  if (config.deltas.size() != n) {
    throw std::invalid_argument("run_protocol: need one delta per client");
  }
  if (config.trials == 0) {
    throw std::invalid_argument("run_protocol: trials must be >= 1");
  }

  const std::size_t padded_d = next_power_of_two(config.d);
  std::vector<Vector> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (inputs[i].size() != config.d || side_info[i].size() != config.d) {
      throw std::invalid_argument("run_protocol: vector dimension mismatch");
    }
    xs[i] = pad_to_power_of_two(inputs[i]);
    ys[i] = pad_to_power_of_two(side_info[i]);
    if (scheme_needs_unit_ball(config.scheme) &&
        (l2_norm(xs[i]) > 1.0 + kDistanceTol ||
         l2_norm(ys[i]) > 1.0 + kDistanceTol)) {
      throw std::invalid_argument("run_protocol: inputs outside the unit ball");
    }
    const double dist = std::sqrt(sq_distance(xs[i], ys[i]));
    if (dist > config.deltas[i] + kDistanceTol) {
      throw std::invalid_argument(
          "run_protocol: client pair violates its distance budget");
    }
  }

  std::vector<ClientCodec> codecs;
  codecs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    codecs.emplace_back(config.scheme, n, padded_d, config.r, config.deltas[i]);
  }

  Vector true_mean(padded_d, 0.0);
  for (const auto& x : xs) {
    for (std::size_t j = 0; j < padded_d; ++j) true_mean[j] += x[j] / double(n);
  }

  ProtocolResult result;
  result.bits_allowed = codecs.front().allowed_bits();
  result.client_bits.resize(n);
  result.per_trial_sq_error.reserve(config.trials);
  Vector mean_estimate(padded_d, 0.0);

  for (std::size_t t = 0; t < config.trials; ++t) {
    const std::string trial_tag = "trial/" + std::to_string(t);
    Vector estimate(padded_d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      RandomStream enc_root(config.master_seed, i, trial_tag);
      RandomStream dec_root(config.master_seed, i, trial_tag);
      const std::vector<std::uint8_t> message = codecs[i].encode(xs[i], enc_root);
      result.client_bits[i] = codecs[i].message_bits();
      if (result.client_bits[i] > codecs[i].allowed_bits()) {
        throw std::logic_error("run_protocol: bit budget violated");
      }
      result.transcript.insert(result.transcript.end(), message.begin(),
                               message.end());
      const Vector xhat = codecs[i].decode(message, ys[i], dec_root);
      for (std::size_t j = 0; j < padded_d; ++j) estimate[j] += xhat[j] / double(n);
    }
    result.per_trial_sq_error.push_back(sq_distance(estimate, true_mean));
    for (std::size_t j = 0; j < padded_d; ++j) mean_estimate[j] += estimate[j];
  }

  for (auto& e : mean_estimate) e /= static_cast<double>(config.trials);
  result.mse = std::accumulate(result.per_trial_sq_error.begin(),
                               result.per_trial_sq_error.end(), 0.0) /
               static_cast<double>(config.trials);
  mean_estimate.resize(config.d);
  true_mean.resize(config.d);
  result.mean_estimate = std::move(mean_estimate);
  result.true_mean = std::move(true_mean);
  result.theory_bound =
      theory_bound(config.scheme, n, padded_d, config.r, config.deltas);
  return result;
}

PairStats pair_stats(const ClientCodec& codec, const Vector& x,
                     const Vector& y, std::size_t trials, std::uint64_t seed,
                     std::string_view tag) {
  if (trials == 0) throw std::invalid_argument("pair_stats: trials must be >= 1");
  const std::size_t d = codec.dimension();
  Vector mean_err(d, 0.0);
  double sum_sq = 0.0;
  double sum_sq_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream root(seed, 0, std::string(tag) + "/t" + std::to_string(t));
    const Vector q = codec.quantize(x, y, root);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double err = q[j] - x[j];
      mean_err[j] += err;
      sq += err * err;
    }
    sum_sq += sq;
    sum_sq_sq += sq * sq;
  }
  PairStats stats;
  stats.mse = sum_sq / static_cast<double>(trials);
  const double var =
      std::max(0.0, sum_sq_sq / double(trials) - stats.mse * stats.mse);
  stats.mse_stderr = std::sqrt(var / static_cast<double>(trials));
  double sq_bias = 0.0;
  for (const double e : mean_err) {
    const double m = e / static_cast<double>(trials);
    sq_bias += m * m;
  }
  stats.sq_bias = sq_bias;
  return stats;
}

ErrorStats empirical_alpha_beta(Scheme scheme, std::size_t n, std::size_t d,
                                std::size_t r, double delta, std::size_t pairs,
                                std::size_t trials, std::uint64_t seed) {
  if (pairs == 0) throw std::invalid_argument("empirical_alpha_beta: pairs >= 1");
  const std::size_t padded_d = next_power_of_two(d);
  const ClientCodec codec(scheme, n, padded_d, r, delta);
  const bool unit_ball = scheme_needs_unit_ball(scheme);
  ErrorStats stats;
  stats.trials = trials;
  stats.delta = delta;
  RandomStream pair_stream(seed, 0, "alpha_beta_pairs");
  for (std::size_t p = 0; p < pairs; ++p) {
    // Alternate random sphere directions with axis-aligned mass.
    const PairKind kind =
        (p % 2 == 0) ? PairKind::sphere_surface : PairKind::adversarial_axis;
    const auto [x, y] = make_test_pair(kind, padded_d, delta, unit_ball, pair_stream);
    const PairStats ps =
        pair_stats(codec, x, y, trials, seed, "ab/p" + std::to_string(p));
    stats.alpha_hat = std::max(stats.alpha_hat, ps.mse);
    stats.beta_hat = std::max(stats.beta_hat, ps.sq_bias);
  }
  return stats;
}

std::optional<double> theory_bound(Scheme scheme, std::size_t n, std::size_t d,
                                   std::size_t r,
                                   std::span<const double> deltas) {
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double rr = static_cast<double>(r);
  double sum_sq = 0.0;
  double sum = 0.0;
  for (const double delta : deltas) {
    sum_sq += delta * delta;
    sum += delta;
  }
  switch (scheme) {
    case Scheme::known_low: {
      const double log_k = std::ceil(std::log2(2.0 + std::sqrt(12.0 * std::log(nn))));
      return (79.0 * log_k + 26.0) * (sum_sq / nn) * dd / (nn * rr);
    }
    case Scheme::known_high: {
      const double m = rr / dd;
      const double spread = std::pow(2.0, m) - 2.0;
      return (12.0 * std::log(nn) + 24.0 * m + 154.0 / nn + 166.0) *
             (sum_sq / nn) / (nn * spread * spread);
    }
    case Scheme::unknown_low: {
      const double tail = 1.0 + iterated_log_star(dd / 6.0);
      return 128.0 * std::sqrt(3.0) * tail * (sum / nn) * dd / (nn * rr);
    }
    case Scheme::unknown_boosted: {
      const double tail = 2.0 + 2.0 * iterated_log_star(dd / 6.0);
      return 64.0 * std::sqrt(3.0) * (sum / nn) /
             (nn * std::pow(2.0, rr / (dd * tail)));
    }
    case Scheme::baseline_mq:
      return std::nullopt;
  }
  return std::nullopt;
}

bool decomposition_check(std::span<const double> alpha, std::span<const double> beta,
                  double measured_mse, double slack) {
  if (alpha.size() != beta.size() || alpha.empty()) {
    throw std::invalid_argument("decomposition_check: need matched per-client stats");
  }
  const double n = static_cast<double>(alpha.size());
  double bound = 0.0;
  for (const double a : alpha) bound += a / (n * n);
  for (const double b : beta) bound += b / n;
  return measured_mse <= bound + slack;
}

std::optional<PairKind> pair_kind_from_string(std::string_view name) {
  if (name == "sphere-surface") return PairKind::sphere_surface;
  if (name == "gaussian-normalized") return PairKind::gaussian_normalized;
  if (name == "adversarial-axis") return PairKind::adversarial_axis;
  return std::nullopt;
}

std::pair<Vector, Vector> make_test_pair(PairKind kind, std::size_t d,
                                         double delta, bool unit_ball,
                                         RandomStream& stream) {
  if (delta < 0.0) throw std::invalid_argument("make_test_pair: delta < 0");
  if (unit_ball && delta > 1.0) {
    throw std::invalid_argument("make_test_pair: unit ball requires delta <= 1");
  }
  const double radius = unit_ball ? 1.0 - delta : 1.0;
  Vector y;
  switch (kind) {
    case PairKind::sphere_surface: {
      y = unit_direction(d, stream);
      for (auto& e : y) e *= radius;
      break;
    }
    case PairKind::gaussian_normalized: {
      y.resize(d);
      for (auto& e : y) {
        e = draw_gaussian(stream, 0.0, radius / std::sqrt(double(d)));
      }
      const double norm = l2_norm(y);
      if (norm > radius && norm > 0.0) {
        for (auto& e : y) e *= radius / norm;
      }
      break;
    }
    case PairKind::adversarial_axis: {
      y.assign(d, 0.0);
      y[stream.next_below(d)] = radius;
      break;
    }
  }
  Vector x = y;
  if (delta > 0.0) {
    if (kind == PairKind::adversarial_axis) {
      const std::size_t axis = stream.next_below(d);
      x[axis] += (stream.next_u64() >> 63 ? 1.0 : -1.0) * delta;
    } else {
      const Vector u = unit_direction(d, stream);
      for (std::size_t j = 0; j < d; ++j) x[j] += delta * u[j];
    }
  }
  return {std::move(x), std::move(y)};
}

void make_client_vectors(PairKind kind, std::size_t n, std::size_t d,
                         std::span<const double> deltas, bool unit_ball,
                         std::uint64_t seed, std::vector<Vector>& inputs,
                         std::vector<Vector>& side_info) {
  if (deltas.size() != n) {
    throw std::invalid_argument("make_client_vectors: need one delta per client");
  }
  inputs.clear();
  side_info.clear();
  inputs.reserve(n);
  side_info.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream stream(seed, i, "inputs");
    auto [x, y] = make_test_pair(kind, d, deltas[i], unit_ball, stream);
    inputs.push_back(std::move(x));
    side_info.push_back(std::move(y));
  }
}

}  // namespace dme
