#include "dme/unknown_delta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dme/bitstream.hpp"

namespace dme {
namespace {

constexpr double kNormTol = 1e-9;

double l2_norm(const Vector& v) {
  double s = 0.0;
  for (const double e : v) s += e * e;
  return std::sqrt(s);
}

void require_unit_ball(const Vector& v, const char* where) {
  if (l2_norm(v) > 1.0 + kNormTol) {
    throw std::invalid_argument(std::string(where) +
                                ": input outside the unit ball");
  }
}

// Smallest scale containing |value|; the grid covers the unit ball so the
// scan cannot fall off the end for admissible inputs.
std::size_t scale_index(double value, const RdaqLevels& levels) {
  const double mag = std::abs(value);
  for (std::size_t j = 0; j < levels.h; ++j) {
    if (mag <= levels.scale_bound[j]) return j;
  }
  if (mag <= levels.scale_bound[levels.h - 1] * (1.0 + kNormTol)) {
    return levels.h - 1;
  }
  throw std::logic_error("rdaq: coordinate outside the final scale");
}

// Shared uniforms at scale j live in [-M_j, M_j].
double scaled_uniform(double unit, double bound) {
  return bound * (2.0 * unit - 1.0);
}

unsigned count_bits(std::size_t repetitions) {
  // Counts range over 0..N, hence ceil(log2(N+1)) bits.
  return std::bit_width(static_cast<std::uint64_t>(repetitions));
}

}  // namespace

int iterated_log_star(double a) {
  int j = 0;
  while (a >= 1.0) {
    a = std::log(a);
    ++j;
  }
  return j;
}

RdaqLevels rdaq_levels(std::size_t d) {
  if (d < 1) throw std::invalid_argument("rdaq_levels: d must be >= 1");
  RdaqLevels levels;
  levels.d = d;
  const int log_star = iterated_log_star(static_cast<double>(d) / 6.0);
  const unsigned log_h =
      static_cast<unsigned>(std::ceil(std::log2(1.0 + log_star)));
  levels.h = std::size_t{1} << log_h;
  levels.scale_bound.resize(levels.h);
  double tower = 1.0;  // e^{*0}
  for (std::size_t j = 0; j < levels.h; ++j) {
    if (j > 0) tower = std::exp(tower);
    levels.scale_bound[j] = std::sqrt(6.0 * tower / static_cast<double>(d));
    if (!std::isfinite(levels.scale_bound[j])) {
      throw std::invalid_argument("rdaq_levels: scale grid overflows for this d");
    }
  }
  if (levels.scale_bound[levels.h - 1] < 1.0) {
    throw std::logic_error("rdaq_levels: final scale does not cover the ball");
  }
  return levels;
}

std::vector<std::uint8_t> daq_encode(const Vector& x, RandomStream& root) {
  require_unit_ball(x, "daq_encode");
  for (const double v : x) {
    if (std::abs(v) > 1.0 + kNormTol) {
      throw std::invalid_argument("daq_encode: coordinate outside [-1, 1]");
    }
  }
  auto uniforms = root.substream("csunif");
  std::vector<std::uint8_t> bits(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    bits[i] = scaled_uniform(uniforms.next_unit(), 1.0) <= x[i] ? 1 : 0;
  }
  return bits;
}

Vector daq_decode(const std::vector<std::uint8_t>& bits, const Vector& y,
                  RandomStream& root) {
  if (bits.size() != y.size()) {
    throw std::invalid_argument("daq_decode: length mismatch");
  }
  for (const std::uint8_t b : bits) {
    if (b > 1) throw std::invalid_argument("daq_decode: malformed bit");
  }
  require_unit_ball(y, "daq_decode");
  auto uniforms = root.substream("csunif");
  Vector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int ybit = scaled_uniform(uniforms.next_unit(), 1.0) <= y[i] ? 1 : 0;
    out[i] = 2.0 * (static_cast<int>(bits[i]) - ybit) + y[i];
  }
  return out;
}

RdaqMessage rdaq_encode(const Vector& x, const RdaqLevels& levels,
                        RandomStream& root) {
  return srdaq_encode(x, levels, levels.d, root);
}

Vector rdaq_decode(const RdaqMessage& msg, const Vector& y,
                   const RdaqLevels& levels, RandomStream& root) {
  return srdaq_decode(msg, y, levels, levels.d, root);
}

RdaqMessage srdaq_encode(const Vector& x, const RdaqLevels& levels,
                         std::size_t sampled, RandomStream& root) {
  const std::size_t d = levels.d;
  if (x.size() != d) throw std::invalid_argument("srdaq_encode: dimension mismatch");
  if (sampled < 1 || sampled > d) {
    throw std::invalid_argument("srdaq_encode: sampled count out of range");
  }
  require_unit_ball(x, "srdaq_encode");

  auto signs_stream = root.substream("signs");
  const SignVector signs = draw_signs(signs_stream, d);
  IndexSubset subset;
  if (sampled < d) {
    auto subset_stream = root.substream("subset");
    subset = draw_subset(subset_stream, d, sampled);
  } else {
    subset.resize(d);
    for (std::size_t i = 0; i < d; ++i) subset[i] = static_cast<std::uint32_t>(i);
  }
  const Vector xr = rotate(x, signs);

  auto uniforms = root.substream("csunif");
  RdaqMessage msg;
  msg.bits.resize(sampled * levels.h);
  msg.scales.resize(sampled);
  for (std::size_t s = 0; s < sampled; ++s) {
    const double v = xr[subset[s]];
    msg.scales[s] = static_cast<std::uint8_t>(scale_index(v, levels));
    for (std::size_t j = 0; j < levels.h; ++j) {
      const double u = scaled_uniform(uniforms.next_unit(), levels.scale_bound[j]);
      msg.bits[s * levels.h + j] = u <= v ? 1 : 0;
    }
  }
  return msg;
}

Vector srdaq_decode(const RdaqMessage& msg, const Vector& y,
                    const RdaqLevels& levels, std::size_t sampled,
                    RandomStream& root) {
  const std::size_t d = levels.d;
  if (y.size() != d) throw std::invalid_argument("srdaq_decode: dimension mismatch");
  if (sampled < 1 || sampled > d) {
    throw std::invalid_argument("srdaq_decode: sampled count out of range");
  }
  if (msg.bits.size() != sampled * levels.h || msg.scales.size() != sampled) {
    throw std::invalid_argument("srdaq_decode: malformed message");
  }
  for (const std::uint8_t b : msg.bits) {
    if (b > 1) throw std::invalid_argument("srdaq_decode: malformed bit");
  }
  require_unit_ball(y, "srdaq_decode");

  auto signs_stream = root.substream("signs");
  const SignVector signs = draw_signs(signs_stream, d);
  IndexSubset subset;
  if (sampled < d) {
    auto subset_stream = root.substream("subset");
    subset = draw_subset(subset_stream, d, sampled);
  } else {
    subset.resize(d);
    for (std::size_t i = 0; i < d; ++i) subset[i] = static_cast<std::uint32_t>(i);
  }
  const Vector yr = rotate(y, signs);

  auto uniforms = root.substream("csunif");
  const double inv_mu = static_cast<double>(d) / static_cast<double>(sampled);
  Vector xhat_r = yr;
  std::vector<double> row(levels.h);
  for (std::size_t s = 0; s < sampled; ++s) {
    const std::uint32_t i = subset[s];
    for (std::size_t j = 0; j < levels.h; ++j) {
      row[j] = scaled_uniform(uniforms.next_unit(), levels.scale_bound[j]);
    }
    const std::size_t z_enc = msg.scales[s];
    if (z_enc >= levels.h) {
      throw std::invalid_argument("srdaq_decode: scale index out of range");
    }
    const std::size_t z_star = std::max(z_enc, scale_index(yr[i], levels));
    const int xbit = msg.bits[s * levels.h + z_star];
    const int ybit = row[z_star] <= yr[i] ? 1 : 0;
    xhat_r[i] += inv_mu * 2.0 * levels.scale_bound[z_star] * (xbit - ybit);
  }
  return rotate_inverse(xhat_r, signs);
}

BrdaqMessage brdaq_encode(const Vector& x, const RdaqLevels& levels,
                          std::size_t repetitions, RandomStream& root) {
  const std::size_t d = levels.d;
  if (x.size() != d) throw std::invalid_argument("brdaq_encode: dimension mismatch");
  if (repetitions < 1 || !is_power_of_two(repetitions)) {
    throw std::invalid_argument("brdaq_encode: repetitions must be a power of 2");
  }
  require_unit_ball(x, "brdaq_encode");

  auto signs_stream = root.substream("signs");
  const SignVector signs = draw_signs(signs_stream, d);
  const Vector xr = rotate(x, signs);

  auto uniforms = root.substream("csunif");
  BrdaqMessage msg;
  msg.counts.assign(d * levels.h, 0);
  msg.scales.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    msg.scales[i] = static_cast<std::uint8_t>(scale_index(xr[i], levels));
    for (std::size_t j = 0; j < levels.h; ++j) {
      std::uint32_t ones = 0;
      for (std::size_t t = 0; t < repetitions; ++t) {
        const double u =
            scaled_uniform(uniforms.next_unit(), levels.scale_bound[j]);
        if (u <= xr[i]) ++ones;
      }
      msg.counts[i * levels.h + j] = ones;
    }
  }
  return msg;
}

Vector brdaq_decode(const BrdaqMessage& msg, const Vector& y,
                    const RdaqLevels& levels, std::size_t repetitions,
                    RandomStream& root) {
  const std::size_t d = levels.d;
  if (y.size() != d) throw std::invalid_argument("brdaq_decode: dimension mismatch");
  if (msg.counts.size() != d * levels.h || msg.scales.size() != d) {
    throw std::invalid_argument("brdaq_decode: malformed message");
  }
  for (const std::uint32_t c : msg.counts) {
    if (c > repetitions) {
      throw std::invalid_argument("brdaq_decode: count exceeds repetitions");
    }
  }
  require_unit_ball(y, "brdaq_decode");

  auto signs_stream = root.substream("signs");
  const SignVector signs = draw_signs(signs_stream, d);
  const Vector yr = rotate(y, signs);

  auto uniforms = root.substream("csunif");
  Vector xhat_r = yr;
  std::vector<double> scale_rows(levels.h * repetitions);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < levels.h; ++j) {
      for (std::size_t t = 0; t < repetitions; ++t) {
        scale_rows[j * repetitions + t] =
            scaled_uniform(uniforms.next_unit(), levels.scale_bound[j]);
      }
    }
    const std::size_t z_enc = msg.scales[i];
    if (z_enc >= levels.h) {
      throw std::invalid_argument("brdaq_decode: scale index out of range");
    }
    const std::size_t z_star = std::max(z_enc, scale_index(yr[i], levels));
    std::uint32_t y_ones = 0;
    for (std::size_t t = 0; t < repetitions; ++t) {
      if (scale_rows[z_star * repetitions + t] <= yr[i]) ++y_ones;
    }
    const double diff = static_cast<double>(msg.counts[i * levels.h + z_star]) -
                        static_cast<double>(y_ones);
    xhat_r[i] += 2.0 * levels.scale_bound[z_star] * diff /
                 static_cast<double>(repetitions);
  }
  return rotate_inverse(xhat_r, signs);
}

std::size_t UnknownParams::message_bits() const {
  if (regime == Precision::low) {
    return sampled * (levels.h + levels.scale_bits());
  }
  return d * (levels.h * count_bits(repetitions) + levels.scale_bits());
}

UnknownParams unknown_params(std::size_t d, std::size_t r, Precision regime) {
  if (!is_power_of_two(d)) {
    throw std::invalid_argument("unknown_params: d must be a power of 2");
  }
  UnknownParams params;
  params.d = d;
  params.r = r;
  params.levels = rdaq_levels(d);
  params.regime = regime;
  const std::size_t per_coord = params.levels.h + params.levels.scale_bits();
  if (regime == Precision::low) {
    if (r < 2 * per_coord) {
      throw std::invalid_argument("unknown_params: budget below 2(h + log h)");
    }
    if (r > d) throw std::invalid_argument("unknown_params: low regime needs r <= d");
    params.sampled = r / per_coord;
  } else {
    if (r % d != 0) {
      throw std::invalid_argument("unknown_params: boosted regime needs r = m*d");
    }
    const std::size_t m = r / d;
    if (m < per_coord) {
      throw std::invalid_argument("unknown_params: budget below h + log h per dim");
    }
    params.sampled = d;
    params.repetitions =
        std::size_t{1} << ((m - params.levels.scale_bits()) / params.levels.h);
  }
  return params;
}

std::vector<std::uint8_t> serialize(const RdaqMessage& msg,
                                    const RdaqLevels& levels) {
  BitWriter writer;
  for (const std::uint8_t b : msg.bits) writer.write(b, 1);
  for (const std::uint8_t z : msg.scales) writer.write(z, levels.scale_bits());
  return writer.take();
}

RdaqMessage deserialize_rdaq(std::span<const std::uint8_t> bytes,
                             const RdaqLevels& levels, std::size_t entries) {
  BitReader reader(bytes);
  RdaqMessage msg;
  msg.bits.resize(entries * levels.h);
  for (auto& b : msg.bits) b = static_cast<std::uint8_t>(reader.read(1));
  msg.scales.resize(entries);
  for (auto& z : msg.scales) {
    z = static_cast<std::uint8_t>(reader.read(levels.scale_bits()));
  }
  return msg;
}

std::vector<std::uint8_t> serialize(const BrdaqMessage& msg,
                                    const RdaqLevels& levels,
                                    std::size_t repetitions) {
  BitWriter writer;
  const unsigned width = count_bits(repetitions);
  for (const std::uint32_t c : msg.counts) writer.write(c, width);
  for (const std::uint8_t z : msg.scales) writer.write(z, levels.scale_bits());
  return writer.take();
}

BrdaqMessage deserialize_brdaq(std::span<const std::uint8_t> bytes,
                               const RdaqLevels& levels,
                               std::size_t repetitions, std::size_t entries) {
  BitReader reader(bytes);
  const unsigned width = count_bits(repetitions);
  BrdaqMessage msg;
  msg.counts.resize(entries * levels.h);
  for (auto& c : msg.counts) c = static_cast<std::uint32_t>(reader.read(width));
  msg.scales.resize(entries);
  for (auto& z : msg.scales) {
    z = static_cast<std::uint8_t>(reader.read(levels.scale_bits()));
  }
  return msg;
}

std::vector<std::uint8_t> serialize_daq(const std::vector<std::uint8_t>& bits) {
  BitWriter writer;
  for (const std::uint8_t b : bits) writer.write(b, 1);
  return writer.take();
}

std::vector<std::uint8_t> deserialize_daq(std::span<const std::uint8_t> bytes,
                                          std::size_t d) {
  BitReader reader(bytes);
  std::vector<std::uint8_t> bits(d);
  for (auto& b : bits) b = static_cast<std::uint8_t>(reader.read(1));
  return bits;
}

}  // namespace dme
