#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dme {

/// Deterministic public-randomness source shared by an encoder/decoder pair.
///
/// A stream is keyed by (master_seed, client_id, domain_tag) and produces a
/// counter-mode SplitMix64 sequence: draw i is a pure function of the key and
/// the draw index, so two streams constructed with identical parameters
/// replay identical sequences. Encoder and decoder never exchange stream
/// state; each side rebuilds the streams it needs from the shared seed.
///
/// Substreams derived with substream() are keyed off the *initial* key, not
/// the current counter, so the derivation order never matters. Each
/// quantizer draws its shared objects from fixed purpose tags ("signs",
/// "subset", "csunif") and encoder-private dither from "dither".
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t client_id,
               std::string_view domain_tag);

  /// Next raw 64-bit draw; advances the stream.
  std::uint64_t next_u64();

  /// Uniform double in [0, 1); advances the stream.
  double next_unit();

  /// Uniform integer in [0, n); advances the stream. n must be positive.
  std::uint64_t next_below(std::uint64_t n);

  /// Child stream for a distinct draw purpose. Independent of the parent's
  /// current position; deterministic given (parent key, purpose).
  RandomStream substream(std::string_view purpose) const;

  std::uint64_t key() const { return key_; }
  const std::string& domain_tag() const { return tag_; }

 private:
  RandomStream(std::uint64_t key, std::string tag);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::string tag_;
};

/// Length-d vector over {-1, +1}; the diagonal of the rotation matrix.
using SignVector = std::vector<std::int8_t>;

/// Strictly increasing coordinate indices in [0, d).
using IndexSubset = std::vector<std::uint32_t>;

/// d i.i.d. uniform signs.
SignVector draw_signs(RandomStream& stream, std::size_t d);

/// Uniformly random m-subset of [0, d) via partial Fisher-Yates, sorted
/// ascending. Requires 1 <= m <= d.
IndexSubset draw_subset(RandomStream& stream, std::size_t d, std::size_t m);

/// One uniform draw in [lo, hi). Requires lo < hi.
double draw_uniform(RandomStream& stream, double lo, double hi);

/// One N(mean, stddev^2) draw via Box-Muller; consumes two uniforms.
double draw_gaussian(RandomStream& stream, double mean, double stddev);

}  // namespace dme
