#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dme/known_delta.hpp"
#include "dme/types.hpp"
#include "dme/unknown_delta.hpp"

namespace dme {

enum class Scheme {
  known_low,
  known_high,
  unknown_low,
  unknown_boosted,
  baseline_mq,
};

std::string to_string(Scheme scheme);
std::optional<Scheme> scheme_from_string(std::string_view name);

/// Encoder/decoder pair for one client, wrapping the scheme-specific
/// quantizer behind the wire format. Encode and decode take the client's
/// per-trial root stream; both sides derive the shared randomness from it.
class ClientCodec {
 public:
  ClientCodec(Scheme scheme, std::size_t n, std::size_t d, std::size_t r,
              double delta);

  std::vector<std::uint8_t> encode(const Vector& x, RandomStream& root) const;
  Vector decode(const std::vector<std::uint8_t>& message, const Vector& y,
                RandomStream& root) const;

  /// Full path through the wire format.
  Vector quantize(const Vector& x, const Vector& y, RandomStream& root) const;

  std::size_t message_bits() const;

  /// Budget the serialized message must respect: r, except for the boosted
  /// scheme where the count fields carry one extra bit per (coordinate,
  /// scale) and the ceiling is r + d*h.
  std::size_t allowed_bits() const;

  Scheme scheme() const { return scheme_; }
  std::size_t dimension() const { return d_; }

 private:
  Scheme scheme_;
  std::size_t d_ = 0;
  std::size_t r_ = 0;
  WzKnownParams known_;     // engaged for known_* and baseline
  UnknownParams unknown_;   // engaged for unknown_*
};

struct ProtocolConfig {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t r = 0;
  Scheme scheme = Scheme::known_low;
  std::vector<double> deltas;  // length n; distance budgets per client
  std::uint64_t master_seed = 0;
  std::size_t trials = 1;
};

struct ProtocolResult {
  Vector mean_estimate;  // averaged over trials, truncated to the input d
  Vector true_mean;
  std::vector<double> per_trial_sq_error;
  double mse = 0.0;
  std::vector<std::size_t> client_bits;
  std::size_t bits_allowed = 0;
  std::optional<double> theory_bound;
  /// Concatenation of every serialized client message in (trial, client)
  /// order; byte-identical across runs with the same config and seed.
  std::vector<std::uint8_t> transcript;
};

/// Runs the simultaneous message passing protocol: every client encodes with
/// its own substream, the server decodes against the side information and
/// averages. Inputs are zero-padded to a power of 2 internally; errors are
/// measured in the padded space.
ProtocolResult run_protocol(const std::vector<Vector>& inputs,
                            const std::vector<Vector>& side_info,
                            const ProtocolConfig& config);

/// Empirical worst-case-style quantizer statistics at distance delta.
struct ErrorStats {
  double alpha_hat = 0.0;  // max over tested pairs of mean squared error
  double beta_hat = 0.0;   // max over tested pairs of squared bias
  std::size_t trials = 0;  // repetitions per pair
  double delta = 0.0;
};

/// Mean squared error and squared bias of one quantizer on one fixed pair.
struct PairStats {
  double mse = 0.0;
  double sq_bias = 0.0;
  double mse_stderr = 0.0;
};

PairStats pair_stats(const ClientCodec& codec, const Vector& x,
                     const Vector& y, std::size_t trials, std::uint64_t seed,
                     std::string_view tag);

/// Approximates the sup over admissible pairs with randomized directions on
/// the sphere of radius delta plus axis-aligned adversarial pairs.
ErrorStats empirical_alpha_beta(Scheme scheme, std::size_t n, std::size_t d,
                                std::size_t r, double delta, std::size_t pairs,
                                std::size_t trials, std::uint64_t seed);

/// Right-hand side of the scheme's mean-squared-error guarantee, when one
/// applies (none for the baseline).
std::optional<double> theory_bound(Scheme scheme, std::size_t n, std::size_t d,
                                   std::size_t r,
                                   std::span<const double> deltas);

/// Independent-randomness decomposition: measured protocol MSE must not
/// exceed sum(alpha)/n^2 + sum(beta)/n + slack.
bool decomposition_check(std::span<const double> alpha, std::span<const double> beta,
                  double measured_mse, double slack);

/// Named generators for (input, side information) pairs at distance delta.
enum class PairKind { sphere_surface, gaussian_normalized, adversarial_axis };

std::optional<PairKind> pair_kind_from_string(std::string_view name);

/// When unit_ball is set both vectors are kept inside the unit ball
/// (requires delta <= 1).
std::pair<Vector, Vector> make_test_pair(PairKind kind, std::size_t d,
                                         double delta, bool unit_ball,
                                         RandomStream& stream);

/// Per-client pairs for a protocol run, one generator draw per client.
void make_client_vectors(PairKind kind, std::size_t n, std::size_t d,
                         std::span<const double> deltas, bool unit_ball,
                         std::uint64_t seed, std::vector<Vector>& inputs,
                         std::vector<Vector>& side_info);

/// True for schemes whose guarantees require inputs in the unit ball.
bool scheme_needs_unit_ball(Scheme scheme);

}  // namespace dme
