#include "dme/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dme {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t client_id,
                         std::string_view tag) {
  return mix64(master_seed ^ mix64(client_id + kGolden) ^ fnv1a(tag));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t client_id,
                           std::string_view domain_tag)
    : key_(derive_key(master_seed, client_id, domain_tag)),
      tag_(domain_tag) {}

RandomStream::RandomStream(std::uint64_t key, std::string tag)
    : key_(key), tag_(std::move(tag)) {}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RandomStream::next_unit() {
  // Top 53 bits give every representable multiple of 2^-53 in [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be positive");
  using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((u128(next_u64()) * u128(n)) >> 64);
}

RandomStream RandomStream::substream(std::string_view purpose) const {
  std::string child_tag = tag_;
  child_tag += '/';
  child_tag += purpose;
  return RandomStream(mix64(key_ ^ fnv1a(purpose)), std::move(child_tag));
}

SignVector draw_signs(RandomStream& stream, std::size_t d) {
  SignVector signs(d);
  for (std::size_t i = 0; i < d; ++i) {
    signs[i] = (stream.next_u64() >> 63) ? std::int8_t{1} : std::int8_t{-1};
  }
  return signs;
}

IndexSubset draw_subset(RandomStream& stream, std::size_t d, std::size_t m) {
  if (m == 0 || m > d) {
    throw std::invalid_argument("draw_subset: need 1 <= m <= d");
  }
  std::vector<std::uint32_t> perm(d);
  for (std::size_t i = 0; i < d; ++i) perm[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + stream.next_below(d - i);
    std::swap(perm[i], perm[j]);
  }
  IndexSubset subset(perm.begin(), perm.begin() + static_cast<long>(m));
  std::sort(subset.begin(), subset.end());
  return subset;
}

double draw_uniform(RandomStream& stream, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("draw_uniform: need lo < hi");
  return lo + (hi - lo) * stream.next_unit();
}

double draw_gaussian(RandomStream& stream, double mean, double stddev) {
  // Box-Muller, cosine branch. 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - stream.next_unit();
  const double u2 = stream.next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dme
