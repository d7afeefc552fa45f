#include <doctest.h>
#include <stdexcept>

#include <cmath>

#include "dme/bitstream.hpp"
#include "dme/modulo_quantizer.hpp"
#include "helpers.hpp"

using namespace dme;

TEST_CASE("parameter derivation") {
  const MqParams p1 = mq_params(4, 1.0);
  CHECK(p1.epsilon == doctest::Approx(1.0));
  CHECK(p1.k * p1.epsilon >= 2.0 * (p1.epsilon + p1.delta_prime) - 1e-12);

  const MqParams p2 = mq_params(6, 0.2);
  CHECK(p2.epsilon == doctest::Approx(0.1));

  CHECK_THROWS_AS(mq_params(2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(mq_params(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mq_params(4, -1.0), std::invalid_argument);
}

TEST_CASE("on-lattice encode is deterministic") {
  const MqParams params = mq_params(6, 1.0);  // eps = 0.5
  for (int t = 0; t < 16; ++t) {
    RandomStream dither(t, 0, "dither");
    CHECK(mq_encode(3 * params.epsilon, params, dither) == 3u);
  }
}

TEST_CASE("dither probabilities match the enumeration oracle") {
  const MqParams params{6, 1.0, 0.5};
  // x = 0.3: ztilde = 1 w.p. 0.6, = 0 w.p. 0.4.
  const auto outcomes = testing::mq_enumerate(0.3, params);
  CHECK(outcomes.word_low == 0u);
  CHECK(outcomes.word_high == 1u);
  CHECK(outcomes.prob_high == doctest::Approx(0.6));

  std::size_t highs = 0;
  const std::size_t trials = 100000;
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream dither(900 + t, 0, "dither");
    if (mq_encode(0.3, params, dither) == outcomes.word_high) ++highs;
  }
  CHECK(std::abs(double(highs) / trials - outcomes.prob_high) <= 0.006);

  // Negative input wraps to a nonnegative word.
  const auto negative = testing::mq_enumerate(-0.3, params);
  CHECK(negative.word_low == 5u);
  CHECK(negative.word_high == 0u);
}

TEST_CASE("decode picks the closest coset point") {
  const MqParams params{6, 1.0, 0.5};
  CHECK(mq_decode(1, 0.1, params) == doctest::Approx(0.5));
  CHECK(mq_decode(0, 0.1, params) == doctest::Approx(0.0));
  // Tie at the midpoint resolves to the smaller point: candidates for w=0
  // around y=1.5 are 0 and 3.
  CHECK(mq_decode(0, 1.5, params) == doctest::Approx(0.0));
}

TEST_CASE("round trip is exact on the lattice") {
  const MqParams params = mq_params(8, 1.0);
  for (int z = -5; z <= 5; ++z) {
    const double x = z * params.epsilon;
    RandomStream dither(z + 100, 0, "dither");
    const MqWord w = mq_encode(x, params, dither);
    CHECK(mq_decode(w, x, params) == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("two-outcome expectation is exact within the recovery range") {
  // Oracle-checked unbiasedness: enumerate both dither outcomes, decode each
  // against y, and verify the expectation recovers x to 1e-12.
  for (const std::uint32_t k : {4u, 8u, 16u}) {
    for (const double delta_prime : {0.05, 0.5, 2.0}) {
      const MqParams params = mq_params(k, delta_prime);
      for (int xi = -5; xi <= 5; ++xi) {
        const double x = 0.37 * xi * delta_prime;
        for (int yi = -2; yi <= 2; ++yi) {
          const double y = x + 0.49 * yi * delta_prime;
          const auto oc = testing::mq_enumerate(x, params);
          const double lo = mq_decode(oc.word_low, y, params);
          const double hi = mq_decode(oc.word_high, y, params);
          const double expectation =
              oc.prob_high * hi + (1.0 - oc.prob_high) * lo;
          CHECK(std::abs(expectation - x) <= 1e-12 * std::max(1.0, std::abs(x)));
          CHECK(std::abs(lo - x) <= params.epsilon + 1e-12);
          CHECK(std::abs(hi - x) <= params.epsilon + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("decoder output stays within k*eps of the side information") {
  RandomStream stream(404, 0, "boundedness");
  for (int t = 0; t < 2000; ++t) {
    const std::uint32_t k = 3 + stream.next_below(20);
    const MqParams params = mq_params(k, draw_uniform(stream, 0.01, 5.0));
    const double y = draw_uniform(stream, -100.0, 100.0);
    const MqWord w = static_cast<MqWord>(stream.next_below(k));
    CHECK(std::abs(mq_decode(w, y, params) - y) <= k * params.epsilon);
  }
}

TEST_CASE("words fit their wire width") {
  for (const std::uint32_t k : {3u, 4u, 6u, 8u, 16u, 512u}) {
    const MqParams params = mq_params(k, 1.0);
    CHECK(params.bit_width() == unsigned(std::ceil(std::log2(double(k)))));
    RandomStream stream(7, k, "dither");
    BitWriter writer;
    for (int t = 0; t < 50; ++t) {
      const MqWord w = mq_encode(draw_uniform(stream, -20.0, 20.0), params, stream);
      CHECK(w < k);
      writer.write(w, params.bit_width());
    }
    CHECK(writer.bit_count() == 50 * params.bit_width());
  }
}
