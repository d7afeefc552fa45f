#include <doctest.h>
#include <stdexcept>
#include <string>

#include <cmath>

#include "dme/known_delta.hpp"
#include "helpers.hpp"

using namespace dme;

namespace {

Vector random_vector(std::size_t d, double scale, RandomStream& stream) {
  Vector x(d);
  for (auto& v : x) v = draw_uniform(stream, -scale, scale);
  return x;
}

// (x, y) at exact distance delta, y drawn at random.
std::pair<Vector, Vector> pair_at_distance(std::size_t d, double delta,
                                           RandomStream& stream) {
  Vector y = random_vector(d, 1.0, stream);
  Vector u(d);
  for (auto& v : u) v = draw_gaussian(stream, 0.0, 1.0);
  const double norm = testing::l2_norm(u);
  Vector x = y;
  for (std::size_t i = 0; i < d; ++i) x[i] += delta * u[i] / norm;
  return {std::move(x), std::move(y)};
}

}  // namespace

TEST_CASE("low-precision parameter derivation") {
  const WzKnownParams p = known_params(16, 64, 32, 1.0, Precision::low);
  CHECK(p.mq.k == 8);
  CHECK(p.delta_small == doctest::Approx(0.25));
  CHECK(p.mq.delta_prime == doctest::Approx(0.3605).epsilon(1e-3));
  CHECK(p.mq.epsilon == doctest::Approx(0.1202).epsilon(1e-3));
  CHECK(p.sampled == 10);
  CHECK(p.message_bits() == 30);
  CHECK(p.message_bits() <= p.r);

  // log k = ceil(log2(2 + sqrt(12 ln 2))) = 3 at n = 2.
  const WzKnownParams small_n = known_params(2, 64, 32, 1.0, Precision::low);
  CHECK(small_n.mq.k == 8);
}

TEST_CASE("high-precision parameter derivation") {
  const WzKnownParams p = known_params(8, 8, 16, 1.0, Precision::high);
  CHECK(p.mq.k == 4);
  CHECK(p.sampled == 8);
  CHECK(p.message_bits() == 16);
  const double expected_small = 1.0 / (std::sqrt(8.0) * 2.0);
  CHECK(p.delta_small == doctest::Approx(expected_small));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(known_params(1, 64, 32, 1.0, Precision::low),
                  std::invalid_argument);
  CHECK_THROWS_AS(known_params(16, 64, 4, 1.0, Precision::low),
                  std::invalid_argument);  // below 2 log k
  CHECK_THROWS_AS(known_params(16, 64, 128, 1.0, Precision::low),
                  std::invalid_argument);  // r > d
  CHECK_THROWS_AS(known_params(8, 8, 12, 1.0, Precision::high),
                  std::invalid_argument);  // r not a multiple of d
  CHECK_THROWS_AS(known_params(16, 64, 32, -1.0, Precision::low),
                  std::invalid_argument);
  CHECK_THROWS_AS(rmq_params(64, 1.0, 1.5, 8), std::invalid_argument);
  CHECK_THROWS_AS(rmq_params(64, 1.0, 0.0, 8), std::invalid_argument);
}

TEST_CASE("rmq words match a manual rotate-plus-quantize path") {
  // Replays the substreams by hand: rotate with the same signs, reproduce
  // the dither decision from the enumeration oracle.
  const WzKnownParams params = rmq_params(8, 1.0, 0.1, 8);
  RandomStream root(99, 3, "trial/0");
  RandomStream replay(99, 3, "trial/0");

  RandomStream pair_stream(1, 0, "pairs");
  const auto [x, y] = pair_at_distance(8, 1.0, pair_stream);
  const std::vector<MqWord> words = rmq_encode(x, params, root);

  auto signs_stream = replay.substream("signs");
  const SignVector signs = draw_signs(signs_stream, 8);
  const Vector xr = rotate(x, signs);
  auto dither = replay.substream("dither");
  REQUIRE(words.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto oc = testing::mq_enumerate(xr[i], params.mq);
    const double u = dither.next_unit();
    const MqWord expected =
        u < oc.prob_high ? oc.word_high : oc.word_low;
    CHECK(words[i] == expected);
  }
}

TEST_CASE("rmq replay is deterministic") {
  const WzKnownParams params = rmq_params(16, 0.5, 0.05, 8);
  RandomStream pair_stream(2, 0, "pairs");
  const auto [x, y] = pair_at_distance(16, 0.5, pair_stream);
  RandomStream r1(7, 0, "trial/3");
  RandomStream r2(7, 0, "trial/3");
  CHECK(rmq_encode(x, params, r1) == rmq_encode(x, params, r2));
}

TEST_CASE("rmq with x = y recovers x almost surely") {
  const std::size_t d = 32;
  const WzKnownParams params = rmq_params(d, 1.0, 0.1, 8);
  RandomStream pair_stream(3, 0, "pairs");
  const Vector x = random_vector(d, 2.0, pair_stream);
  for (int t = 0; t < 20; ++t) {
    RandomStream enc(50, 0, "trial/" + std::to_string(t));
    RandomStream dec(50, 0, "trial/" + std::to_string(t));
    const Vector out = rmq_decode(rmq_encode(x, params, enc), x, params, dec);
    // |x - y| = 0 <= delta_prime per coordinate, so rotated errors are
    // within epsilon each.
    CHECK(testing::sq_dist(out, x) <=
          d * params.mq.epsilon * params.mq.epsilon + 1e-12);
  }
}

TEST_CASE("rmq conditional expectation is exact inside the recovery range") {
  // |R(x-y)(i)| <= |x-y|_2 for every coordinate, so a pair much closer than
  // delta_prime keeps all coordinates in the exact-recovery range. There the
  // two dither outcomes can be enumerated, giving the conditional
  // expectation of the decoded vector in closed form: it must equal the
  // rotated input exactly, with no Monte Carlo involved.
  const std::size_t d = 16;
  const WzKnownParams params = rmq_params(d, 1.0, 0.1, 8);
  RandomStream pair_stream(77, 0, "pairs");
  const auto [x, y_far] = pair_at_distance(d, 0.05, pair_stream);
  REQUIRE(params.mq.delta_prime > 0.05);
  const Vector& y = y_far;

  RandomStream replay(81, 0, "trial/0");
  auto signs_stream = replay.substream("signs");
  const SignVector signs = draw_signs(signs_stream, d);
  const Vector xr = rotate(x, signs);
  const Vector yr = rotate(y, signs);
  for (std::size_t i = 0; i < d; ++i) {
    const auto oc = testing::mq_enumerate(xr[i], params.mq);
    const double lo = mq_decode(oc.word_low, yr[i], params.mq);
    const double hi = mq_decode(oc.word_high, yr[i], params.mq);
    const double expectation = oc.prob_high * hi + (1.0 - oc.prob_high) * lo;
    CHECK(std::abs(expectation - xr[i]) <= 1e-12);
    CHECK(std::abs(lo - xr[i]) <= params.mq.epsilon);
    CHECK(std::abs(hi - xr[i]) <= params.mq.epsilon);
  }
}

TEST_CASE("rmq empirical error respects the analytic bounds") {
  const std::size_t d = 128;
  const double delta = 1.0;
  const double delta_small = 0.1;
  const WzKnownParams params = rmq_params(d, delta, delta_small, 8);
  RandomStream pair_stream(4, 0, "pairs");
  const auto [x, y] = pair_at_distance(d, delta, pair_stream);

  const std::size_t trials = 2000;
  testing::RunningStats sq_errors;
  Vector mean_err(d, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream enc(42, 0, "trial/" + std::to_string(t));
    RandomStream dec(42, 0, "trial/" + std::to_string(t));
    const Vector out = rmq_decode(rmq_encode(x, params, enc), y, params, dec);
    sq_errors.add(testing::sq_dist(out, x));
    for (std::size_t i = 0; i < d; ++i) mean_err[i] += out[i] - x[i];
  }
  const double k_term = 24.0 * delta * delta / 36.0 * std::log(delta / delta_small);
  const double mse_bound = k_term + 154.0 * delta_small * delta_small;
  CHECK(sq_errors.mean() <= mse_bound + 3.0 * sq_errors.stderr_mean());

  double sq_bias = 0.0;
  for (const double e : mean_err) sq_bias += (e / trials) * (e / trials);
  const double bias_noise = sq_errors.mean() / double(trials);
  CHECK(sq_bias <= 154.0 * delta_small * delta_small + 4.0 * bias_noise);
}

TEST_CASE("subsampling with full cardinality matches rmq") {
  const WzKnownParams params = rmq_params(16, 1.0, 0.1, 8);
  RandomStream pair_stream(5, 0, "pairs");
  const auto [x, y] = pair_at_distance(16, 1.0, pair_stream);
  RandomStream r1(11, 0, "trial/0");
  RandomStream r2(11, 0, "trial/0");
  const SwzMessage msg = swz_encode(x, params, r1);
  CHECK(msg.words == rmq_encode(x, params, r2));

  RandomStream d1(11, 0, "trial/0");
  RandomStream d2(11, 0, "trial/0");
  const Vector via_swz = swz_decode(msg, y, params, d1);
  const Vector via_rmq = rmq_decode(msg.words, y, params, d2);
  for (std::size_t i = 0; i < via_swz.size(); ++i) {
    CHECK(via_swz[i] == doctest::Approx(via_rmq[i]).epsilon(1e-12));
  }
}

TEST_CASE("swz message length is exact") {
  const WzKnownParams params = known_params(16, 64, 32, 1.0, Precision::low);
  RandomStream pair_stream(6, 0, "pairs");
  const auto [x, y] = pair_at_distance(64, 1.0, pair_stream);
  RandomStream root(13, 0, "trial/0");
  const SwzMessage msg = swz_encode(x, params, root);
  REQUIRE(msg.words.size() == params.sampled);
  const auto bytes = serialize(msg, params);
  CHECK(params.message_bits() == 30);
  CHECK(bytes.size() == (params.message_bits() + 7) / 8);
  const SwzMessage back = deserialize_swz(bytes, params);
  CHECK(back.words == msg.words);
}

TEST_CASE("swz with exact side information only carries sampled noise") {
  const WzKnownParams full = known_params(16, 64, 32, 1.0, Precision::low);
  RandomStream pair_stream(8, 0, "pairs");
  const Vector x = random_vector(64, 1.0, pair_stream);
  RandomStream enc(21, 0, "trial/0");
  RandomStream dec(21, 0, "trial/0");
  const Vector out = swz_decode(swz_encode(x, full, enc), x, full, dec);
  const double inv_mu = double(full.d) / double(full.sampled);
  const double per_coord = full.mq.epsilon * inv_mu;
  CHECK(testing::sq_dist(out, x) <=
        double(full.sampled) * per_coord * per_coord + 1e-12);
}

TEST_CASE("swz empirical error respects the subsampling decomposition") {
  const std::size_t d = 64;
  const double delta = 1.0;
  const WzKnownParams rmq = rmq_params(d, delta, 0.1, 8);
  WzKnownParams swz = rmq;
  swz.sampled = 16;
  const double mu = swz.sampling_fraction();

  RandomStream pair_stream(9, 0, "pairs");
  const auto [x, y] = pair_at_distance(d, delta, pair_stream);

  testing::RunningStats rmq_err;
  testing::RunningStats swz_err;
  const std::size_t trials = 3000;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::string tag = "trial/" + std::to_string(t);
    RandomStream e1(33, 0, tag), d1(33, 0, tag);
    rmq_err.add(testing::sq_dist(
        rmq_decode(rmq_encode(x, rmq, e1), y, rmq, d1), x));
    RandomStream e2(34, 0, tag), d2(34, 0, tag);
    swz_err.add(testing::sq_dist(
        swz_decode(swz_encode(x, swz, e2), y, swz, d2), x));
  }
  const double bound = rmq_err.mean() / mu + delta * delta / mu;
  CHECK(swz_err.mean() <= bound + 3.0 * swz_err.stderr_mean());
}

TEST_CASE("degenerate zero-distance client") {
  const WzKnownParams params = known_params(16, 64, 32, 0.0, Precision::low);
  CHECK(params.degenerate());
  RandomStream pair_stream(10, 0, "pairs");
  const Vector y = random_vector(64, 1.0, pair_stream);
  RandomStream enc(1, 0, "trial/0");
  RandomStream dec(1, 0, "trial/0");
  const SwzMessage msg = swz_encode(y, params, enc);
  for (const MqWord w : msg.words) CHECK(w == 0);
  CHECK(swz_decode(msg, y, params, dec) == y);
}

TEST_CASE("encoder and decoder derive identical shared randomness") {
  RandomStream enc_root(5150, 12, "trial/4");
  RandomStream dec_root(5150, 12, "trial/4");
  auto enc_signs = enc_root.substream("signs");
  auto dec_signs = dec_root.substream("signs");
  CHECK(draw_signs(enc_signs, 64) == draw_signs(dec_signs, 64));
  auto enc_subset = enc_root.substream("subset");
  auto dec_subset = dec_root.substream("subset");
  CHECK(draw_subset(enc_subset, 64, 10) == draw_subset(dec_subset, 64, 10));
  auto enc_unif = enc_root.substream("csunif");
  auto dec_unif = dec_root.substream("csunif");
  for (int i = 0; i < 256; ++i) {
    CHECK(enc_unif.next_unit() == dec_unif.next_unit());
  }
}

TEST_CASE("malformed messages are rejected") {
  const WzKnownParams params = known_params(16, 64, 32, 1.0, Precision::low);
  RandomStream pair_stream(11, 0, "pairs");
  const auto [x, y] = pair_at_distance(64, 1.0, pair_stream);
  RandomStream enc(2, 0, "trial/0");
  SwzMessage msg = swz_encode(x, params, enc);

  SwzMessage short_msg = msg;
  short_msg.words.pop_back();
  RandomStream d1(2, 0, "trial/0");
  CHECK_THROWS_AS(swz_decode(short_msg, y, params, d1), std::invalid_argument);

  SwzMessage bad_word = msg;
  bad_word.words[0] = params.mq.k;
  RandomStream d2(2, 0, "trial/0");
  CHECK_THROWS_AS(swz_decode(bad_word, y, params, d2), std::invalid_argument);

  const WzKnownParams full = rmq_params(64, 1.0, 0.1, 8);
  RandomStream d3(2, 0, "trial/0");
  CHECK_THROWS_AS(rmq_decode(std::vector<MqWord>(32, 0), y, full, d3),
                  std::invalid_argument);
}

TEST_CASE("decoded rotated coordinates stay near the side information") {
  // Holds even when the pair violates the configured distance: the
  // per-coordinate decoder never leaves its coset window.
  const std::size_t d = 32;
  const WzKnownParams params = rmq_params(d, 0.2, 0.02, 8);
  RandomStream pair_stream(13, 0, "pairs");
  const auto [x, y] = pair_at_distance(d, 3.0, pair_stream);  // far outside
  for (int t = 0; t < 10; ++t) {
    const std::string tag = "trial/" + std::to_string(t);
    RandomStream enc(60, 0, tag), dec(60, 0, tag), replay(60, 0, tag);
    const Vector out = rmq_decode(rmq_encode(x, params, enc), y, params, dec);
    auto signs_stream = replay.substream("signs");
    const SignVector signs = draw_signs(signs_stream, d);
    const Vector out_r = rotate(out, signs);
    const Vector yr = rotate(y, signs);
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(std::abs(out_r[i] - yr[i]) <=
            params.mq.k * params.mq.epsilon + 1e-9);
    }
  }
}

TEST_CASE("baseline scheme is unbiased and within epsilon per coordinate") {
  const std::size_t d = 32;
  const double delta = 0.8;
  const WzKnownParams params = baseline_params(16, d, 32, delta);
  CHECK(params.mq.delta_prime == doctest::Approx(delta));
  CHECK_FALSE(params.rotated);

  RandomStream pair_stream(12, 0, "pairs");
  const auto [x, y] = pair_at_distance(d, delta, pair_stream);
  const std::size_t trials = 4000;
  Vector mean_out(d, 0.0);
  testing::RunningStats sq_errors;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::string tag = "trial/" + std::to_string(t);
    RandomStream enc(35, 0, tag), dec(35, 0, tag);
    const Vector out = swz_decode(swz_encode(x, params, enc), y, params, dec);
    for (std::size_t i = 0; i < d; ++i) mean_out[i] += out[i];
    sq_errors.add(testing::sq_dist(out, x));
  }
  double sq_bias = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double e = mean_out[i] / trials - x[i];
    sq_bias += e * e;
  }
  CHECK(sq_bias <= 4.0 * sq_errors.mean() / double(trials));
}
