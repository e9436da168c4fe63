#include <doctest.h>

#include <cmath>
#include <numbers>

#include "evplane/entire.hpp"
#include "support.hpp"

using evplane::BlockSpec;
using evplane::FrequencyBlock;
using evplane::Mat;
using evplane::PositivityVerdict;
using evplane::Rational;
using evplane::SpectralBlock;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force minimum over a dense uniform grid.
double dense_min(const SpectralBlock& s, const Mat& b, double lo, double hi, int points) {
  double best = INFINITY;
  for (int k = 0; k <= points; ++k) {
    const double t = lo + (hi - lo) * k / points;
    best = std::min(best, evplane::positivity_determinant(s, b, t));
  }
  return best;
}

}  // namespace

TEST_CASE("block spec validation") {
  CHECK_THROWS_AS(BlockSpec(3, 2, {FrequencyBlock{1.0, std::nullopt, {{0.0, 0.0}}}}), evplane::InvalidArgument);
  CHECK_THROWS_AS(BlockSpec(3, 2, {FrequencyBlock{1.0, std::nullopt, {}}}), evplane::InvalidArgument);
  CHECK_THROWS_AS(BlockSpec(3, 2, {FrequencyBlock{-1.0, std::nullopt, {{0.0, 1.0}}}}), evplane::InvalidArgument);
  CHECK_THROWS_AS(BlockSpec(3, 2, {FrequencyBlock{1.0, std::nullopt, {{0.0, 1.0}, {0.0, 1.0}}}}),
                  evplane::InvalidArgument);
  CHECK_THROWS_AS(BlockSpec(5, 4,
                            {FrequencyBlock{1.0, std::nullopt, {{0.0, 1.0}}},
                             FrequencyBlock{1.0, std::nullopt, {{0.0, 2.0}}}}),
                  evplane::InvalidArgument);
}

TEST_CASE("2x2 characteristic polynomial test") {
  CHECK(evplane::char_poly_positive_2x2(Mat{{0, 1}, {-1, 0}}));
  CHECK(evplane::char_poly_positive_2x2(Mat{{3, 0.5}, {-0.5, 3}}));
  CHECK_FALSE(evplane::char_poly_positive_2x2(Mat{{1, 0}, {0, 2}}));
  CHECK_FALSE(evplane::char_poly_positive_2x2(Mat{{1, 1}, {0, 1}}));
}

TEST_CASE("rotation pair: Lambda = I/2, B = J") {
  const evplane::EntirePair pair =
      evplane::build_odd_pair(BlockSpec(3, 2, {FrequencyBlock{0.5, Rational{1, 2}, {{0.0, 1.0}}}}));
  CHECK(pair.b == Mat{{0, 1}, {-1, 0}});
  CHECK(pair.spectral.lambdas() == std::vector<double>{0.5, 0.5});
  CHECK(evplane::common_period(pair.spectral) == doctest::Approx(4.0 * kPi).epsilon(1e-15));
  // det(cos I + J^T sin) = cos^2 + sin^2.
  for (double t = -5.0; t < 5.0; t += 0.3) {
    CHECK(evplane::positivity_determinant(pair.spectral, pair.b, t) == doctest::Approx(1.0).epsilon(1e-14));
  }
  const evplane::PositivityReport rep = evplane::positivity_scan(pair.spectral, pair.b);
  CHECK(rep.periodic);
  CHECK(rep.verdict == PositivityVerdict::entire_certified_on_interval);
  CHECK(rep.min_det == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("blocks are laid out in increasing lambda order") {
  const evplane::EntirePair pair = evplane::build_odd_pair(
      BlockSpec(5, 4,
                {FrequencyBlock{2.0, Rational{2, 1}, {{0.5, 1.0}}},
                 FrequencyBlock{1.0, Rational{1, 1}, {{-0.3, 2.0}}}}));
  CHECK(pair.spectral.lambdas() == std::vector<double>{1, 1, 2, 2});
  CHECK(pair.b(0, 0) == -0.3);
  CHECK(pair.b(2, 3) == 1.0);
  CHECK(pair.b(3, 2) == -1.0);
  CHECK(evplane::common_period(pair.spectral) == doctest::Approx(2.0 * kPi));
}

TEST_CASE("common period") {
  CHECK(evplane::common_period(SpectralBlock::from_rationals(3, 2, {{2, 3}, {4, 5}})) ==
        doctest::Approx(2.0 * kPi * 15.0 / 2.0));
  CHECK(evplane::common_period(SpectralBlock(3, 2, {})) == doctest::Approx(2.0 * kPi));
  CHECK_THROWS_AS(evplane::common_period(SpectralBlock(3, 2, {0.7})), evplane::InvalidArgument);
  const SpectralBlock s = SpectralBlock::from_rationals(3, 2, {{2, 3}, {4, 5}});
  const double period = evplane::common_period(s);
  CHECK(evplane::distance(s.cos_block(0.3 + period), s.cos_block(0.3)) < 1e-12);
}

TEST_CASE("random odd pairs are certified; scan minimum agrees with a dense grid") {
  support::Rng rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const evplane::EntirePair pair = support::random_entire_pair(rng, 6, 3);
    const evplane::PositivityReport rep = evplane::positivity_scan(pair.spectral, pair.b);
    CHECK(rep.periodic);
    CHECK(rep.verdict == PositivityVerdict::entire_certified_on_interval);
    CHECK(rep.min_det > 0.0);
    const double brute = dense_min(pair.spectral, pair.b, rep.scanned_interval.first,
                                   rep.scanned_interval.second, 200000);
    CHECK(rep.min_det <= brute + 1e-12);
    CHECK(rep.min_det >= brute - 1e-6 * (1.0 + std::abs(brute)));
  }
}

TEST_CASE("B = 0 fails with a located violation") {
  const SpectralBlock s = SpectralBlock::from_rationals(3, 2, {{1, 1}});
  const evplane::PositivityReport rep = evplane::positivity_scan(s, Mat(2, 2));
  CHECK(rep.verdict == PositivityVerdict::violation_found);
  CHECK(rep.min_det == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(rep.argmin_t - kPi) < 1e-4);
  CHECK(evplane::positivity_determinant(s, Mat(2, 2), rep.argmin_t) < 0.0);
}

TEST_CASE("interval scan is not periodic and tan blow-up time") {
  const SpectralBlock s(3, 2, {0.7});
  const evplane::PositivityReport rep = evplane::positivity_scan(s, Mat(2, 2), std::pair{0.0, 1.0});
  CHECK_FALSE(rep.periodic);
  CHECK(rep.verdict == PositivityVerdict::entire_certified_on_interval);
  CHECK(rep.min_det == doctest::Approx(std::cos(0.7)).epsilon(1e-12));
  CHECK_THROWS_AS(evplane::positivity_scan(s, Mat(2, 2)), evplane::InvalidArgument);
  CHECK_THROWS_AS(evplane::positivity_scan(s, Mat(2, 2), std::pair{0.0, 1.0}, 4), evplane::InvalidArgument);
  CHECK(*evplane::tan_blow_up_time(SpectralBlock(3, 2, {0.5, 2.0})) == doctest::Approx(kPi / 4.0));
  CHECK_FALSE(evplane::tan_blow_up_time(SpectralBlock(3, 2, {})).has_value());
}

TEST_CASE("a tangential zero of the determinant is a violation") {
  // Lambda = I/2, B = 0: det = cos^2(t/2) touches zero at t = pi without changing sign.
  const SpectralBlock s = SpectralBlock::from_rationals(3, 2, {{1, 2}, {1, 2}});
  const evplane::PositivityReport rep = evplane::positivity_scan(s, Mat(2, 2));
  CHECK(rep.verdict == PositivityVerdict::violation_found);
  CHECK(rep.min_det <= evplane::kPositivityMargin);
  CHECK(std::abs(rep.argmin_t - kPi) < 1e-4);
}
