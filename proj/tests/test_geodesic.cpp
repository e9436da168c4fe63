#include <doctest.h>

#include <cmath>
#include <numbers>

#include "evplane/geodesic.hpp"
#include "support.hpp"

using evplane::ClosedFormGeodesic;
using evplane::CurveJet;
using evplane::Mat;
using evplane::SpectralBlock;

namespace {

constexpr double kPi = std::numbers::pi;

const Mat kJ{{0, 1}, {-1, 0}};

ClosedFormGeodesic rotation_solution() {
  return evplane::closed_form_build(SpectralBlock::from_rationals(3, 2, {{1, 2}, {1, 2}}), kJ);
}

double rel_residual(const CurveJet& jet) {
  return evplane::affine_residual(jet).frobenius_norm() / (1.0 + jet.zdd.frobenius_norm());
}

// Central differences of an evaluator, for checking analytic derivatives.
template <class F>
std::pair<Mat, Mat> fd_derivatives(F&& z, double t, double h) {
  const Mat zp = z(t + h), z0 = z(t), zm = z(t - h);
  return {(1.0 / (2.0 * h)) * (zp - zm), (1.0 / (h * h)) * (zp - 2.0 * z0 + zm)};
}

}  // namespace

TEST_CASE("spectral block validation") {
  CHECK_THROWS_AS(SpectralBlock(1, 2, {}), evplane::InvalidArgument);
  CHECK_THROWS_AS(SpectralBlock(3, 0, {}), evplane::InvalidArgument);
  CHECK_THROWS_AS(SpectralBlock(3, 2, {1, 2, 3}), evplane::InvalidArgument);
  CHECK_THROWS_AS(SpectralBlock(3, 2, {2, 1}), evplane::InvalidArgument);
  CHECK_THROWS_AS(SpectralBlock(3, 2, {0.0}), evplane::InvalidArgument);
  const SpectralBlock s = SpectralBlock::from_rationals(4, 3, {{2, 4}, {3, 1}});
  CHECK(s.rationals()->front().num == 1);
  CHECK(s.rationals()->front().den == 2);
  CHECK(s.lambda_tilde() == Mat{{0.5, 0, 0}, {0, 3, 0}, {0, 0, 0}});
  CHECK(s.cos_block(1.0)(2, 2) == 1.0);
  CHECK(s.cos_block(1.0, 1)(2, 2) == 0.0);
}

TEST_CASE("hand-expanded residual of Z = diag(t^2, 0) at t = 1") {
  const CurveJet jet(1.0, Mat{{1, 0}, {0, 0}}, Mat{{2, 0}, {0, 0}}, Mat{{2, 0}, {0, 0}});
  CHECK(evplane::distance(evplane::affine_residual(jet), Mat{{-2, 0}, {0, 0}}) < 1e-15);
}

TEST_CASE("constant curves and lines through zero velocity are geodesics") {
  support::Rng rng(21);
  const Mat z = support::random_mat(rng, 3, 2);
  CHECK(evplane::affine_residual(CurveJet(0.0, z, Mat(3, 2), Mat(3, 2))).max_abs() == 0.0);
}

TEST_CASE("tan family solves the geodesic equation and leaves the chart at pi/(2 lambda)") {
  const SpectralBlock s(3, 2, {0.5, 2.0});
  for (double t = -0.7; t <= 0.7; t += 0.05) CHECK(rel_residual(evplane::tan_family_eval(s, t)) < 1e-13);
  CHECK_THROWS_AS(evplane::tan_family_eval(s, kPi / 4.0), evplane::ChartBreakdown);
}

TEST_CASE("rotation example closed form") {
  const ClosedFormGeodesic g = rotation_solution();
  CHECK(evplane::distance(g.initial_slope(), -kJ) == 0.0);
  for (double t = -10.0; t <= 10.0; t += 0.37) {
    const CurveJet jet = evplane::closed_form_eval(g, t);
    const Mat expected{{std::sin(t), -std::cos(t)}, {std::cos(t), std::sin(t)}};
    CHECK(evplane::distance(jet.z, expected) < 1e-14);
    CHECK(rel_residual(jet) < 1e-14);
  }
  // The initial velocity is the identity.
  CHECK(evplane::distance(g.initial_velocity(), Mat::identity(2)) < 1e-14);
}

TEST_CASE("closed form of random entire pairs") {
  support::Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const evplane::EntirePair pair = support::random_entire_pair(rng);
    const ClosedFormGeodesic g = evplane::closed_form_build(pair.spectral, pair.b);
    CHECK(evplane::orthogonality_defect(g.factor()) < 1e-12);

    const std::size_t k = pair.spectral.rows(), m = pair.spectral.cols();
    const Mat bb = Mat::identity(k) + pair.b * pair.b.transpose();
    const Mat btb = Mat::identity(m) + pair.b.transpose() * pair.b;
    const Mat zd0 = evplane::spd_roots(bb).sqrt * pair.spectral.lambda_tilde() * evplane::spd_roots(btb).sqrt;
    const CurveJet at0 = evplane::closed_form_eval(g, 0.0);
    CHECK(evplane::distance(at0.z, -pair.b) < 1e-12);
    CHECK(evplane::distance(at0.zd, zd0) < 1e-10);

    double lambda_sq = 0.0;
    for (double l : pair.spectral.lambdas()) lambda_sq += l * l;
    for (double t = -3.0; t <= 3.0; t += 0.41) {
      const CurveJet jet = evplane::closed_form_eval(g, t);
      CHECK(rel_residual(jet) < 1e-11);
      CHECK(evplane::geodesic_speed_squared(jet.z, jet.zd) == doctest::Approx(lambda_sq).epsilon(1e-10));
    }
    const auto z = [&](double t) { return evplane::closed_form_eval(g, t).z; };
    const CurveJet jet = evplane::closed_form_eval(g, 0.8);
    const auto [zd, zdd] = fd_derivatives(z, 0.8, 1e-4);
    CHECK(evplane::distance(zd, jet.zd) < 1e-6 * (1.0 + jet.zd.frobenius_norm()));
    CHECK(evplane::distance(zdd, jet.zdd) < 1e-4 * (1.0 + jet.zdd.frobenius_norm()));
  }
}

TEST_CASE("closed form holds for arbitrary B") {
  support::Rng rng(28);
  for (int trial = 0; trial < 20; ++trial) {
    const evplane::EntirePair pair = support::random_pair(rng);
    const ClosedFormGeodesic g = evplane::closed_form_build(pair.spectral, pair.b);
    CHECK(evplane::distance(g.nsqrt_inv() * pair.b, pair.b * g.msqrt_inv()) < 1e-11);
    for (double t = -2.0; t <= 2.0; t += 0.31) {
      try {
        CHECK(rel_residual(evplane::closed_form_eval(g, t)) < 1e-9);
      } catch (const evplane::ChartBreakdown&) {
      }
    }
  }
  CHECK_THROWS_AS(evplane::closed_form_build(SpectralBlock(3, 2, {1.0}), Mat(3, 2)), evplane::InvalidArgument);
}

TEST_CASE("B = 0 reproduces the tan family") {
  const SpectralBlock s(4, 3, {0.5, 1.5});
  const ClosedFormGeodesic g = evplane::closed_form_build(s, Mat(3, 3));
  for (double t = -0.9; t <= 0.9; t += 0.1) {
    CHECK(evplane::distance(evplane::closed_form_eval(g, t).z, evplane::tan_family_eval(s, t).z) < 1e-14);
  }
  CHECK_THROWS_AS(evplane::closed_form_eval(g, kPi / 3.0), evplane::ChartBreakdown);
}

TEST_CASE("Stiefel lift satisfies the frame geodesic equations") {
  support::Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const evplane::EntirePair pair = support::random_entire_pair(rng);
    const ClosedFormGeodesic g = evplane::closed_form_build(pair.spectral, pair.b);
    for (double t = -5.0; t <= 5.0; t += 0.77) {
      const evplane::FrameJet lift = g.lift(t);
      const evplane::StiefelResidual r = evplane::stiefel_residual(lift);
      CHECK(r.constraint1 < 1e-12);
      CHECK(r.constraint2 < 1e-12);
      CHECK(r.res.frobenius_norm() < 1e-12);
      CHECK(evplane::distance(evplane::stiefel_to_affine(lift.frame, t), evplane::closed_form_eval(g, t).z) <
            1e-11);
      CHECK(evplane::distance(g.chart_block(t), lift.frame.p()) < 1e-15);
    }
  }
}

TEST_CASE("frame jets map to affine jets") {
  const SpectralBlock s(3, 2, {0.7, 1.3});
  const evplane::FrameJet f = evplane::trigonometric_frame(s, 0.4);
  const CurveJet jet = evplane::stiefel_jet_to_affine(f);
  CHECK(evplane::distance(jet.z, evplane::tan_family_eval(s, 0.4).z) < 1e-15);
  CHECK(evplane::distance(jet.zd, evplane::tan_family_eval(s, 0.4).zd) < 1e-14);
  CHECK(rel_residual(jet) < 1e-14);
}

TEST_CASE("stiefel frames are validated and the chart can break down") {
  CHECK_THROWS_AS(evplane::StiefelFrame(Mat{{1, 0}, {0, 1}}), evplane::InvalidArgument);
  CHECK_THROWS_AS(evplane::StiefelFrame(Mat{{1.0}, {1.0}}), evplane::InvalidArgument);
  const evplane::StiefelFrame vertical(Mat{{0.0}, {1.0}});
  CHECK_THROWS_AS(evplane::stiefel_to_affine(vertical, 2.0), evplane::ChartBreakdown);
}

TEST_CASE("left orthogonal action preserves the frame equations") {
  support::Rng rng(24);
  const SpectralBlock s(4, 2, {0.5, 1.0});
  std::vector<evplane::FrameJet> frames;
  for (double t = 0.0; t < 2.0; t += 0.25) frames.push_back(evplane::trigonometric_frame(s, t));
  const Mat l = support::random_orthogonal(rng, 5);
  for (const evplane::FrameJet& f : evplane::left_orthogonal_action(l, frames)) {
    const evplane::StiefelResidual r = evplane::stiefel_residual(f);
    CHECK(r.constraint1 < 1e-13);
    CHECK(r.constraint2 < 1e-13);
    CHECK(r.res.frobenius_norm() < 1e-13);
  }
  CHECK_THROWS_AS(evplane::left_orthogonal_action(2.0 * Mat::identity(5), frames), evplane::InvalidArgument);
}

TEST_CASE("Mobius transform obeys the residual transformation law") {
  support::Rng rng(25);
  int checked = 0;
  while (checked < 40) {
    const auto k = static_cast<std::size_t>(rng.integer(1, 4));
    const auto m = static_cast<std::size_t>(rng.integer(1, 4));
    const CurveJet jet = support::random_jet(rng, k, m);
    const evplane::OrthPartition part = evplane::OrthPartition::split(support::random_orthogonal(rng, k + m), m);
    const Mat denom = part.a() + part.bblk() * jet.z;
    if (std::abs(evplane::determinant(denom)) < 0.05) continue;
    const CurveJet w = evplane::mobius_transform(part, jet);
    const Mat predicted =
        (part.d() - w.z * part.bblk()) * evplane::affine_residual(jet) * evplane::invert_with_det(denom).inv;
    const Mat actual = evplane::affine_residual(w);
    CHECK(evplane::distance(actual, predicted) < 1e-10 * (1.0 + actual.frobenius_norm()));
    ++checked;
  }
}

TEST_CASE("Mobius transform maps the rotation geodesic to a geodesic") {
  support::Rng rng(26);
  const ClosedFormGeodesic g = rotation_solution();
  const evplane::OrthPartition part = evplane::OrthPartition::split(support::random_orthogonal(rng, 4), 2);
  for (double t = 0.0; t < 6.0; t += 0.5) {
    try {
      CHECK(rel_residual(evplane::mobius_transform(part, evplane::closed_form_eval(g, t))) < 1e-9);
    } catch (const evplane::ChartBreakdown&) {
    }
  }
}

TEST_CASE("orthogonal symmetries preserve geodesics") {
  support::Rng rng(27);
  const ClosedFormGeodesic g = rotation_solution();
  const Mat s = support::random_orthogonal(rng, 2), r = support::random_orthogonal(rng, 2);
  for (double t = 0.0; t < 6.0; t += 0.5) {
    const CurveJet jet = evplane::closed_form_eval(g, t);
    CHECK(rel_residual(evplane::orthogonal_symmetry(jet, s, r)) < 1e-14);
    CHECK(rel_residual(evplane::orthogonal_symmetry(jet, std::nullopt, r)) < 1e-14);
    CHECK(evplane::distance(evplane::orthogonal_symmetry(jet, std::nullopt, std::nullopt).z, jet.z) == 0.0);
  }
  CHECK_THROWS_AS(evplane::orthogonal_symmetry(evplane::closed_form_eval(g, 0.0), 2.0 * s, std::nullopt),
                  evplane::InvalidArgument);
}

TEST_CASE("quotient jet matches finite differences") {
  const auto p = [](double t) { return Mat{{2.0 + std::sin(t), t * t}, {0.1 * t, 3.0 + std::cos(t)}}; };
  const auto q = [](double t) { return Mat{{std::exp(0.3 * t), t}}; };
  const double t = 0.6, h = 1e-4;
  const auto [pd, pdd] = fd_derivatives(p, t, 1e-5);
  const auto [qd, qdd] = fd_derivatives(q, t, 1e-5);
  const CurveJet jet = evplane::quotient_jet(t, p(t), pd, pdd, q(t), qd, qdd);
  const auto z = [&](double s) { return q(s) * evplane::invert_with_det(p(s)).inv; };
  const auto [zd, zdd] = fd_derivatives(z, t, h);
  CHECK(evplane::distance(jet.z, z(t)) < 1e-14);
  CHECK(evplane::distance(jet.zd, zd) < 1e-6);
  CHECK(evplane::distance(jet.zdd, zdd) < 1e-4);
}
