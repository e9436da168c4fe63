#include "evplane/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace evplane {

namespace {

void require_orthogonal(const Mat& l, const char* what) {
  if (!l.is_square() || orthogonality_defect(l) > kOrthogonalityTolerance) {
    throw InvalidArgument(std::string(what) + ": factor is not orthogonal");
  }
}

// Z = Q P^{-1} with derivatives; `floor` is the absolute pivot floor for P.
CurveJet quotient_jet_impl(double t, const Mat& p, const Mat& pd, const Mat& pdd, const Mat& q,
                           const Mat& qd, const Mat& qdd, double floor) {
  Mat pinv = [&] {
    try {
      return LuFactors(p, floor).inverse();
    } catch (const SingularMatrix&) {
      throw ChartBreakdown(t);
    }
  }();
  Mat z = q * pinv;
  Mat zd = (qd - z * pd) * pinv;
  Mat zdd = (qdd - 2.0 * (zd * pd) - z * pdd) * pinv;
  return CurveJet(t, std::move(z), std::move(zd), std::move(zdd));
}

}  // namespace

// ---------------------------------------------------------------------------
// SpectralBlock

SpectralBlock::SpectralBlock(int n, int m, std::vector<double> lambdas)
    : n_(n), m_(m), lambdas_(std::move(lambdas)) {
  if (n < 2) throw InvalidArgument("SpectralBlock: n must be >= 2");
  if (m < 1) throw InvalidArgument("SpectralBlock: m must be >= 1");
  if (lambdas_.size() > static_cast<std::size_t>(std::min(n - 1, m))) {
    throw InvalidArgument("SpectralBlock: r exceeds min(n-1, m)");
  }
  for (std::size_t i = 0; i < lambdas_.size(); ++i) {
    if (!std::isfinite(lambdas_[i]) || lambdas_[i] <= 0.0) {
      throw InvalidArgument("SpectralBlock: lambdas must be positive and finite");
    }
    if (i > 0 && lambdas_[i] < lambdas_[i - 1]) {
      throw InvalidArgument("SpectralBlock: lambdas must be non-decreasing");
    }
  }
}

SpectralBlock SpectralBlock::from_rationals(int n, int m, std::vector<Rational> lambdas) {
  std::vector<double> values;
  values.reserve(lambdas.size());
  for (Rational& q : lambdas) {
    if (q.den == 0 || q.num == 0 || (q.num < 0) != (q.den < 0)) {
      throw InvalidArgument("SpectralBlock: rational lambdas must be positive");
    }
    if (q.den < 0) q = {-q.num, -q.den};
    const std::int64_t g = std::gcd(q.num, q.den);
    q = {q.num / g, q.den / g};
    values.push_back(q.value());
  }
  SpectralBlock out(n, m, std::move(values));
  out.rationals_ = std::move(lambdas);
  return out;
}

Mat SpectralBlock::lambda_tilde() const {
  Mat out(rows(), cols());
  for (std::size_t i = 0; i < r(); ++i) out(i, i) = lambdas_[i];
  return out;
}

Mat SpectralBlock::cos_block(double t, int derivative) const {
  Mat out(cols(), cols());
  for (std::size_t i = 0; i < cols(); ++i) {
    if (i >= r()) {
      out(i, i) = derivative == 0 ? 1.0 : 0.0;
      continue;
    }
    const double l = lambdas_[i];
    switch (derivative) {
      case 0: out(i, i) = std::cos(l * t); break;
      case 1: out(i, i) = -l * std::sin(l * t); break;
      case 2: out(i, i) = -l * l * std::cos(l * t); break;
      default: throw InvalidArgument("cos_block: derivative order must be 0, 1 or 2");
    }
  }
  return out;
}

Mat SpectralBlock::sin_block(double t, int derivative) const {
  if (derivative < 0 || derivative > 2) {
    throw InvalidArgument("sin_block: derivative order must be 0, 1 or 2");
  }
  Mat out(rows(), cols());
  for (std::size_t i = 0; i < r(); ++i) {
    const double l = lambdas_[i];
    switch (derivative) {
      case 0: out(i, i) = std::sin(l * t); break;
      case 1: out(i, i) = l * std::cos(l * t); break;
      default: out(i, i) = -l * l * std::sin(l * t); break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Affine chart

CurveJet::CurveJet(double t_, Mat z_, Mat zd_, Mat zdd_)
    : t(t_), z(std::move(z_)), zd(std::move(zd_)), zdd(std::move(zdd_)) {
  if (zd.rows() != z.rows() || zd.cols() != z.cols() || zdd.rows() != z.rows() ||
      zdd.cols() != z.cols()) {
    throw InvalidArgument("CurveJet: Z, Z', Z'' must share dimensions");
  }
}

Mat geodesic_acceleration(const Mat& z, const Mat& zd, Signature sig, double t) {
  if (zd.rows() != z.rows() || zd.cols() != z.cols()) {
    throw InvalidArgument("geodesic_acceleration: Z and Z' must share dimensions");
  }
  const double s = sig == Signature::euclidean ? 1.0 : -1.0;
  const Mat a = Mat::identity(z.rows()) + s * (z * z.transpose());
  Mat x = [&] {
    if (sig == Signature::euclidean) return LuFactors(a).solve(zd);
    try {
      return LuFactors(a, 0.0, /*exact_only=*/true).solve(zd);
    } catch (const SingularMatrix&) {
      throw SpacelikeBreakdown(t);
    }
  }();
  return (2.0 * s) * (zd * (z.transpose() * x));
}

Mat affine_residual(const CurveJet& jet) {
  return jet.zdd - geodesic_acceleration(jet.z, jet.zd, Signature::euclidean, jet.t);
}

double geodesic_speed_squared(const Mat& z, const Mat& zd) {
  const Mat left = solve(Mat::identity(z.rows()) + z * z.transpose(), zd);
  const Mat right = solve(Mat::identity(z.cols()) + z.transpose() * z, Mat::identity(z.cols()));
  return (zd.transpose() * left * right).trace();
}

CurveJet tan_family_eval(const SpectralBlock& spec, double t) {
  Mat z(spec.rows(), spec.cols()), zd = z, zdd = z;
  for (std::size_t i = 0; i < spec.r(); ++i) {
    const double l = spec.lambdas()[i];
    const double c = std::cos(l * t);
    if (std::abs(c) < kChartPivotFloor) throw ChartBreakdown(t);
    const double tn = std::tan(l * t);
    const double sec2 = 1.0 / (c * c);
    z(i, i) = tn;
    zd(i, i) = l * sec2;
    zdd(i, i) = 2.0 * l * l * tn * sec2;
  }
  return CurveJet(t, std::move(z), std::move(zd), std::move(zdd));
}

CurveJet quotient_jet(double t, const Mat& p, const Mat& pd, const Mat& pdd, const Mat& q,
                      const Mat& qd, const Mat& qdd) {
  return quotient_jet_impl(t, p, pd, pdd, q, qd, qdd, kChartPivotFloor);
}

// ---------------------------------------------------------------------------
// Stiefel model

StiefelFrame::StiefelFrame(Mat v) : v_(std::move(v)) {
  if (v_.rows() <= v_.cols()) {
    throw InvalidArgument("StiefelFrame: need more rows than columns (n - 1 >= 1)");
  }
  if (distance(v_.transpose() * v_, Mat::identity(v_.cols())) > kOrthogonalityTolerance) {
    throw InvalidArgument("StiefelFrame: columns are not orthonormal");
  }
}

FrameJet::FrameJet(double t_, StiefelFrame frame_, Mat vd_, Mat vdd_)
    : t(t_), frame(std::move(frame_)), vd(std::move(vd_)), vdd(std::move(vdd_)) {
  const Mat& v = frame.v();
  if (vd.rows() != v.rows() || vd.cols() != v.cols() || vdd.rows() != v.rows() ||
      vdd.cols() != v.cols()) {
    throw InvalidArgument("FrameJet: V, V', V'' must share dimensions");
  }
}

StiefelResidual stiefel_residual(const StiefelFrame& frame, const Mat& vd, const Mat& vdd) {
  const Mat& v = frame.v();
  const Mat vt = v.transpose();
  return {distance(vt * v, Mat::identity(v.cols())), (vt * vd).frobenius_norm(),
          vdd + v * (vd.transpose() * vd)};
}

std::vector<FrameJet> left_orthogonal_action(const Mat& l, std::span<const FrameJet> samples) {
  require_orthogonal(l, "left_orthogonal_action");
  std::vector<FrameJet> out;
  out.reserve(samples.size());
  for (const FrameJet& s : samples) {
    if (s.frame.v().rows() != l.rows()) {
      throw InvalidArgument("left_orthogonal_action: frame height does not match L");
    }
    out.emplace_back(s.t, StiefelFrame(l * s.frame.v()), l * s.vd, l * s.vdd);
  }
  return out;
}

Mat stiefel_to_affine(const StiefelFrame& frame, double t) {
  const Mat p = frame.p();
  try {
    return frame.q() * LuFactors(p, kChartPivotFloor).inverse();
  } catch (const SingularMatrix&) {
    throw ChartBreakdown(t);
  }
}

CurveJet stiefel_jet_to_affine(const FrameJet& j) {
  const std::size_t m = j.frame.split();
  const std::size_t k = j.frame.v().rows() - m;
  return quotient_jet(j.t, j.frame.p(), j.vd.block(0, 0, m, m), j.vdd.block(0, 0, m, m),
                      j.frame.q(), j.vd.block(m, 0, k, m), j.vdd.block(m, 0, k, m));
}

FrameJet trigonometric_frame(const SpectralBlock& spec, double t) {
  return FrameJet(t, StiefelFrame(vstack(spec.cos_block(t), spec.sin_block(t))),
                  vstack(spec.cos_block(t, 1), spec.sin_block(t, 1)),
                  vstack(spec.cos_block(t, 2), spec.sin_block(t, 2)));
}

// ---------------------------------------------------------------------------
// Closed form

ClosedFormGeodesic closed_form_build(const SpectralBlock& spec, const Mat& b) {
  if (b.rows() != spec.rows() || b.cols() != spec.cols()) {
    throw InvalidArgument("closed_form_build: B must be (n-1) x m");
  }
  const Mat bt = b.transpose();
  Mat m = spd_roots(Mat::identity(spec.cols()) + bt * b).inv_sqrt;
  Mat n = spd_roots(Mat::identity(spec.rows()) + b * bt).inv_sqrt;

  ClosedFormGeodesic g(spec, b, std::move(m), std::move(n));
  const double scale = std::max(1.0, b.frobenius_norm());
  if (distance(g.n_ * b, b * g.m_) > 1e-9 * scale) {
    throw Error("closed_form_build: NB = BM check failed");
  }
  if (orthogonality_defect(g.factor()) > kOrthogonalityTolerance * scale) {
    throw Error("closed_form_build: factor matrix is not orthogonal");
  }
  return g;
}

Mat ClosedFormGeodesic::factor() const {
  const std::size_t m = spec_.cols(), k = spec_.rows();
  Mat l(m + k, m + k);
  l.set_block(0, 0, m_);
  l.set_block(0, m, m_ * b_.transpose());
  l.set_block(m, 0, -(n_ * b_));
  l.set_block(m, m, n_);
  return l;
}

Mat ClosedFormGeodesic::initial_slope() const { return -b_; }

Mat ClosedFormGeodesic::initial_velocity() const {
  const Mat bt = b_.transpose();
  return spd_roots(Mat::identity(spec_.rows()) + b_ * bt).sqrt * spec_.lambda_tilde() *
         spd_roots(Mat::identity(spec_.cols()) + bt * b_).sqrt;
}

FrameJet ClosedFormGeodesic::lift(double t) const {
  const FrameJet base = trigonometric_frame(spec_, t);
  return std::move(left_orthogonal_action(factor(), std::span(&base, 1)).front());
}

Mat ClosedFormGeodesic::chart_block(double t) const {
  return m_ * spec_.cos_block(t) + m_ * b_.transpose() * spec_.sin_block(t);
}

CurveJet closed_form_eval(const ClosedFormGeodesic& g, double t) {
  const SpectralBlock& spec = g.spec();
  const Mat& m = g.msqrt_inv();
  const Mat& n = g.nsqrt_inv();
  const Mat mbt = m * g.b().transpose();
  const Mat nb = n * g.b();
  Mat p[3] = {Mat(1, 1), Mat(1, 1), Mat(1, 1)};
  Mat q[3] = {Mat(1, 1), Mat(1, 1), Mat(1, 1)};
  for (int d = 0; d < 3; ++d) {
    const Mat c = spec.cos_block(t, d);
    const Mat s = spec.sin_block(t, d);
    p[d] = m * c + mbt * s;
    q[d] = n * s - nb * c;
  }
  return quotient_jet(t, p[0], p[1], p[2], q[0], q[1], q[2]);
}

// ---------------------------------------------------------------------------
// Symmetries

OrthPartition::OrthPartition(Mat a, Mat bblk, Mat c, Mat d)
    : a_(std::move(a)), b_(std::move(bblk)), c_(std::move(c)), d_(std::move(d)) {
  const std::size_t m = a_.rows(), k = d_.rows();
  if (!a_.is_square() || !d_.is_square() || b_.rows() != m || b_.cols() != k ||
      c_.rows() != k || c_.cols() != m) {
    throw InvalidArgument("OrthPartition: inconsistent block shapes");
  }
  require_orthogonal(assembled(), "OrthPartition");
}

OrthPartition OrthPartition::split(const Mat& l, std::size_t m) {
  if (!l.is_square() || m == 0 || m >= l.rows()) {
    throw InvalidArgument("OrthPartition::split: bad split");
  }
  const std::size_t k = l.rows() - m;
  return OrthPartition(l.block(0, 0, m, m), l.block(0, m, m, k), l.block(m, 0, k, m),
                       l.block(m, m, k, k));
}

Mat OrthPartition::assembled() const {
  const std::size_t m = a_.rows(), k = d_.rows();
  Mat l(m + k, m + k);
  l.set_block(0, 0, a_);
  l.set_block(0, m, b_);
  l.set_block(m, 0, c_);
  l.set_block(m, m, d_);
  return l;
}

CurveJet mobius_transform(const OrthPartition& part, const CurveJet& jet) {
  if (jet.z.rows() != part.d().rows() || jet.z.cols() != part.a().rows()) {
    throw InvalidArgument("mobius_transform: jet shape does not match partition");
  }
  const Mat& bb = part.bblk();
  const Mat& d = part.d();
  return quotient_jet_impl(jet.t, part.a() + bb * jet.z, bb * jet.zd, bb * jet.zdd,
                           part.c() + d * jet.z, d * jet.zd, d * jet.zdd, 0.0);
}

CurveJet orthogonal_symmetry(const CurveJet& jet, const std::optional<Mat>& s,
                             const std::optional<Mat>& rmat) {
  Mat z = jet.z, zd = jet.zd, zdd = jet.zdd;
  if (s) {
    require_orthogonal(*s, "orthogonal_symmetry (S)");
    if (s->rows() != z.rows()) throw InvalidArgument("orthogonal_symmetry: S must be in O(n-1)");
    z = *s * z;
    zd = *s * zd;
    zdd = *s * zdd;
  }
  if (rmat) {
    require_orthogonal(*rmat, "orthogonal_symmetry (R)");
    if (rmat->rows() != z.cols()) throw InvalidArgument("orthogonal_symmetry: R must be in O(m)");
    z = z * *rmat;
    zd = zd * *rmat;
    zdd = zdd * *rmat;
  }
  return CurveJet(jet.t, std::move(z), std::move(zd), std::move(zdd));
}

}  // namespace evplane
