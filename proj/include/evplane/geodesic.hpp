#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evplane/matlin.hpp"

namespace evplane {

/// Tolerance on ||L^T L - I||_F accepted for orthogonal factors.
inline constexpr double kOrthogonalityTolerance = 1e-9;

/// Smallest admissible |pivot| of the top block P of a unit-scale frame.
/// Below it the curve is considered to have left the affine chart.
inline constexpr double kChartPivotFloor = 1e-12;

/// Which pseudo-Grassmannian the slope matrix lives on: the Euclidean case
/// uses I + ZZ^T, the Lorentzian (signature (n-1, m+1)) case I - ZZ^T.
enum class Signature { euclidean, lorentzian };

struct Rational {
  std::int64_t num;
  std::int64_t den;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// (n, m, lambda_1 <= ... <= lambda_r): the diagonal frequencies of the
/// block matrix Lambda~ in R^{(n-1) x m}.
class SpectralBlock {
 public:
  SpectralBlock(int n, int m, std::vector<double> lambdas);

  /// Frequencies given exactly; enables exact common periods.
  static SpectralBlock from_rationals(int n, int m, std::vector<Rational> lambdas);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(n_ - 1); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(m_); }
  std::size_t r() const noexcept { return lambdas_.size(); }
  const std::vector<double>& lambdas() const noexcept { return lambdas_; }
  const std::optional<std::vector<Rational>>& rationals() const noexcept { return rationals_; }

  /// Lambda~ as an (n-1) x m matrix.
  Mat lambda_tilde() const;
  /// cos(Lambda~ t) (m x m) and its first two t-derivatives.
  Mat cos_block(double t, int derivative = 0) const;
  /// sin(Lambda~ t) ((n-1) x m) and its first two t-derivatives.
  Mat sin_block(double t, int derivative = 0) const;

 private:
  int n_;
  int m_;
  std::vector<double> lambdas_;
  std::optional<std::vector<Rational>> rationals_;
};

/// Slope matrix Z(t) with its first two derivatives, all (n-1) x m.
struct CurveJet {
  CurveJet(double t, Mat z, Mat zd, Mat zdd);

  double t;
  Mat z;
  Mat zd;
  Mat zdd;
};

/// Z'' - 2 Z' Z^T (I + ZZ^T)^{-1} Z'. Vanishes iff the jet solves the
/// Grassmannian geodesic equation in affine coordinates at jet.t.
Mat affine_residual(const CurveJet& jet);

/// Acceleration prescribed by the geodesic equation:
///   euclidean:   +2 Z' Z^T (I + ZZ^T)^{-1} Z'
///   lorentzian:  -2 Z' Z^T (I - ZZ^T)^{-1} Z'
/// Lorentzian evaluation throws SpacelikeBreakdown(t) if I - ZZ^T is exactly singular.
Mat geodesic_acceleration(const Mat& z, const Mat& zd, Signature sig, double t = 0.0);

/// trace(Z'^T (I+ZZ^T)^{-1} Z' (I+Z^T Z)^{-1}): squared speed in the
/// canonical metric. Constant along geodesics.
double geodesic_speed_squared(const Mat& z, const Mat& zd);

/// Diagonal tan family: Z = [tan(Lambda t) 0; 0 0]. Throws ChartBreakdown
/// when some cos(lambda_i t) vanishes to working precision.
CurveJet tan_family_eval(const SpectralBlock& spec, double t);

/// Jet of Z = Q P^{-1} from jets of P (m x m) and Q ((n-1) x m).
/// Throws ChartBreakdown(t) when P is singular at unit scale.
CurveJet quotient_jet(double t, const Mat& p, const Mat& pd, const Mat& pdd, const Mat& q,
                      const Mat& qd, const Mat& qdd);

// ---------------------------------------------------------------------------
// Stiefel model

/// Orthonormal m-frame V = [P; Q] in R^{(n-1+m) x m}; P is the top m rows.
class StiefelFrame {
 public:
  explicit StiefelFrame(Mat v);

  const Mat& v() const noexcept { return v_; }
  std::size_t split() const noexcept { return v_.cols(); }
  Mat p() const { return v_.block(0, 0, split(), split()); }
  Mat q() const { return v_.block(split(), 0, v_.rows() - split(), split()); }

 private:
  Mat v_;
};

/// A frame sampled on a curve together with its first two derivatives.
struct FrameJet {
  FrameJet(double t, StiefelFrame frame, Mat vd, Mat vdd);

  double t;
  StiefelFrame frame;
  Mat vd;
  Mat vdd;
};

struct StiefelResidual {
  double constraint1;  ///< ||V^T V - I||_F
  double constraint2;  ///< ||V^T V'||_F
  Mat res;             ///< V'' + V (V'^T V')
};

StiefelResidual stiefel_residual(const StiefelFrame& v, const Mat& vd, const Mat& vdd);
inline StiefelResidual stiefel_residual(const FrameJet& j) {
  return stiefel_residual(j.frame, j.vd, j.vdd);
}

/// V -> L V on every sample (and derivatives). L must be orthogonal.
std::vector<FrameJet> left_orthogonal_action(const Mat& l, std::span<const FrameJet> samples);

/// Z = Q P^{-1}; throws ChartBreakdown(t) when P is singular.
Mat stiefel_to_affine(const StiefelFrame& frame, double t = 0.0);

/// Full affine jet of a frame jet (Z, Z', Z'' by the quotient rule).
CurveJet stiefel_jet_to_affine(const FrameJet& j);

/// [cos(Lambda~ t); sin(Lambda~ t)] and derivatives: the basic Stiefel geodesic.
FrameJet trigonometric_frame(const SpectralBlock& spec, double t);

// ---------------------------------------------------------------------------
// Closed-form entire solutions

class ClosedFormGeodesic {
 public:
  const SpectralBlock& spec() const noexcept { return spec_; }
  const Mat& b() const noexcept { return b_; }
  /// M = (I + B^T B)^{-1/2}
  const Mat& msqrt_inv() const noexcept { return m_; }
  /// N = (I + B B^T)^{-1/2}
  const Mat& nsqrt_inv() const noexcept { return n_; }

  /// [[M, M B^T], [-N B, N]], an element of O(n-1+m).
  Mat factor() const;
  /// Initial data of the solution: Z(0) = -B, Z'(0) = (I+BB^T)^{1/2} Lambda~ (I+B^T B)^{1/2}.
  Mat initial_slope() const;
  Mat initial_velocity() const;

  /// Stiefel lift [P(t); Q(t)] = factor() [cos; sin].
  FrameJet lift(double t) const;
  /// P(t) = M cos(Lambda~ t) + M B^T sin(Lambda~ t).
  Mat chart_block(double t) const;

 private:
  friend ClosedFormGeodesic closed_form_build(const SpectralBlock& spec, const Mat& b);
  ClosedFormGeodesic(SpectralBlock spec, Mat b, Mat m, Mat n)
      : spec_(std::move(spec)), b_(std::move(b)), m_(std::move(m)), n_(std::move(n)) {}

  SpectralBlock spec_;
  Mat b_;
  Mat m_;
  Mat n_;
};

/// Builds (M, N) and checks NB = BM and orthogonality of the factor matrix.
ClosedFormGeodesic closed_form_build(const SpectralBlock& spec, const Mat& b);

/// Z(t) = (-NB cos + N sin)(M cos + M B^T sin)^{-1} with analytic derivatives.
/// Throws ChartBreakdown(t) where the denominator is singular.
CurveJet closed_form_eval(const ClosedFormGeodesic& g, double t);

// ---------------------------------------------------------------------------
// Symmetries

/// Blocks of an orthogonal matrix [[a, bblk], [c, d]] of size n-1+m, with a m x m.
class OrthPartition {
 public:
  OrthPartition(Mat a, Mat bblk, Mat c, Mat d);
  /// Splits an orthogonal (n-1+m) square matrix after its first m rows/cols.
  static OrthPartition split(const Mat& l, std::size_t m);

  const Mat& a() const noexcept { return a_; }
  const Mat& bblk() const noexcept { return b_; }
  const Mat& c() const noexcept { return c_; }
  const Mat& d() const noexcept { return d_; }
  Mat assembled() const;

 private:
  Mat a_, b_, c_, d_;
};

/// W = (C + D Z)(A + B Z)^{-1} with analytic derivatives.
/// Throws ChartBreakdown(t) if A + BZ is singular.
CurveJet mobius_transform(const OrthPartition& part, const CurveJet& jet);

/// Z -> S Z R (and derivatives), S in O(n-1), R in O(m); either may be omitted.
CurveJet orthogonal_symmetry(const CurveJet& jet, const std::optional<Mat>& s,
                             const std::optional<Mat>& rmat);

}  // namespace evplane
