#pragma once

#include <functional>
#include <vector>

#include "evplane/geodesic.hpp"

namespace evplane {

/// A domain point (x^1, ..., x^{n-1}, t).
struct AnsatzPoint {
  std::vector<double> x;
  double t;
};

/// Everything about the ansatz graph at one domain point.
struct MetricReport {
  Mat g;                      ///< induced metric, n x n
  double det_g;
  std::vector<double> residual;  ///< Laplace-Beltrami of each f^alpha
  std::vector<Mat> hessians;     ///< coordinate Hessian of each f^alpha
};

/// (x, t, f^1, ..., f^m) with f^alpha = sum_i z_i^alpha x^i.
std::vector<double> embed(const CurveJet& jet, const AnsatzPoint& p);

/// Induced metric of the graph in (x, t) coordinates. The Lorentzian form is
/// the one induced from the ambient form |x|^2 - t^2 - |y|^2.
Mat induced_metric(const CurveJet& jet, const AnsatzPoint& p,
                   Signature sig = Signature::euclidean);

/// Coordinate Hessian of f^alpha: zero top-left block, borders z'^alpha,
/// corner <x, z''^alpha>.
Mat ansatz_hessian(const CurveJet& jet, const AnsatzPoint& p, std::size_t alpha);

/// g^{ij} d_i d_j f^alpha for every alpha; identically zero in p iff the
/// graph is minimal (resp. has vanishing mean curvature).
std::vector<double> mss_residual(const CurveJet& jet, const AnsatzPoint& p,
                                 Signature sig = Signature::euclidean);

MetricReport metric_report(const CurveJet& jet, const AnsatzPoint& p,
                           Signature sig = Signature::euclidean);

/// (n-1) x m matrix of Schur values D - C A^{-1} B of the bordered
/// determinants whose vanishing is the minimal surface system under the
/// ansatz: A = I +- ZZ^T, B = 2 z'^alpha, C = +-(Z' Z^T)_k, D = z''_k^alpha.
/// In the Euclidean case this equals affine_residual(jet).
Mat mss_residual_det_form(const CurveJet& jet, Signature sig = Signature::euclidean);

/// The Laplacian rebuilt from the Schur values through its linear
/// dependence on x: det(A)/det(g) * sum_k x^k R_{k, alpha}.
std::vector<double> mss_residual_from_det_form(const CurveJet& jet, const AnsatzPoint& p,
                                               Signature sig = Signature::euclidean);

inline constexpr double kDefaultFdStep = 1e-4;

/// Finite-difference oracle: samples f^alpha(x, t) = sum_i Z(t)_{i alpha} x^i
/// from a slope-curve evaluator on central stencils, builds gradients,
/// Hessians and the metric numerically and contracts them.
std::vector<double> fd_oracle_residual(const std::function<Mat(double)>& slope_curve,
                                       const AnsatzPoint& p, double h = kDefaultFdStep);

}  // namespace evplane
