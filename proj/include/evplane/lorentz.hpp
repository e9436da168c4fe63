#pragma once

#include "evplane/geodesic.hpp"
#include "evplane/graph.hpp"

namespace evplane {

struct SignatureCount {
  int plus = 0;
  int minus = 0;
  int zero = 0;

  friend bool operator==(const SignatureCount&, const SignatureCount&) = default;
};

/// Eigenvalue sign counts of a symmetric matrix; |eigenvalue| <= 1e-10 ||g||_F counts as zero.
SignatureCount signature_of(const Mat& g);

/// Z'' + 2 Z' Z^T (I - ZZ^T)^{-1} Z'. Throws SpacelikeBreakdown when
/// I - ZZ^T is singular.
Mat lorentz_residual(const CurveJet& jet);

struct LorentzMetric {
  Mat g;
  SignatureCount signature;
  double det_g;
};

/// Induced metric of the ansatz graph over R^{n-1,1} in R^{n-1,m+1}.
LorentzMetric lorentz_metric(const CurveJet& jet, const AnsatzPoint& p);

/// Z = [tanh(Lambda t) 0; 0 0] with analytic derivatives.
CurveJet tanh_family_eval(const SpectralBlock& spec, double t);

}  // namespace evplane
