#include "evplane/lorentz.hpp"

#include <cmath>

namespace evplane {

SignatureCount signature_of(const Mat& g) {
  const SymEigen eig = sym_eigen(g);
  const double zero = 1e-10 * g.frobenius_norm();
  SignatureCount out;
  for (double v : eig.eigvals) {
    if (v > zero) {
      ++out.plus;
    } else if (v < -zero) {
      ++out.minus;
    } else {
      ++out.zero;
    }
  }
  return out;
}

Mat lorentz_residual(const CurveJet& jet) {
  return jet.zdd - geodesic_acceleration(jet.z, jet.zd, Signature::lorentzian, jet.t);
}

LorentzMetric lorentz_metric(const CurveJet& jet, const AnsatzPoint& p) {
  Mat g = induced_metric(jet, p, Signature::lorentzian);
  const SignatureCount sig = signature_of(g);
  const double det = determinant(g);
  return {std::move(g), sig, det};
}

CurveJet tanh_family_eval(const SpectralBlock& spec, double t) {
  Mat z(spec.rows(), spec.cols()), zd = z, zdd = z;
  for (std::size_t i = 0; i < spec.r(); ++i) {
    const double l = spec.lambdas()[i];
    const double th = std::tanh(l * t);
    const double sech = 1.0 / std::cosh(l * t);
    const double sech2 = sech * sech;
    z(i, i) = th;
    zd(i, i) = l * sech2;
    zdd(i, i) = -2.0 * l * l * th * sech2;
  }
  return CurveJet(t, std::move(z), std::move(zd), std::move(zdd));
}

}  // namespace evplane
