#include "evplane/graph.hpp"

#include <string>

namespace evplane {

namespace {

double sign_of(Signature sig) { return sig == Signature::euclidean ? 1.0 : -1.0; }

void require_point(const CurveJet& jet, const AnsatzPoint& p) {
  if (p.x.size() != jet.z.rows()) {
    throw InvalidArgument("ansatz point has " + std::to_string(p.x.size()) +
                          " spatial coordinates, slope matrix has " +
                          std::to_string(jet.z.rows()) + " rows");
  }
}

// w_beta = <x, z'^beta> for every beta.
std::vector<double> velocity_weights(const CurveJet& jet, const AnsatzPoint& p) {
  std::vector<double> w(jet.zd.cols(), 0.0);
  for (std::size_t b = 0; b < jet.zd.cols(); ++b)
    for (std::size_t i = 0; i < jet.zd.rows(); ++i) w[b] += p.x[i] * jet.zd(i, b);
  return w;
}

}  // namespace

std::vector<double> embed(const CurveJet& jet, const AnsatzPoint& p) {
  require_point(jet, p);
  const std::size_t k = jet.z.rows(), m = jet.z.cols();
  std::vector<double> out(p.x);
  out.push_back(p.t);
  for (std::size_t a = 0; a < m; ++a) {
    double f = 0.0;
    for (std::size_t i = 0; i < k; ++i) f += jet.z(i, a) * p.x[i];
    out.push_back(f);
  }
  return out;
}

Mat induced_metric(const CurveJet& jet, const AnsatzPoint& p, Signature sig) {
  require_point(jet, p);
  const double s = sign_of(sig);
  const std::size_t k = jet.z.rows();
  const std::vector<double> w = velocity_weights(jet, p);

  Mat g(k + 1, k + 1);
  g.set_block(0, 0, Mat::identity(k) + s * (jet.z * jet.z.transpose()));
  double corner = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    double border = 0.0;
    for (std::size_t b = 0; b < w.size(); ++b) border += w[b] * jet.z(i, b);
    g(i, k) = g(k, i) = s * border;
  }
  for (double wb : w) corner += wb * wb;
  g(k, k) = s * corner;
  return g;
}

Mat ansatz_hessian(const CurveJet& jet, const AnsatzPoint& p, std::size_t alpha) {
  require_point(jet, p);
  if (alpha >= jet.z.cols()) throw InvalidArgument("ansatz_hessian: alpha out of range");
  const std::size_t k = jet.z.rows();
  Mat h(k + 1, k + 1);
  double corner = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    h(i, k) = h(k, i) = jet.zd(i, alpha);
    corner += p.x[i] * jet.zdd(i, alpha);
  }
  h(k, k) = corner;
  return h;
}

MetricReport metric_report(const CurveJet& jet, const AnsatzPoint& p, Signature sig) {
  Mat g = induced_metric(jet, p, sig);
  const LuFactors lu(g);
  const Mat ginv = lu.inverse();
  MetricReport out{g, lu.determinant(), {}, {}};
  for (std::size_t a = 0; a < jet.z.cols(); ++a) {
    Mat h = ansatz_hessian(jet, p, a);
    double contraction = 0.0;
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t j = 0; j < h.cols(); ++j) contraction += ginv(i, j) * h(i, j);
    out.residual.push_back(contraction);
    out.hessians.push_back(std::move(h));
  }
  return out;
}

std::vector<double> mss_residual(const CurveJet& jet, const AnsatzPoint& p, Signature sig) {
  return metric_report(jet, p, sig).residual;
}

Mat mss_residual_det_form(const CurveJet& jet, Signature sig) {
  const double s = sign_of(sig);
  const std::size_t k = jet.z.rows(), m = jet.z.cols();
  const Mat a = Mat::identity(k) + s * (jet.z * jet.z.transpose());
  // Column alpha of A^{-1} B, with B = 2 z'^alpha.
  const Mat ainv_b = LuFactors(a).solve(2.0 * jet.zd);
  const Mat c = s * (jet.zd * jet.z.transpose());

  Mat out(k, m);
  for (std::size_t row = 0; row < k; ++row) {
    for (std::size_t alpha = 0; alpha < m; ++alpha) {
      double cab = 0.0;
      for (std::size_t j = 0; j < k; ++j) cab += c(row, j) * ainv_b(j, alpha);
      out(row, alpha) = jet.zdd(row, alpha) - cab;
    }
  }
  return out;
}

std::vector<double> mss_residual_from_det_form(const CurveJet& jet, const AnsatzPoint& p,
                                               Signature sig) {
  require_point(jet, p);
  const double s = sign_of(sig);
  const std::size_t k = jet.z.rows(), m = jet.z.cols();
  const Mat schur = mss_residual_det_form(jet, sig);
  const double det_a = determinant(Mat::identity(k) + s * (jet.z * jet.z.transpose()));
  const double det_g = determinant(induced_metric(jet, p, sig));
  std::vector<double> out(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    double lin = 0.0;
    for (std::size_t i = 0; i < k; ++i) lin += p.x[i] * schur(i, a);
    out[a] = det_a / det_g * lin;
  }
  return out;
}

std::vector<double> fd_oracle_residual(const std::function<Mat(double)>& slope_curve,
                                       const AnsatzPoint& p, double h) {
  if (!(h > 0.0)) throw InvalidArgument("fd_oracle_residual: step must be positive");
  const Mat z_minus = slope_curve(p.t - h);
  const Mat z_mid = slope_curve(p.t);
  const Mat z_plus = slope_curve(p.t + h);
  const std::size_t k = z_mid.rows(), m = z_mid.cols(), n = k + 1;
  if (p.x.size() != k) throw InvalidArgument("fd_oracle_residual: point dimension mismatch");

  // f^alpha at x + dx and time offset index (0: t-h, 1: t, 2: t+h).
  auto f = [&](std::size_t alpha, const std::vector<double>& x, int slot) {
    const Mat& z = slot == 0 ? z_minus : (slot == 1 ? z_mid : z_plus);
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) v += z(i, alpha) * x[i];
    return v;
  };
  // Evaluate f at u + du_a e_a + du_b e_b where e_{n-1} is the t direction.
  auto f_at = [&](std::size_t alpha, std::size_t ia, double da, std::size_t ib, double db) {
    std::vector<double> x = p.x;
    int slot = 1;
    auto shift = [&](std::size_t idx, double d) {
      if (d == 0.0) return;
      if (idx < k) {
        x[idx] += d;
      } else {
        slot += d > 0 ? 1 : -1;
      }
    };
    shift(ia, da);
    shift(ib, db);
    return f(alpha, x, slot);
  };

  std::vector<std::vector<double>> grad(m, std::vector<double>(n));
  std::vector<Mat> hess(m, Mat(n, n));
  for (std::size_t a = 0; a < m; ++a) {
    const double f0 = f_at(a, 0, 0.0, 0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double fp = f_at(a, i, h, 0, 0.0), fm = f_at(a, i, -h, 0, 0.0);
      grad[a][i] = (fp - fm) / (2.0 * h);
      hess[a](i, i) = (fp - 2.0 * f0 + fm) / (h * h);
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = (f_at(a, i, h, j, h) - f_at(a, i, h, j, -h) - f_at(a, i, -h, j, h) +
                          f_at(a, i, -h, j, -h)) /
                         (4.0 * h * h);
        hess[a](i, j) = hess[a](j, i) = v;
      }
    }
  }

  Mat g = Mat::identity(n);
  for (std::size_t b = 0; b < m; ++b)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) += grad[b][i] * grad[b][j];
  const Mat ginv = LuFactors(g).inverse();

  std::vector<double> out(m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[a] += ginv(i, j) * hess[a](i, j);
  return out;
}

}  // namespace evplane
