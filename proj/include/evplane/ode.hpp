#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "evplane/geodesic.hpp"

namespace evplane {

inline constexpr double kBlowUpNorm = 1e8;
inline constexpr double kLorentzBreakdownDet = 1e-10;

struct OdeSample {
  double t;
  Mat z;
  Mat zd;
};

enum class RunStatus { completed, blow_up, chart_breakdown };

struct IntegrationRun {
  std::vector<OdeSample> samples;  ///< strictly increasing in t
  RunStatus status = RunStatus::completed;
  double stop_t = 0.0;             ///< time of the last accepted sample
  Signature rhs_kind = Signature::euclidean;
  double step = 0.0;

  const OdeSample& final() const { return samples.back(); }
};

/// Classical fixed-step RK4 on the first-order system (Z, Z') of the
/// slope-evolution equation, from t = 0 to t_end > 0. The last step is
/// shortened to land exactly on t_end.
///
/// Stops with blow_up once ||Z||_F exceeds kBlowUpNorm (or a stage overflows),
/// and, for the Lorentzian equation, with chart_breakdown once
/// det(I - ZZ^T) drops below kLorentzBreakdownDet. `record_every` thins the
/// stored samples; the first and final samples are always kept.
IntegrationRun integrate(const Mat& z0, const Mat& zd0, double t_end, double step,
                         Signature rhs_kind, std::size_t record_every = 1);

struct ConvergenceFit {
  /// Fitted order p of ||Z_h(t_end) - Z_ref(t_end)|| ~ C h^p; nullopt when the
  /// integrator is exact at every step size (constant trajectory).
  std::optional<double> order;
  std::array<double, 3> steps;
  std::array<double, 3> errors;
};

/// Least-squares slope of log(error) against log(step) for steps
/// {1e-2, 5e-3, 2.5e-3}. `reference` returns the exact Z at a time.
ConvergenceFit convergence_order(const Mat& z0, const Mat& zd0, double t_end, Signature rhs_kind,
                                 const std::function<Mat(double)>& reference);

}  // namespace evplane
