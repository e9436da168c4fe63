#include "evplane/ode.hpp"

#include <cmath>
#include <limits>

namespace evplane {

namespace {

struct State {
  Mat z;
  Mat w;
};

// Raised inside a step; converted to a run status by the driver.
struct StopIntegration {
  RunStatus status;
};

State derivative(const State& s, Signature kind, double t) {
  if (!s.z.all_finite() || !s.w.all_finite()) throw StopIntegration{RunStatus::blow_up};
  try {
    Mat acc = geodesic_acceleration(s.z, s.w, kind, t);
    if (!acc.all_finite()) throw StopIntegration{RunStatus::blow_up};
    return {s.w, std::move(acc)};
  } catch (const SpacelikeBreakdown&) {
    throw StopIntegration{RunStatus::chart_breakdown};
  } catch (const SingularMatrix&) {
    // Only reachable through overflow in the Euclidean case.
    throw StopIntegration{RunStatus::blow_up};
  }
}

State rk4_step(const State& s, double t, double h, Signature kind) {
  const State k1 = derivative(s, kind, t);
  const State k2 = derivative({s.z + (0.5 * h) * k1.z, s.w + (0.5 * h) * k1.w}, kind, t + 0.5 * h);
  const State k3 = derivative({s.z + (0.5 * h) * k2.z, s.w + (0.5 * h) * k2.w}, kind, t + 0.5 * h);
  const State k4 = derivative({s.z + h * k3.z, s.w + h * k3.w}, kind, t + h);
  const double c = h / 6.0;
  return {s.z + c * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
          s.w + c * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
}

std::optional<RunStatus> threshold_status(const State& s, Signature kind) {
  if (!s.z.all_finite() || !s.w.all_finite() || s.z.frobenius_norm() > kBlowUpNorm) {
    return RunStatus::blow_up;
  }
  if (kind == Signature::lorentzian &&
      determinant(Mat::identity(s.z.rows()) - s.z * s.z.transpose()) < kLorentzBreakdownDet) {
    return RunStatus::chart_breakdown;
  }
  return std::nullopt;
}

}  // namespace

IntegrationRun integrate(const Mat& z0, const Mat& zd0, double t_end, double step,
                         Signature rhs_kind, std::size_t record_every) {
  if (z0.rows() != zd0.rows() || z0.cols() != zd0.cols()) {
    throw InvalidArgument("integrate: Z(0) and Z'(0) must share dimensions");
  }
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("integrate: step must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidArgument("integrate: t_end must be >= 0");
  if (record_every == 0) record_every = 1;

  IntegrationRun run;
  run.rhs_kind = rhs_kind;
  run.step = step;
  run.samples.push_back({0.0, z0, zd0});

  State s{z0, zd0};
  if (auto st = threshold_status(s, rhs_kind)) {
    run.status = *st;
    return run;
  }

  const auto full_steps = static_cast<std::size_t>(std::floor(t_end / step));
  const double tail = t_end - static_cast<double>(full_steps) * step;
  const bool has_tail = tail > 1e-12 * std::max(1.0, t_end);
  const std::size_t total = full_steps + (has_tail ? 1 : 0);

  double t = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    const bool last = k + 1 == total;
    const double h = (has_tail && last) ? tail : step;
    const double t_next = last ? t_end : static_cast<double>(k + 1) * step;
    std::optional<RunStatus> stop;
    try {
      s = rk4_step(s, t, h, rhs_kind);
      stop = threshold_status(s, rhs_kind);
    } catch (const StopIntegration& e) {
      stop = e.status;
    }
    if (stop && (!s.z.all_finite() || !s.w.all_finite())) {
      // Nothing finite to record; the previous sample is the last one.
      run.status = *stop;
      run.stop_t = run.samples.back().t;
      return run;
    }
    if (stop && *stop == RunStatus::blow_up && s.z.frobenius_norm() <= kBlowUpNorm) {
      // A stage overflowed before the accepted state did.
      run.status = *stop;
      run.stop_t = run.samples.back().t;
      return run;
    }
    t = t_next;
    if (stop || last || (k + 1) % record_every == 0) run.samples.push_back({t, s.z, s.w});
    if (stop) {
      run.status = *stop;
      break;
    }
  }
  run.stop_t = run.samples.back().t;
  return run;
}

ConvergenceFit convergence_order(const Mat& z0, const Mat& zd0, double t_end, Signature rhs_kind,
                                 const std::function<Mat(double)>& reference) {
  ConvergenceFit fit{std::nullopt, {1e-2, 5e-3, 2.5e-3}, {}};
  const Mat exact = reference(t_end);
  for (std::size_t i = 0; i < fit.steps.size(); ++i) {
    const IntegrationRun run = integrate(z0, zd0, t_end, fit.steps[i], rhs_kind,
                                         std::numeric_limits<std::size_t>::max());
    if (run.status != RunStatus::completed) {
      throw Error("convergence_order: integration stopped early at t = " +
                  std::to_string(run.stop_t));
    }
    fit.errors[i] = distance(run.final().z, exact);
  }

  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + exact.frobenius_norm());
  if (fit.errors[0] <= floor && fit.errors[1] <= floor && fit.errors[2] <= floor) return fit;

  double mx = 0.0, my = 0.0;
  std::array<double, 3> lx{}, ly{};
  for (std::size_t i = 0; i < 3; ++i) {
    lx[i] = std::log(fit.steps[i]);
    ly[i] = std::log(std::max(fit.errors[i], std::numeric_limits<double>::min()));
    mx += lx[i] / 3.0;
    my += ly[i] / 3.0;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  fit.order = sxy / sxx;
  return fit;
}

}  // namespace evplane
