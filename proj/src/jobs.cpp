#include "evplane/jobs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "evplane/graph.hpp"
#include "evplane/lorentz.hpp"
#include "evplane/ode.hpp"

namespace evplane {

using ojson = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Parsing helpers

std::size_t line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const std::size_t pos = text.find(quoted);
  if (pos == std::string_view::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

struct Anchor {
  std::string_view text;
  std::string_view source;

  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    const std::size_t line = line_of_key(text, key);
    std::string where(source);
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": field '" + std::string(key) + "': " + message);
  }
};

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

double parse_real(std::string_view s) {
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v)) {
    throw ConfigError("not a finite number: '" + buf + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

LambdaValue lambda_from_json(const ojson& j) {
  if (j.is_string()) return parse_lambda(j.get<std::string>());
  if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
    const Rational q{j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
    if (q.den == 0) throw ConfigError("zero denominator");
    return {q.value(), q};
  }
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    return {static_cast<double>(v), Rational{v, 1}};
  }
  if (j.is_number()) return {j.get<double>(), std::nullopt};
  throw ConfigError("expected a number, \"p/q\" string or [p, q] pair");
}

std::vector<double> reals_from_json(const ojson& j) {
  if (!j.is_array()) throw ConfigError("expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError("expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::pair<double, double> range_from_json(const ojson& j) {
  const std::vector<double> v = reals_from_json(j);
  if (v.size() != 2) throw ConfigError("expected a [low, high] pair");
  return {v[0], v[1]};
}

int int_from_json(const ojson& j) {
  if (!j.is_number_integer()) throw ConfigError("expected an integer");
  return j.get<int>();
}

FrequencyBlock block_from_json(const ojson& j) {
  if (!j.is_object() || !j.contains("lambda") || !j.contains("cells")) {
    throw ConfigError("a block needs 'lambda' and 'cells'");
  }
  const LambdaValue l = lambda_from_json(j.at("lambda"));
  FrequencyBlock blk{l.value, l.exact, {}};
  for (const auto& c : j.at("cells")) {
    const std::vector<double> ab = reals_from_json(c);
    if (ab.size() != 2) throw ConfigError("a cell is an [a, b] pair");
    blk.cells.push_back({ab[0], ab[1]});
  }
  return blk;
}

// ---------------------------------------------------------------------------
// Numerics shared by the modes

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  // Platform-independent uniform draw in [lo, hi).
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 engine_;
};

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] =
        count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  return out;
}

ojson mat_json(const Mat& a) {
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    ojson r = ojson::array();
    for (double v : a.row(i)) r.push_back(v);
    rows.push_back(std::move(r));
  }
  return rows;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

EntirePair resolve_pair(const JobConfig& c) {
  if (!c.blocks.empty()) return build_odd_pair(BlockSpec(c.n, c.m, c.blocks));
  const bool exact = !c.lambdas.empty() && std::all_of(c.lambdas.begin(), c.lambdas.end(),
                                                       [](const LambdaValue& l) { return l.exact.has_value(); });
  const auto rows = static_cast<std::size_t>(c.n - 1), cols = static_cast<std::size_t>(c.m);
  Mat b = c.b ? Mat(rows, cols, *c.b) : Mat(rows, cols);
  if (exact) {
    std::vector<Rational> q;
    for (const LambdaValue& l : c.lambdas) q.push_back(*l.exact);
    return {SpectralBlock::from_rationals(c.n, c.m, std::move(q)), std::move(b)};
  }
  std::vector<double> v;
  for (const LambdaValue& l : c.lambdas) v.push_back(l.value);
  return {SpectralBlock(c.n, c.m, std::move(v)), std::move(b)};
}

ojson spectral_json(const SpectralBlock& s) {
  ojson j;
  j["n"] = s.n();
  j["m"] = s.m();
  j["r"] = s.r();
  j["lambdas"] = s.lambdas();
  return j;
}

AnsatzPoint random_point(Sampler& rng, std::size_t dims, const JobConfig& c) {
  AnsatzPoint p{std::vector<double>(dims), 0.0};
  for (double& x : p.x) x = rng.uniform(c.box_lo, c.box_hi);
  p.t = rng.uniform(c.t_min, c.t_max);
  return p;
}

double relative_geodesic_residual(const CurveJet& jet) {
  return affine_residual(jet).frobenius_norm() / (1.0 + jet.zdd.frobenius_norm());
}

// Tolerances used by verify and example.
constexpr double kGeodesicTol = 1e-9;
constexpr double kMssTol = 1e-8;
constexpr double kFdTol = 1e-5;
constexpr double kStiefelTol = 1e-10;

// ---------------------------------------------------------------------------
// Modes

ojson rotation_example(const JobConfig& c, bool& pass) {
  const EntirePair pair =
      build_odd_pair(BlockSpec(3, 2, {FrequencyBlock{0.5, Rational{1, 2}, {{0.0, 1.0}}}}));
  const ClosedFormGeodesic g = closed_form_build(pair.spectral, pair.b);

  double closed_err = 0.0, geo = 0.0;
  for (double t : linspace(c.t_min, c.t_max, c.t_samples)) {
    const CurveJet jet = closed_form_eval(g, t);
    const Mat explicit_z{{std::sin(t), -std::cos(t)}, {std::cos(t), std::sin(t)}};
    closed_err = std::max(closed_err, distance(jet.z, explicit_z));
    geo = std::max(geo, relative_geodesic_residual(jet));
  }

  Sampler rng(c.seed);
  double mss = 0.0, fd = 0.0, cone = 0.0;
  const auto curve = [&](double t) { return closed_form_eval(g, t).z; };
  for (int k = 0; k < c.points; ++k) {
    const AnsatzPoint p = random_point(rng, 2, c);
    const CurveJet jet = closed_form_eval(g, p.t);
    mss = std::max(mss, max_abs(mss_residual(jet, p)));
    fd = std::max(fd, max_abs(fd_oracle_residual(curve, p)));
    const std::vector<double> y = embed(jet, p);
    cone = std::max(cone, std::abs(y[0] * y[0] + y[1] * y[1] - y[3] * y[3] - y[4] * y[4]));
  }
  const PositivityReport pos = positivity_scan(pair.spectral, pair.b);

  ojson j;
  j["name"] = "rotation";
  j["spectral"] = spectral_json(pair.spectral);
  j["b"] = mat_json(pair.b);
  j["max_closed_form_error"] = closed_err;
  j["max_geodesic_residual"] = geo;
  j["points"] = c.points;
  j["max_mss_residual"] = mss;
  j["max_fd_oracle_residual"] = fd;
  j["max_cone_defect"] = cone;
  j["positivity_min_det"] = pos.min_det;
  const bool ok = closed_err < 1e-12 * c.t_samples && geo < kGeodesicTol && mss < 1e-10 &&
                  fd < kFdTol && pos.verdict == PositivityVerdict::entire_certified_on_interval;
  j["pass"] = ok;
  pass = pass && ok;
  return j;
}

ojson tan_example(bool& pass) {
  const SpectralBlock spec = SpectralBlock::from_rationals(2, 1, {{1, 1}});
  const double blow = *tan_blow_up_time(spec);
  double geo = 0.0;
  for (double t : linspace(-0.9 * blow, 0.9 * blow, 101)) {
    geo = std::max(geo, relative_geodesic_residual(tan_family_eval(spec, t)));
  }
  const PositivityReport pos = positivity_scan(spec, Mat(1, 1));
  const IntegrationRun run =
      integrate(Mat(1, 1), spec.lambda_tilde(), 2.0, 1e-4, Signature::euclidean, 1000);

  ojson j;
  j["name"] = "tan";
  j["spectral"] = spectral_json(spec);
  j["blow_up_time"] = blow;
  j["max_geodesic_residual"] = geo;
  j["positivity_min_det"] = pos.min_det;
  j["positivity_argmin_t"] = pos.argmin_t;
  j["rk4_status"] = run.status == RunStatus::blow_up ? "blow-up" : "no-blow-up";
  j["rk4_stop_t"] = run.stop_t;
  const bool ok = geo < kGeodesicTol && pos.verdict == PositivityVerdict::violation_found &&
                  run.status == RunStatus::blow_up && std::abs(run.stop_t - blow) < 1e-2;
  j["pass"] = ok;
  pass = pass && ok;
  return j;
}

JobOutcome run_example(const JobConfig& c, ojson& report) {
  bool pass = true;
  report["instances"] = ojson::array();
  if (c.which == "rotation" || c.which == "all") report["instances"].push_back(rotation_example(c, pass));
  if (c.which == "tan" || c.which == "all") report["instances"].push_back(tan_example(pass));
  JobOutcome out;
  out.exit_code = pass ? exit_code::ok : exit_code::verification_failed;
  out.summary = std::string("example: ") + (pass ? "all instances reproduced" : "instance check failed");
  return out;
}

JobOutcome run_solve(const JobConfig& c, ojson& report) {
  const EntirePair pair = resolve_pair(c);
  const ClosedFormGeodesic g = closed_form_build(pair.spectral, pair.b);
  report["spectral"] = spectral_json(pair.spectral);
  report["b"] = mat_json(pair.b);
  report["m_matrix"] = mat_json(g.msqrt_inv());
  report["n_matrix"] = mat_json(g.nsqrt_inv());
  report["initial_slope"] = mat_json(g.initial_slope());
  report["initial_velocity"] = mat_json(g.initial_velocity());
  ojson samples = ojson::array();
  for (double t : linspace(c.t_min, c.t_max, c.t_samples)) {
    const CurveJet jet = closed_form_eval(g, t);
    ojson s;
    s["t"] = t;
    s["z"] = mat_json(jet.z);
    s["zd"] = mat_json(jet.zd);
    s["zdd"] = mat_json(jet.zdd);
    samples.push_back(std::move(s));
  }
  report["samples"] = std::move(samples);
  return {exit_code::ok, "solve: " + std::to_string(c.t_samples) + " samples", {}};
}

JobOutcome run_verify(const JobConfig& c, ojson& report) {
  const EntirePair pair = resolve_pair(c);
  const ClosedFormGeodesic g = closed_form_build(pair.spectral, pair.b);

  double geo = 0.0, c1 = 0.0, c2 = 0.0, sres = 0.0, chart = 0.0;
  for (double t : linspace(c.t_min, c.t_max, c.t_samples)) {
    geo = std::max(geo, relative_geodesic_residual(closed_form_eval(g, t)));
    const FrameJet lift = g.lift(t);
    const StiefelResidual r = stiefel_residual(lift);
    c1 = std::max(c1, r.constraint1);
    c2 = std::max(c2, r.constraint2);
    sres = std::max(sres, r.res.frobenius_norm());
    chart = std::max(chart, distance(stiefel_to_affine(lift.frame, t), closed_form_eval(g, t).z) /
                                (1.0 + closed_form_eval(g, t).z.frobenius_norm()));
  }

  Sampler rng(c.seed);
  double mss = 0.0, fd_gap = 0.0, det_gap = 0.0;
  const auto curve = [&](double t) { return closed_form_eval(g, t).z; };
  for (int k = 0; k < c.points; ++k) {
    const AnsatzPoint p = random_point(rng, pair.spectral.rows(), c);
    const CurveJet jet = closed_form_eval(g, p.t);
    const std::vector<double> analytic = mss_residual(jet, p);
    const std::vector<double> oracle = fd_oracle_residual(curve, p);
    const std::vector<double> via_det = mss_residual_from_det_form(jet, p);
    mss = std::max(mss, max_abs(analytic));
    for (std::size_t a = 0; a < analytic.size(); ++a) {
      fd_gap = std::max(fd_gap, std::abs(analytic[a] - oracle[a]));
      det_gap = std::max(det_gap, std::abs(analytic[a] - via_det[a]));
    }
  }

  const bool ok = geo <= kGeodesicTol && mss <= kMssTol && fd_gap <= kFdTol && c1 <= kStiefelTol &&
                  c2 <= kStiefelTol && sres <= kStiefelTol;
  report["spectral"] = spectral_json(pair.spectral);
  report["b"] = mat_json(pair.b);
  report["t_samples"] = c.t_samples;
  report["points"] = c.points;
  report["max_geodesic_residual"] = geo;
  report["max_mss_residual"] = mss;
  report["max_fd_oracle_gap"] = fd_gap;
  report["max_det_form_gap"] = det_gap;
  report["max_stiefel_constraint1"] = c1;
  report["max_stiefel_constraint2"] = c2;
  report["max_stiefel_residual"] = sres;
  report["max_chart_transport_gap"] = chart;
  report["pass"] = ok;
  return {ok ? exit_code::ok : exit_code::verification_failed,
          std::string("verify: ") + (ok ? "pass" : "FAIL"), {}};
}

JobOutcome run_entire_check(const JobConfig& c, ojson& report) {
  const EntirePair pair = resolve_pair(c);
  const PositivityReport pos = positivity_scan(pair.spectral, pair.b, c.interval, c.grid_points);
  const bool ok = pos.verdict == PositivityVerdict::entire_certified_on_interval;
  report["spectral"] = spectral_json(pair.spectral);
  report["b"] = mat_json(pair.b);
  report["min_det"] = pos.min_det;
  report["argmin_t"] = pos.argmin_t;
  report["scanned_interval"] = {pos.scanned_interval.first, pos.scanned_interval.second};
  report["periodic"] = pos.periodic;
  report["grid_points"] = c.grid_points;
  report["verdict"] = ok ? "entire-certified" : "violation-found";
  return {ok ? exit_code::ok : exit_code::positivity_violation,
          std::string("entire-check: ") + (ok ? "entire-certified" : "violation-found"), {}};
}

JobOutcome run_integrate(const JobConfig& c, ojson& report) {
  const EntirePair pair = resolve_pair(c);
  const std::size_t rows = pair.spectral.rows(), cols = pair.spectral.cols();
  std::optional<ClosedFormGeodesic> closed;
  std::function<Mat(double)> reference;
  Mat z0(rows, cols), zd0(rows, cols);
  if (c.z0) {
    z0 = Mat(rows, cols, *c.z0);
    zd0 = Mat(rows, cols, *c.zd0);
  } else if (c.kind == Signature::euclidean) {
    closed = closed_form_build(pair.spectral, pair.b);
    z0 = closed->initial_slope();
    zd0 = closed->initial_velocity();
    reference = [&closed](double t) { return closed_form_eval(*closed, t).z; };
  } else {
    zd0 = pair.spectral.lambda_tilde();
    reference = [&pair](double t) { return tanh_family_eval(pair.spectral, t).z; };
  }

  const double span = c.t_max;
  const auto total_steps = static_cast<std::size_t>(std::ceil(span / c.step));
  const std::size_t every =
      std::max<std::size_t>(1, total_steps / static_cast<std::size_t>(std::max(1, c.t_samples - 1)));
  const IntegrationRun run = integrate(z0, zd0, span, c.step, c.kind, every);

  double err = 0.0, speed_drift = 0.0;
  const double speed0 = c.kind == Signature::euclidean ? geodesic_speed_squared(z0, zd0) : 0.0;
  for (const OdeSample& s : run.samples) {
    if (reference) {
      try {
        err = std::max(err, distance(s.z, reference(s.t)));
      } catch (const ChartBreakdown&) {
      }
    }
    if (c.kind == Signature::euclidean) {
      speed_drift = std::max(speed_drift, std::abs(geodesic_speed_squared(s.z, s.zd) - speed0));
    }
  }

  const char* status = run.status == RunStatus::completed
                           ? "completed"
                           : (run.status == RunStatus::blow_up ? "blow-up" : "chart-breakdown");
  report["kind"] = c.kind == Signature::euclidean ? "euclidean" : "lorentzian";
  report["step"] = c.step;
  report["t_end"] = span;
  report["status"] = status;
  report["stop_t"] = run.stop_t;
  report["recorded_samples"] = run.samples.size();
  report["final_z"] = mat_json(run.final().z);
  report["final_zd"] = mat_json(run.final().zd);
  if (reference) report["max_error_vs_closed_form"] = err;
  if (c.kind == Signature::euclidean) report["max_speed_drift"] = speed_drift;

  const int code = run.status == RunStatus::completed
                       ? exit_code::ok
                       : (run.status == RunStatus::blow_up ? exit_code::blow_up : exit_code::chart_breakdown);
  return {code, std::string("integrate: ") + status + " at t = " + format_double(run.stop_t), {}};
}

std::size_t coordinate_index(const std::string& name, int n, int m) {
  const auto bad = [&] { return ConfigError("projection: unknown coordinate '" + name + "'"); };
  if (name == "t") return static_cast<std::size_t>(n - 1);
  if (name.size() < 2 || (name[0] != 'x' && name[0] != 'y')) throw bad();
  std::int64_t k = 0;
  try {
    k = parse_int(std::string_view(name).substr(1));
  } catch (const ConfigError&) {
    throw bad();
  }
  if (name[0] == 'x' && k >= 1 && k <= n - 1) return static_cast<std::size_t>(k - 1);
  if (name[0] == 'y' && k >= 1 && k <= m) return static_cast<std::size_t>(n - 1 + k);
  throw bad();
}

JobOutcome run_export(const JobConfig& c, ojson& report) {
  const EntirePair pair = resolve_pair(c);
  const ClosedFormGeodesic g = closed_form_build(pair.spectral, pair.b);
  const int k = c.n - 1;
  const auto per_axis = static_cast<std::size_t>(c.grid);
  const std::vector<double> xs = linspace(c.box_lo, c.box_hi, c.grid);
  const std::vector<double> ts = linspace(c.t_min, c.t_max, c.grid);

  std::vector<CurveJet> jets;
  jets.reserve(ts.size());
  for (double t : ts) jets.push_back(closed_form_eval(g, t));

  std::ostringstream csv, obj;
  for (int i = 1; i <= k; ++i) csv << 'x' << i << ',';
  csv << 't';
  for (int a = 1; a <= c.m; ++a) csv << ",y" << a;
  csv << '\n';

  std::vector<std::size_t> proj;
  for (const std::string& name : c.projection) proj.push_back(coordinate_index(name, c.n, c.m));

  // Row-major over (i_1, ..., i_{n-1}, i_t), t fastest.
  std::size_t total = per_axis;
  for (int i = 0; i < k; ++i) total *= per_axis;
  std::vector<std::size_t> idx(static_cast<std::size_t>(k) + 1, 0);
  for (std::size_t row = 0; row < total; ++row) {
    std::size_t rem = row;
    for (std::size_t d = idx.size(); d-- > 0;) {
      idx[d] = rem % per_axis;
      rem /= per_axis;
    }
    AnsatzPoint p{std::vector<double>(static_cast<std::size_t>(k)), ts[idx.back()]};
    for (int i = 0; i < k; ++i) p.x[static_cast<std::size_t>(i)] = xs[idx[static_cast<std::size_t>(i)]];
    const std::vector<double> y = embed(jets[idx.back()], p);
    for (std::size_t i = 0; i < y.size(); ++i) csv << (i ? "," : "") << format_double(y[i]);
    csv << '\n';
    if (!proj.empty()) {
      obj << 'v';
      for (std::size_t pi : proj) obj << ' ' << format_double(y[pi]);
      obj << '\n';
    }
  }
  std::size_t faces = 0;
  if (!proj.empty() && c.faces) {
    // Quads over the (x2, t) grid of every x1 slice; OBJ indices are 1-based.
    const auto vid = [&](std::size_t i, std::size_t j, std::size_t l) {
      return (i * per_axis + j) * per_axis + l + 1;
    };
    for (std::size_t i = 0; i < per_axis; ++i)
      for (std::size_t j = 0; j + 1 < per_axis; ++j)
        for (std::size_t l = 0; l + 1 < per_axis; ++l) {
          obj << "f " << vid(i, j, l) << ' ' << vid(i, j + 1, l) << ' ' << vid(i, j + 1, l + 1) << ' '
              << vid(i, j, l + 1) << '\n';
          ++faces;
        }
  }

  JobOutcome out{exit_code::ok, "export: " + std::to_string(total) + " points", {}};
  out.artifacts["points.csv"] = csv.str();
  report["spectral"] = spectral_json(pair.spectral);
  report["b"] = mat_json(pair.b);
  report["grid"] = c.grid;
  report["rows"] = total;
  report["csv"] = "points.csv";
  if (!proj.empty()) {
    out.artifacts["points.obj"] = obj.str();
    report["obj"] = "points.obj";
    report["projection"] = c.projection;
    report["vertices"] = total;
    report["faces"] = faces;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view mode_name(JobMode mode) {
  switch (mode) {
    case JobMode::example: return "example";
    case JobMode::solve: return "solve";
    case JobMode::verify: return "verify";
    case JobMode::entire_check: return "entire-check";
    case JobMode::integrate: return "integrate";
    case JobMode::export_points: return "export";
  }
  return "unknown";
}

std::optional<JobMode> parse_mode(std::string_view name) {
  for (JobMode m : {JobMode::example, JobMode::solve, JobMode::verify, JobMode::entire_check,
                    JobMode::integrate, JobMode::export_points}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

LambdaValue parse_lambda(std::string_view text) {
  text = trim(text);
  if (const std::size_t slash = text.find('/'); slash != std::string_view::npos) {
    const Rational q{parse_int(trim(text.substr(0, slash))), parse_int(trim(text.substr(slash + 1)))};
    if (q.den == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return {q.value(), q};
  }
  if (text.find_first_of(".eE") == std::string_view::npos) {
    const std::int64_t v = parse_int(text);
    return {static_cast<double>(v), Rational{v, 1}};
  }
  return {parse_real(text), std::nullopt};
}

FrequencyBlock parse_block(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("block '" + std::string(text) + "' must look like lambda:a,b;a,b");
  }
  const LambdaValue l = parse_lambda(text.substr(0, colon));
  FrequencyBlock blk{l.value, l.exact, {}};
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const std::size_t semi = rest.find(';');
    const std::string_view cell = rest.substr(0, semi);
    const std::size_t comma = cell.find(',');
    if (comma == std::string_view::npos) throw ConfigError("cell '" + std::string(cell) + "' must be a,b");
    blk.cells.push_back({parse_real(trim(cell.substr(0, comma))), parse_real(trim(cell.substr(comma + 1)))});
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
  }
  return blk;
}

JobConfig parse_job_config(std::string_view text, std::string_view source) {
  ojson doc;
  try {
    doc = ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  const Anchor at{text, source};
  if (!doc.is_object()) throw ConfigError(std::string(source) + ":1: top level must be an object");
  if (!doc.contains("schema_version")) at.fail("schema_version", "missing");
  if (!doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != JobConfig::kSchemaVersion) {
    at.fail("schema_version", "unsupported version (expected 1)");
  }

  JobConfig c;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "schema_version") {
        continue;
      } else if (key == "mode") {
        const auto m = value.is_string() ? parse_mode(value.get<std::string>()) : std::nullopt;
        if (!m) throw ConfigError("unknown mode");
        c.mode = *m;
      } else if (key == "n") {
        c.n = int_from_json(value);
      } else if (key == "m") {
        c.m = int_from_json(value);
      } else if (key == "lambdas") {
        if (!value.is_array()) throw ConfigError("expected an array");
        for (const auto& l : value) c.lambdas.push_back(lambda_from_json(l));
      } else if (key == "blocks") {
        if (!value.is_array()) throw ConfigError("expected an array");
        for (const auto& b : value) c.blocks.push_back(block_from_json(b));
      } else if (key == "b") {
        c.b = reals_from_json(value);
      } else if (key == "z0") {
        c.z0 = reals_from_json(value);
      } else if (key == "zd0") {
        c.zd0 = reals_from_json(value);
      } else if (key == "t_range") {
        std::tie(c.t_min, c.t_max) = range_from_json(value);
      } else if (key == "t_samples") {
        c.t_samples = int_from_json(value);
      } else if (key == "box") {
        std::tie(c.box_lo, c.box_hi) = range_from_json(value);
      } else if (key == "points") {
        c.points = int_from_json(value);
      } else if (key == "grid") {
        c.grid = int_from_json(value);
      } else if (key == "projection") {
        if (!value.is_array()) throw ConfigError("expected an array of names");
        for (const auto& s : value) {
          if (!s.is_string()) throw ConfigError("expected an array of names");
          c.projection.push_back(s.get<std::string>());
        }
      } else if (key == "faces") {
        if (!value.is_boolean()) throw ConfigError("expected a boolean");
        c.faces = value.get<bool>();
      } else if (key == "step") {
        if (!value.is_number()) throw ConfigError("expected a number");
        c.step = value.get<double>();
      } else if (key == "kind") {
        const std::string k = value.is_string() ? value.get<std::string>() : "";
        if (k == "euclidean") {
          c.kind = Signature::euclidean;
        } else if (k == "lorentzian") {
          c.kind = Signature::lorentzian;
        } else {
          throw ConfigError("expected \"euclidean\" or \"lorentzian\"");
        }
      } else if (key == "which") {
        if (!value.is_string()) throw ConfigError("expected a string");
        c.which = value.get<std::string>();
      } else if (key == "grid_points") {
        c.grid_points = int_from_json(value);
      } else if (key == "interval") {
        c.interval = range_from_json(value);
      } else if (key == "seed") {
        if (!value.is_number_unsigned()) throw ConfigError("expected a non-negative integer");
        c.seed = value.get<std::uint64_t>();
      } else if (key == "out") {
        if (!value.is_string()) throw ConfigError("expected a string");
        c.out_dir = value.get<std::string>();
      } else if (key == "quiet") {
        if (!value.is_boolean()) throw ConfigError("expected a boolean");
        c.quiet = value.get<bool>();
      } else {
        throw ConfigError("unknown field");
      }
    } catch (const ConfigError& e) {
      at.fail(key, e.what());
    } catch (const nlohmann::json::exception& e) {
      at.fail(key, e.what());
    }
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(source) + ": " + e.what());
  }
  return c;
}

JobConfig load_job_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_job_config(buf.str(), path);
}

void validate(const JobConfig& c) {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.n < 2) fail("n must be >= 2");
  if (c.m < 1) fail("m must be >= 1");
  const auto cells = static_cast<std::size_t>((c.n - 1) * c.m);
  if (!c.blocks.empty() && (!c.lambdas.empty() || c.b)) {
    fail("give either 'blocks' or 'lambdas'/'b', not both");
  }
  if (c.b && c.b->size() != cells) {
    fail("b must have (n-1)*m = " + std::to_string(cells) + " entries");
  }
  if (c.z0.has_value() != c.zd0.has_value()) fail("z0 and zd0 must be given together");
  if (c.z0 && (c.z0->size() != cells || c.zd0->size() != cells)) {
    fail("z0 and zd0 must have (n-1)*m entries");
  }
  if (!(c.t_max > c.t_min) && c.mode != JobMode::integrate) fail("t_range must be increasing");
  if (c.mode == JobMode::integrate && !(c.t_max > 0.0)) fail("integrate needs t_range upper end > 0");
  if (c.t_samples < 2) fail("t_samples must be >= 2");
  if (!(c.box_hi > c.box_lo)) fail("box must be increasing");
  if (c.points < 1) fail("points must be >= 1");
  if (c.grid < 2) fail("grid must be >= 2");
  if (!(c.step > 0.0)) fail("step must be positive");
  if (c.grid_points < kMinScanPoints) fail("grid_points must be >= 16");
  if (c.interval && !(c.interval->second > c.interval->first)) fail("interval must be increasing");
  if (c.which != "rotation" && c.which != "tan" && c.which != "all") {
    fail("which must be rotation, tan or all");
  }
  if (!c.projection.empty()) {
    if (c.projection.size() != 3) fail("projection needs exactly three coordinate names");
    for (const std::string& name : c.projection) coordinate_index(name, c.n, c.m);
  }
  if (c.faces && (c.projection.empty() || c.n != 3)) {
    fail("faces require a projection and n = 3");
  }
  if (c.mode == JobMode::entire_check && !c.interval) {
    const bool exact_blocks = !c.blocks.empty() &&
                              std::all_of(c.blocks.begin(), c.blocks.end(),
                                          [](const FrequencyBlock& b) { return b.exact.has_value(); });
    const bool exact_lambdas = c.blocks.empty() &&
                               std::all_of(c.lambdas.begin(), c.lambdas.end(),
                                           [](const LambdaValue& l) { return l.exact.has_value(); });
    if (!exact_blocks && !exact_lambdas) {
      fail("entire-check without an interval needs rational lambdas (p/q)");
    }
  }
  if (c.mode == JobMode::integrate && c.kind == Signature::lorentzian && !c.z0 && c.b &&
      std::any_of(c.b->begin(), c.b->end(), [](double v) { return v != 0.0; })) {
    fail("lorentzian integrate starts from Z(0) = 0; give z0/zd0 explicitly instead of b");
  }
}

JobOutcome run_job(const JobConfig& config) {
  ojson report;
  report["schema_version"] = JobConfig::kSchemaVersion;
  report["mode"] = mode_name(config.mode);
  report["n"] = config.n;
  report["m"] = config.m;
  report["seed"] = config.seed;

  JobOutcome out;
  try {
    validate(config);
    switch (config.mode) {
      case JobMode::example: out = run_example(config, report); break;
      case JobMode::solve: out = run_solve(config, report); break;
      case JobMode::verify: out = run_verify(config, report); break;
      case JobMode::entire_check: out = run_entire_check(config, report); break;
      case JobMode::integrate: out = run_integrate(config, report); break;
      case JobMode::export_points: out = run_export(config, report); break;
    }
    report["status"] = out.exit_code == exit_code::ok ? "ok" : "failed";
  } catch (const ChartBreakdown& e) {
    out = {exit_code::chart_breakdown, std::string("chart breakdown: ") + e.what(), {}};
    report["status"] = "chart-breakdown";
    report["error"] = e.what();
    report["t"] = e.t();
  } catch (const SpacelikeBreakdown& e) {
    out = {exit_code::chart_breakdown, std::string("spacelike breakdown: ") + e.what(), {}};
    report["status"] = "chart-breakdown";
    report["error"] = e.what();
    report["t"] = e.t();
  } catch (const InvalidArgument& e) {
    out = {exit_code::config_error, std::string("config error: ") + e.what(), {}};
    report["status"] = "config-error";
    report["error"] = e.what();
  } catch (const Error& e) {
    out = {exit_code::verification_failed, std::string("error: ") + e.what(), {}};
    report["status"] = "error";
    report["error"] = e.what();
  }
  out.artifacts["report.json"] = report.dump(2) + "\n";
  return out;
}

JobOutcome run_and_write(const JobConfig& config) {
  JobOutcome out = run_job(config);
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  for (const auto& [name, contents] : out.artifacts) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / name).string());
    f << contents;
  }
  return out;
}

}  // namespace evplane
