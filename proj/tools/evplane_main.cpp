// evplane: command-line front end for the evolving-plane library.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evplane/jobs.hpp"

namespace {

using evplane::JobConfig;
using evplane::JobMode;

// Values as typed on the command line; applied on top of a --config file.
struct Flags {
  std::string config;
  int n = 0, m = 0;
  std::vector<std::string> lambdas;
  std::vector<std::string> blocks;
  std::vector<double> b, z0, zd0;
  std::vector<double> t_range, box, interval;
  int t_samples = 0, points = 0, grid = 0, grid_points = 0;
  std::vector<std::string> projection;
  bool faces = false;
  double step = 0.0;
  std::string kind, which;
  std::uint64_t seed = 0;
  std::string out;
  bool quiet = false;
};

struct Options {
  CLI::App* cmd;
  JobMode mode;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON job file (schema_version 1)");
  app.add_option("--n", f.n, "ambient x-dimension n (slopes are (n-1) x m)");
  app.add_option("--m", f.m, "codimension m");
  app.add_option("--lambdas", f.lambdas, "frequencies, e.g. 1/2 1 or 0.7")->delimiter(',');
  app.add_option("--block", f.blocks, "frequency block lambda:a,b;a,b (repeatable)");
  app.add_option("--b", f.b, "row-major B entries")->delimiter(',');
  app.add_option("--z0", f.z0, "integrate: row-major initial slope")->delimiter(',');
  app.add_option("--zd0", f.zd0, "integrate: row-major initial velocity")->delimiter(',');
  app.add_option("--t-range", f.t_range, "t interval: lo hi")->expected(2)->delimiter(',');
  app.add_option("--t-samples", f.t_samples, "number of t samples");
  app.add_option("--box", f.box, "x box: lo hi")->expected(2)->delimiter(',');
  app.add_option("--points", f.points, "random sample points");
  app.add_option("--grid", f.grid, "export: samples per axis");
  app.add_option("--projection", f.projection, "export: three coordinates for OBJ, e.g. x1 x2 y1")
      ->expected(3)
      ->delimiter(',');
  app.add_flag("--faces", f.faces, "export: add quad faces to the OBJ");
  app.add_option("--step", f.step, "integrate: RK4 step");
  app.add_option("--kind", f.kind, "integrate: euclidean | lorentzian");
  app.add_option("--which", f.which, "example: rotation | tan | all");
  app.add_option("--grid-points", f.grid_points, "entire-check: scan grid size");
  app.add_option("--interval", f.interval, "entire-check: scan interval lo hi")->expected(2)->delimiter(',');
  app.add_option("--seed", f.seed, "seed for random sampling");
  app.add_option("--out", f.out, "output directory");
  app.add_flag("--quiet", f.quiet, "suppress the summary line");
}

JobConfig build_config(const CLI::App& cmd, const Flags& f, JobMode mode) {
  JobConfig c = f.config.empty() ? JobConfig{} : evplane::load_job_config(f.config);
  c.mode = mode;
  const auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--n")) c.n = f.n;
  if (given("--m")) c.m = f.m;
  if (given("--lambdas")) {
    c.lambdas.clear();
    for (const auto& s : f.lambdas) c.lambdas.push_back(evplane::parse_lambda(s));
  }
  if (given("--block")) {
    c.blocks.clear();
    for (const auto& s : f.blocks) c.blocks.push_back(evplane::parse_block(s));
  }
  if (given("--b")) c.b = f.b;
  if (given("--z0")) c.z0 = f.z0;
  if (given("--zd0")) c.zd0 = f.zd0;
  if (given("--t-range")) {
    c.t_min = f.t_range.at(0);
    c.t_max = f.t_range.at(1);
  }
  if (given("--t-samples")) c.t_samples = f.t_samples;
  if (given("--box")) {
    c.box_lo = f.box.at(0);
    c.box_hi = f.box.at(1);
  }
  if (given("--points")) c.points = f.points;
  if (given("--grid")) c.grid = f.grid;
  if (given("--projection")) c.projection = f.projection;
  if (given("--faces")) c.faces = f.faces;
  if (given("--step")) c.step = f.step;
  if (given("--kind")) {
    if (f.kind == "euclidean") {
      c.kind = evplane::Signature::euclidean;
    } else if (f.kind == "lorentzian") {
      c.kind = evplane::Signature::lorentzian;
    } else {
      throw evplane::ConfigError("--kind: expected euclidean or lorentzian");
    }
  }
  if (given("--which")) c.which = f.which;
  if (given("--grid-points")) c.grid_points = f.grid_points;
  if (given("--interval")) c.interval = std::pair{f.interval.at(0), f.interval.at(1)};
  if (given("--seed")) c.seed = f.seed;
  if (given("--out")) c.out_dir = f.out;
  if (given("--quiet")) c.quiet = f.quiet;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grassmannian geodesics and the entire minimal graphs they sweep out"};
  app.require_subcommand(1);

  Flags flags;
  std::vector<Options> modes;
  for (JobMode mode : {JobMode::example, JobMode::solve, JobMode::verify, JobMode::entire_check,
                       JobMode::integrate, JobMode::export_points}) {
    CLI::App* cmd = app.add_subcommand(std::string(evplane::mode_name(mode)));
    add_flags(*cmd, flags);
    modes.push_back({cmd, mode});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : evplane::exit_code::config_error;
  }

  for (const Options& o : modes) {
    if (!o.cmd->parsed()) continue;
    try {
      const JobConfig config = build_config(*o.cmd, flags, o.mode);
      const evplane::JobOutcome out = evplane::run_and_write(config);
      if (!config.quiet || out.exit_code != evplane::exit_code::ok) {
        (out.exit_code == evplane::exit_code::ok ? std::cout : std::cerr) << out.summary << '\n';
      }
      return out.exit_code;
    } catch (const evplane::InvalidArgument& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return evplane::exit_code::config_error;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return evplane::exit_code::verification_failed;
    }
  }
  return evplane::exit_code::config_error;
}
