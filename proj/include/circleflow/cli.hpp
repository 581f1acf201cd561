// Copyright 2026 The circleflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command-line driver: check, solve, layout and rate over instance files.
//
// Exit codes: 0 success, 1 usage, 2 parse or validation failure, 3 target not
// attainable, 4 solver did not converge, 5 layout failure.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "circleflow/conditions.hpp"
#include "circleflow/error.hpp"
#include "circleflow/io.hpp"
#include "circleflow/layout.hpp"
#include "circleflow/solver.hpp"

namespace circleflow::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvalid = 2,
  kNotAttainable = 3,
  kNotConverged = 4,
  kLayoutFailed = 5,
};

struct Overrides {
  std::optional<std::string> geometry;
  std::optional<std::string> method;
  std::optional<double> tolerance;
  std::optional<long> max_steps;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ValidationError, "cannot write " + path);
  out << text;
}

inline unsigned thread_count() {
  if (const char* env = std::getenv("CIRCLEFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline ProblemInstance load(const std::string& path, const Overrides& o) {
  ProblemInstance inst = parse_instance(read_file(path));
  if (o.geometry) inst.geometry = parse_geometry(*o.geometry);
  if (o.method) inst.method = *o.method == "flow" ? Method::Flow : Method::Newton;
  if (o.tolerance) {
    if (!(*o.tolerance > 0.0)) throw Error(ErrorCode::ValidationError, "--tol must be positive");
    inst.tolerance = *o.tolerance;
  }
  if (o.max_steps) {
    if (*o.max_steps <= 0) throw Error(ErrorCode::ValidationError, "--max-steps must be positive");
    inst.max_steps = *o.max_steps;
  }
  inst.target();  // mean target needs euclidean geometry
  return inst;
}

inline void print_subset(std::ostream& os, const std::vector<int>& subset, int n) {
  if (static_cast<int>(subset.size()) == n) {
    os << "A=V";
    return;
  }
  os << "A={";
  for (std::size_t i = 0; i < subset.size(); ++i) os << (i ? "," : "") << subset[i];
  os << '}';
}

struct CheckResult {
  bool c1_ok = true;
  AttainabilityReport report;
};

inline CheckResult check(const ProblemInstance& inst, std::ostream& out) {
  CheckResult res;
  const auto theta = inst.theta();
  const auto c1 = check_c1(inst.surface, theta);
  res.c1_ok = c1.empty();
  out << "surface: " << inst.surface.num_vertices() << " vertices, " << inst.surface.num_edges() << " edges, "
      << inst.surface.num_faces() << " faces, chi = " << inst.surface.euler_characteristic() << '\n';
  out << "geometry: " << to_string(inst.geometry) << ", target: " << to_string(inst.target_mode) << '\n';
  if (!res.c1_ok) {
    out << "angle condition: FAILED on " << c1.size() << " triangle(s), first is " << c1.front().triangle << '\n';
    return res;
  }
  out << "angle condition: ok\n";
  AttainabilityOptions opts;
  opts.threads = thread_count();
  res.report = attainability(inst.surface, theta, inst.target(), opts);
  const auto& r = res.report;
  out << "gauss-bonnet: " << (r.target.gauss_bonnet_ok ? "ok" : "FAILED") << " (sum k = " << std::setprecision(17)
      << r.target.sum << ", 2*pi*chi = " << r.target.gauss_bonnet_value << ")\n";
  out << "curvature bounds: " << (r.target.bounds_ok ? "ok" : "FAILED") << '\n';
  out << "subsets checked: " << r.subsets_checked << (r.exhaustive ? " (exhaustive)" : " (restricted family)") << '\n';
  for (const auto& v : r.violations) {
    out << "  violation ";
    print_subset(out, v.subset, inst.surface.num_vertices());
    if (v.kind == ViolationKind::GaussBonnet) out << " gauss-bonnet";
    if (v.kind == ViolationKind::CurvatureBound) out << " curvature-bound";
    out << ": lhs = " << v.lhs << ", rhs = " << v.rhs << ", slack = " << v.slack
        << (v.borderline ? " (borderline)" : "") << '\n';
  }
  out << "verdict: " << to_string(r.verdict) << '\n';
  return res;
}

inline SolveReport solve(const ProblemInstance& inst) {
  const auto theta = inst.theta();
  const auto target = inst.target();
  if (inst.method == Method::Flow) {
    FlowSpec spec = FlowSpec::for_target(target);
    if (inst.target_mode == TargetMode::Mean) spec.normalization = Normalization::MeanCurvature;
    spec.tolerance = inst.tolerance;
    spec.max_steps = inst.max_steps;
    return integrate_flow(inst.surface, theta, inst.start_radii(), spec);
  }
  NewtonOptions opts;
  opts.tolerance = inst.tolerance;
  opts.max_iterations = static_cast<int>(std::min<long>(inst.max_steps, 1000000));
  return newton_solve(inst.surface, theta, inst.start_radii(), target, opts);
}

inline std::optional<RateFit> try_rate(const SolveReport& report) {
  try {
    return fit_rate(report);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Runs one invocation; args excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Circle pattern solver for prescribed vertex curvatures", "circleflow"};
  app.require_subcommand(1);
  Overrides o;
  std::string instance_path;
  std::string out_path;
  std::string solution_path;
  bool force = false;
  bool overlay = false;

  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("instance", instance_path, "instance file")->required();
    sub->add_option("--geometry", o.geometry, "override geometry")->check(CLI::IsMember({"euclidean", "hyperbolic"}));
    sub->add_option("--method", o.method, "solver method")->check(CLI::IsMember({"flow", "newton"}));
    sub->add_option("--tol", o.tolerance, "residual tolerance");
    sub->add_option("--max-steps", o.max_steps, "step or iteration limit");
  };

  CLI::App* check_cmd = app.add_subcommand("check", "report angle condition, Gauss-Bonnet and attainability");
  add_overrides(check_cmd);
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve for radii and write a solution report");
  add_overrides(solve_cmd);
  solve_cmd->add_flag("--force", force, "solve even if the target is not attainable");
  solve_cmd->add_option("--out", out_path, "solution file (default stdout)");
  CLI::App* layout_cmd = app.add_subcommand("layout", "develop a disk-type solution and write SVG");
  add_overrides(layout_cmd);
  layout_cmd->add_option("--solution", solution_path, "solution file to develop instead of solving");
  layout_cmd->add_flag("--overlay", overlay, "draw the triangulation");
  layout_cmd->add_flag("--force", force, "solve even if the target is not attainable");
  layout_cmd->add_option("--out", out_path, "SVG file (default stdout)");
  CLI::App* rate_cmd = app.add_subcommand("rate", "fit the exponential decay rate of a stored residual history");
  rate_cmd->add_option("solution", solution_path, "solution file")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  auto emit = [&](const std::string& text) {
    if (out_path.empty()) {
      out << text;
    } else {
      detail::write_file(out_path, text);
    }
  };

  try {
    if (*rate_cmd) {
      const auto rec = parse_solution(detail::read_file(solution_path));
      try {
        const auto fit = fit_rate(rec.times, rec.residuals);
        out << std::setprecision(17) << "rate " << fit.rate << "\nr_squared " << fit.r_squared << "\nsamples "
            << fit.samples << '\n';
      } catch (const Error& e) {
        err << e.what() << '\n';
        return kNotConverged;
      }
      return kOk;
    }

    const ProblemInstance inst = detail::load(instance_path, o);

    if (*check_cmd) {
      const auto res = detail::check(inst, out);
      if (!res.c1_ok) return kInvalid;
      return res.report.attainable() ? kOk : kNotAttainable;
    }

    std::optional<Verdict> verdict;
    std::optional<SolveReport> report;
    if (*solve_cmd || solution_path.empty()) {
      std::ostringstream log;
      const auto res = detail::check(inst, log);
      if (!res.c1_ok) {
        err << log.str();
        return kInvalid;
      }
      verdict = res.report.verdict;
      if (!res.report.attainable() && !force) {
        err << log.str() << "refusing to solve a target that is not attainable (use --force)\n";
        return kNotAttainable;
      }
      report = detail::solve(inst);
    }

    if (*solve_cmd) {
      SolutionExtras extras{verdict, detail::try_rate(*report), nullptr};
      emit(write_solution(*report, extras));
      if (!report->converged()) {
        err << "solver stopped: " << to_string(report->status) << ' ' << report->message << '\n';
        return kNotConverged;
      }
      return kOk;
    }

    // layout
    RadiusVector radii;
    Geometry geometry = inst.geometry;
    if (!solution_path.empty()) {
      const auto rec = parse_solution(detail::read_file(solution_path));
      if (rec.radii.size() != inst.surface.num_vertices()) {
        throw Error(ErrorCode::ValidationError, "solution radii do not match the instance");
      }
      radii = rec.radii;
      geometry = rec.geometry;
    } else {
      if (!report->converged()) {
        err << "solver stopped: " << to_string(report->status) << ' ' << report->message << '\n';
        return kNotConverged;
      }
      radii = report->r;
    }
    EmbeddedPattern pattern;
    try {
      pattern = develop(inst.surface, inst.theta(), radii, geometry);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotDiskType || e.code() == ErrorCode::NonflatInterior ||
          e.code() == ErrorCode::NumericalDegeneracy) {
        err << e.what() << '\n';
        return kLayoutFailed;
      }
      throw;
    }
    if (pattern.overlap) err << "warning: developed triangles overlap\n";
    SvgOptions svg;
    svg.overlay = overlay;
    emit(render_svg(pattern, svg));
    return kOk;
  } catch (const Error& e) {
    err << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::NotDiskType:
      case ErrorCode::NonflatInterior: return kLayoutFailed;
      case ErrorCode::NumericalDegeneracy:
      case ErrorCode::DomainViolation: return kNotConverged;
      default: return kInvalid;
    }
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args), out, err);
}

}  // namespace circleflow::cli
