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

// JSON problem instances and solution reports. The grammar is documented in
// docs/instance_format.md.

#include <charconv>
#include <cmath>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "circleflow/circle_geometry.hpp"
#include "circleflow/conditions.hpp"
#include "circleflow/curvature.hpp"
#include "circleflow/error.hpp"
#include "circleflow/layout.hpp"
#include "circleflow/mesh.hpp"
#include "circleflow/solver.hpp"

namespace circleflow {

enum class TargetMode { Zero, Mean, Explicit, BoundaryPhi };
enum class Method { Flow, Newton };

constexpr std::string_view to_string(TargetMode m) {
  switch (m) {
    case TargetMode::Zero: return "zero";
    case TargetMode::Mean: return "mean";
    case TargetMode::Explicit: return "explicit";
    case TargetMode::BoundaryPhi: return "boundary-phi";
  }
  return "unknown";
}

constexpr std::string_view to_string(Method m) { return m == Method::Flow ? "flow" : "newton"; }

struct ProblemInstance {
  Geometry geometry = Geometry::Euclidean;
  TriangulatedSurface surface;
  std::vector<double> theta_values;  // per surface edge
  TargetMode target_mode = TargetMode::Zero;
  Eigen::VectorXd target_values;     // k (explicit) or φ per vertex (boundary-phi); empty otherwise
  std::optional<RadiusVector> initial_radii;
  Method method = Method::Newton;
  double tolerance = 1e-10;
  long max_steps = 100000;

  AngleAssignment theta() const { return AngleAssignment(surface, theta_values); }
  RadiusVector start_radii() const { return initial_radii ? *initial_radii : default_radii(surface); }

  /// The target in the given geometry; mean is Euclidean only.
  CurvatureTarget target_in(Geometry g) const {
    switch (target_mode) {
      case TargetMode::Zero: return CurvatureTarget::zero(surface, g);
      case TargetMode::Mean:
        if (g != Geometry::Euclidean) throw Error(ErrorCode::ValidationError, "target mode mean requires euclidean geometry");
        return CurvatureTarget::mean(surface);
      case TargetMode::Explicit: return {g, target_values};
      case TargetMode::BoundaryPhi:
        try {
          return CurvatureTarget::boundary_phi(surface, g, target_values);
        } catch (const Error& e) {
          throw Error(ErrorCode::ValidationError, e.what());
        }
    }
    throw Error(ErrorCode::ValidationError, "unknown target mode");
  }
  CurvatureTarget target() const { return target_in(geometry); }
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& message) { throw Error(ErrorCode::ValidationError, message); }

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
  if (!obj.is_object()) invalid(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) invalid("unknown field '" + key + "' in " + where);
  }
}

/// Radians as a number, or a literal "pi", "pi/4", "2pi/3", "2*pi/3", "0".
inline double parse_angle(const nlohmann::json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) invalid(where + ": angle must be a number or a pi fraction");
  static const std::regex pattern(R"(^\s*(?:(\d+(?:\.\d+)?)\s*\*?\s*)?pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$)");
  const std::string text = v.get<std::string>();
  std::smatch m;
  if (std::regex_match(text, m, pattern)) {
    const double num = m[1].matched ? std::stod(m[1].str()) : 1.0;
    const double den = m[2].matched ? std::stod(m[2].str()) : 1.0;
    if (den == 0.0) invalid(where + ": zero denominator in '" + text + "'");
    return num * kPi / den;
  }
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec == std::errc() && res.ptr == text.data() + text.size()) return value;
  invalid(where + ": cannot read angle '" + text + "'");
}

inline int parse_vertex(std::string_view text, const std::string& where) {
  int v = -1;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v < 0) {
    invalid(where + ": '" + std::string(text) + "' is not a vertex index");
  }
  return v;
}

inline Geometry parse_geometry(const std::string& text) {
  if (text == "euclidean") return Geometry::Euclidean;
  if (text == "hyperbolic") return Geometry::Hyperbolic;
  invalid("geometry must be 'euclidean' or 'hyperbolic', got '" + text + "'");
}

inline nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace detail

inline Geometry parse_geometry(const std::string& text) { return detail::parse_geometry(text); }

/// Parses and validates a problem instance.
inline ProblemInstance parse_instance(std::string_view text) {
  const nlohmann::json doc = detail::parse_json(text);
  detail::reject_unknown(doc, {"geometry", "triangles", "theta", "target", "initial_radii", "solver"}, "instance");
  for (const char* key : {"geometry", "triangles", "theta", "target"}) {
    if (!doc.contains(key)) detail::invalid(std::string("missing required field '") + key + "'");
  }

  ProblemInstance inst;
  if (!doc["geometry"].is_string()) detail::invalid("geometry must be a string");
  inst.geometry = detail::parse_geometry(doc["geometry"].get<std::string>());

  std::vector<Triangle> triangles;
  if (!doc["triangles"].is_array()) detail::invalid("triangles must be an array");
  for (const auto& t : doc["triangles"]) {
    if (!t.is_array() || t.size() != 3 || !std::all_of(t.begin(), t.end(), [](const auto& x) { return x.is_number_integer(); })) {
      detail::invalid("each triangle must be an array of three integers");
    }
    triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
  }
  try {
    inst.surface = TriangulatedSurface::build(std::move(triangles));
  } catch (const Error& e) {
    detail::invalid(std::string("triangles: ") + e.what());
  }
  const auto& S = inst.surface;
  const int nv = S.num_vertices();

  // theta
  const auto& th = doc["theta"];
  if (!th.is_object()) detail::invalid("theta must be an object keyed by \"i-j\"");
  std::vector<char> seen(static_cast<std::size_t>(S.num_edges()), 0);
  inst.theta_values.assign(static_cast<std::size_t>(S.num_edges()), 0.0);
  for (const auto& [key, value] : th.items()) {
    const auto dash = key.find('-');
    if (dash == std::string::npos) detail::invalid("theta key '" + key + "' is not of the form i-j");
    const int a = detail::parse_vertex(std::string_view(key).substr(0, dash), "theta key '" + key + "'");
    const int b = detail::parse_vertex(std::string_view(key).substr(dash + 1), "theta key '" + key + "'");
    if (!(a < b)) detail::invalid("theta key '" + key + "' must have i < j");
    const int e = (a < nv && b < nv) ? S.find_edge(a, b) : -1;
    if (e < 0) detail::invalid("theta given for " + key + ", which is not an edge");
    const double angle = detail::parse_angle(value, "theta " + key);
    if (!(angle >= 0.0 && angle < kPi)) detail::invalid("theta " + key + " must lie in [0, pi)");
    inst.theta_values[static_cast<std::size_t>(e)] = angle;
    seen[static_cast<std::size_t>(e)] = 1;
  }
  for (int e = 0; e < S.num_edges(); ++e) {
    if (!seen[static_cast<std::size_t>(e)]) {
      detail::invalid("missing theta for edge " + std::to_string(S.edge(e).a) + "-" + std::to_string(S.edge(e).b));
    }
  }

  // target
  const auto& tg = doc["target"];
  detail::reject_unknown(tg, {"mode", "k", "phi"}, "target");
  if (!tg.contains("mode") || !tg["mode"].is_string()) detail::invalid("target.mode is required");
  const std::string mode = tg["mode"].get<std::string>();
  auto forbid = [&](const char* field) {
    if (tg.contains(field)) detail::invalid(std::string("target.") + field + " is not used by mode " + mode);
  };
  if (mode == "zero") {
    inst.target_mode = TargetMode::Zero;
    forbid("k");
    forbid("phi");
  } else if (mode == "mean") {
    inst.target_mode = TargetMode::Mean;
    forbid("k");
    forbid("phi");
  } else if (mode == "explicit") {
    inst.target_mode = TargetMode::Explicit;
    forbid("phi");
    if (!tg.contains("k") || !tg["k"].is_array()) detail::invalid("target.k must be an array");
    if (static_cast<int>(tg["k"].size()) != nv) {
      detail::invalid("target.k has " + std::to_string(tg["k"].size()) + " entries for " + std::to_string(nv) + " vertices");
    }
    inst.target_values.resize(nv);
    for (int v = 0; v < nv; ++v) inst.target_values[v] = detail::parse_angle(tg["k"][static_cast<std::size_t>(v)], "target.k[" + std::to_string(v) + "]");
  } else if (mode == "boundary-phi") {
    inst.target_mode = TargetMode::BoundaryPhi;
    forbid("k");
    if (!S.has_boundary()) detail::invalid("target mode boundary-phi needs boundary vertices; the surface is closed");
    inst.target_values = Eigen::VectorXd::Zero(nv);
    if (tg.contains("phi")) {
      if (!tg["phi"].is_object()) detail::invalid("target.phi must be an object keyed by vertex");
      for (const auto& [key, value] : tg["phi"].items()) {
        const int v = detail::parse_vertex(key, "target.phi key");
        if (v >= nv) detail::invalid("target.phi names vertex " + key + ", which does not exist");
        if (!S.is_boundary_vertex(v)) detail::invalid("target.phi names interior vertex " + key);
        const double phi = detail::parse_angle(value, "target.phi " + key);
        if (!(phi >= 0.0 && phi < kPi)) detail::invalid("target.phi " + key + " must lie in [0, pi)");
        inst.target_values[v] = phi;
      }
    }
  } else {
    detail::invalid("unknown target mode '" + mode + "'");
  }
  inst.target();  // geometry consistency

  if (doc.contains("initial_radii")) {
    const auto& r = doc["initial_radii"];
    if (!r.is_array() || static_cast<int>(r.size()) != nv) {
      detail::invalid("initial_radii must be an array of " + std::to_string(nv) + " numbers");
    }
    RadiusVector r0(nv);
    for (int v = 0; v < nv; ++v) {
      const auto& x = r[static_cast<std::size_t>(v)];
      if (!x.is_number() || !(x.get<double>() > 0.0) || !std::isfinite(x.get<double>())) {
        detail::invalid("initial_radii[" + std::to_string(v) + "] must be a positive number");
      }
      r0[v] = x.get<double>();
    }
    inst.initial_radii = r0;
  }

  if (doc.contains("solver")) {
    const auto& sv = doc["solver"];
    detail::reject_unknown(sv, {"method", "tolerance", "max_steps"}, "solver");
    if (sv.contains("method")) {
      const auto m = sv["method"].is_string() ? sv["method"].get<std::string>() : std::string();
      if (m == "flow") {
        inst.method = Method::Flow;
      } else if (m == "newton") {
        inst.method = Method::Newton;
      } else {
        detail::invalid("solver.method must be 'flow' or 'newton'");
      }
    }
    if (sv.contains("tolerance")) {
      if (!sv["tolerance"].is_number() || !(sv["tolerance"].get<double>() > 0.0)) {
        detail::invalid("solver.tolerance must be a positive number");
      }
      inst.tolerance = sv["tolerance"].get<double>();
    }
    if (sv.contains("max_steps")) {
      if (!sv["max_steps"].is_number_integer() || sv["max_steps"].get<long>() <= 0) {
        detail::invalid("solver.max_steps must be a positive integer");
      }
      inst.max_steps = sv["max_steps"].get<long>();
    }
  }
  return inst;
}

/// Serializes an instance; parse_instance(write_instance(x)) reproduces x.
inline std::string write_instance(const ProblemInstance& inst) {
  nlohmann::json doc;
  doc["geometry"] = to_string(inst.geometry);
  doc["triangles"] = nlohmann::json::array();
  for (const auto& t : inst.surface.triangles()) doc["triangles"].push_back({t[0], t[1], t[2]});
  doc["theta"] = nlohmann::json::object();
  for (int e = 0; e < inst.surface.num_edges(); ++e) {
    const auto& edge = inst.surface.edge(e);
    doc["theta"][std::to_string(edge.a) + "-" + std::to_string(edge.b)] = inst.theta_values[static_cast<std::size_t>(e)];
  }
  nlohmann::json target{{"mode", to_string(inst.target_mode)}};
  if (inst.target_mode == TargetMode::Explicit) {
    target["k"] = std::vector<double>(inst.target_values.data(), inst.target_values.data() + inst.target_values.size());
  } else if (inst.target_mode == TargetMode::BoundaryPhi) {
    target["phi"] = nlohmann::json::object();
    for (int v : inst.surface.boundary_vertices()) {
      if (inst.target_values[v] != 0.0) target["phi"][std::to_string(v)] = inst.target_values[v];
    }
  }
  doc["target"] = target;
  if (inst.initial_radii) {
    doc["initial_radii"] = std::vector<double>(inst.initial_radii->data(), inst.initial_radii->data() + inst.initial_radii->size());
  }
  doc["solver"] = {{"method", to_string(inst.method)}, {"tolerance", inst.tolerance}, {"max_steps", inst.max_steps}};
  return doc.dump(2) + "\n";
}

/// Summary fields written next to a solve report.
struct SolutionExtras {
  std::optional<Verdict> verdict;
  std::optional<RateFit> rate;
  const EmbeddedPattern* pattern = nullptr;
};

/// Status string: solver status, or "not-attainable-suspected" for a failed
/// run on a target that the subset check rejects.
inline std::string solution_status(const SolveReport& report, std::optional<Verdict> verdict) {
  if (!report.converged() && verdict && *verdict != Verdict::Attainable) return "not-attainable-suspected";
  return std::string(to_string(report.status));
}

inline std::string write_solution(const SolveReport& report, const SolutionExtras& extras = {}) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json doc;
  doc["status"] = solution_status(report, extras.verdict);
  doc["solver_status"] = to_string(report.status);
  doc["geometry"] = to_string(report.geometry);
  doc["iterations"] = report.iterations;
  doc["rejected_steps"] = report.rejected_steps;
  doc["residual"] = report.final_residual();
  doc["radii"] = vec(report.r);
  doc["u"] = vec(report.u);
  doc["curvature"] = vec(report.curvature);
  doc["target"] = vec(report.target);
  doc["conserved_drift"] = report.conserved_drift;
  doc["history"] = {{"time", report.times}, {"residual", report.residuals}};
  doc["rate"] = extras.rate ? nlohmann::json(extras.rate->rate) : nlohmann::json(nullptr);
  if (extras.rate) doc["rate_r_squared"] = extras.rate->r_squared;
  doc["verdict"] = extras.verdict ? nlohmann::json(to_string(*extras.verdict)) : nlohmann::json(nullptr);
  if (!report.message.empty()) doc["message"] = report.message;
  if (extras.pattern != nullptr) {
    nlohmann::json centers = nlohmann::json::array();
    for (const auto& z : extras.pattern->centers) centers.push_back({z.real(), z.imag()});
    doc["layout"] = {{"centers", centers},
                     {"closure_error", extras.pattern->max_closure_error},
                     {"overlap", extras.pattern->overlap}};
  }
  return doc.dump(2) + "\n";
}

/// The fields of a solution document that other commands consume.
struct SolutionRecord {
  std::string status;
  Geometry geometry = Geometry::Euclidean;
  RadiusVector radii;
  Eigen::VectorXd curvature;
  double residual = 0.0;
  std::vector<double> times;
  std::vector<double> residuals;
};

inline SolutionRecord parse_solution(std::string_view text) {
  const nlohmann::json doc = detail::parse_json(text);
  if (!doc.is_object()) detail::invalid("solution must be an object");
  SolutionRecord out;
  try {
    out.status = doc.at("status").get<std::string>();
    out.geometry = detail::parse_geometry(doc.at("geometry").get<std::string>());
    const auto r = doc.at("radii").get<std::vector<double>>();
    out.radii = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
    const auto k = doc.at("curvature").get<std::vector<double>>();
    out.curvature = Eigen::Map<const Eigen::VectorXd>(k.data(), static_cast<Eigen::Index>(k.size()));
    out.residual = doc.at("residual").is_number() ? doc.at("residual").get<double>() : std::numeric_limits<double>::infinity();
    out.times = doc.at("history").at("time").get<std::vector<double>>();
    out.residuals = doc.at("history").at("residual").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    detail::invalid(std::string("solution document: ") + e.what());
  }
  return out;
}

}  // namespace circleflow
