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

// Combinatorial pre-checks on a problem before any radii are computed:
// the per-triangle angle condition, validity of a curvature target, and the
// subset inequalities that decide whether a target lies in the image of the
// curvature map.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "circleflow/circle_geometry.hpp"
#include "circleflow/curvature.hpp"
#include "circleflow/error.hpp"
#include "circleflow/mesh.hpp"

namespace circleflow {

struct C1Violation {
  int triangle = -1;
  std::array<double, 3> xi{};
};

/// Triangles whose intersection angles give some ξ < 0.
inline std::vector<C1Violation> check_c1(const TriangulatedSurface& surface, const AngleAssignment& theta) {
  std::vector<C1Violation> out;
  for (int t = 0; t < surface.num_faces(); ++t) {
    const auto xi = xi_values(theta.triangle_thetas(surface, t));
    if (std::any_of(xi.begin(), xi.end(), [](double x) { return x < -kXiTolerance; })) out.push_back({t, xi});
  }
  return out;
}

/// Prescribed per-vertex curvatures in a fixed background geometry.
struct CurvatureTarget {
  Geometry geometry = Geometry::Euclidean;
  Eigen::VectorXd k;

  static CurvatureTarget zero(const TriangulatedSurface& surface, Geometry geometry) {
    return {geometry, Eigen::VectorXd::Zero(surface.num_vertices())};
  }

  /// Constant target 2πχ(S)/|V| (Euclidean only).
  static CurvatureTarget mean(const TriangulatedSurface& surface) {
    const double k_av = 2.0 * kPi * surface.euler_characteristic() / surface.num_vertices();
    return {Geometry::Euclidean, Eigen::VectorXd::Constant(surface.num_vertices(), k_av)};
  }

  /// Boundary turning angles φ on V_∂, zero curvature at interior vertices.
  /// phi is indexed by vertex; entries at interior vertices must be zero.
  static CurvatureTarget boundary_phi(const TriangulatedSurface& surface, Geometry geometry,
                                      const Eigen::VectorXd& phi) {
    if (phi.size() != surface.num_vertices()) throw Error(ErrorCode::InvalidInput, "phi has the wrong length");
    if (!surface.has_boundary()) throw Error(ErrorCode::InvalidInput, "boundary-phi target on a closed surface");
    Eigen::VectorXd k = Eigen::VectorXd::Zero(surface.num_vertices());
    for (int v = 0; v < surface.num_vertices(); ++v) {
      if (!surface.is_boundary_vertex(v)) {
        if (phi[v] != 0.0) {
          throw Error(ErrorCode::InvalidInput, "phi given for interior vertex " + std::to_string(v));
        }
        continue;
      }
      if (!(phi[v] >= 0.0 && phi[v] < kPi)) {
        throw Error(ErrorCode::InvalidInput, "phi at vertex " + std::to_string(v) + " must lie in [0, pi)");
      }
      k[v] = phi[v];
    }
    return {geometry, k};
  }
};

struct TargetCheck {
  bool bounds_ok = true;
  bool gauss_bonnet_ok = true;
  std::vector<int> bound_violations;  // vertices with k_i >= 2π (interior) or >= π (boundary)
  double sum = 0.0;
  double gauss_bonnet_value = 0.0;  // 2πχ(S)

  bool ok() const { return bounds_ok && gauss_bonnet_ok; }

  std::string describe() const {
    std::ostringstream os;
    if (ok()) return "target ok";
    if (!bounds_ok) {
      os << "curvature bound violated at vertices";
      for (int v : bound_violations) os << ' ' << v;
      if (!gauss_bonnet_ok) os << "; ";
    }
    if (!gauss_bonnet_ok) os << "Gauss-Bonnet fails: sum k = " << sum << ", 2*pi*chi = " << gauss_bonnet_value;
    return os.str();
  }
};

/// Tolerance on the Euclidean Gauss-Bonnet equality, per vertex.
inline constexpr double kGaussBonnetTolerance = 1e-12;

inline TargetCheck check_target(const TriangulatedSurface& surface, const CurvatureTarget& target) {
  if (target.k.size() != surface.num_vertices()) {
    throw Error(ErrorCode::InvalidInput, "target has " + std::to_string(target.k.size()) + " entries for " +
                                             std::to_string(surface.num_vertices()) + " vertices");
  }
  TargetCheck out;
  for (int v = 0; v < surface.num_vertices(); ++v) {
    const double bound = surface.is_boundary_vertex(v) ? kPi : 2.0 * kPi;
    if (!(target.k[v] < bound)) {
      out.bounds_ok = false;
      out.bound_violations.push_back(v);
    }
  }
  out.sum = target.k.sum();
  out.gauss_bonnet_value = 2.0 * kPi * surface.euler_characteristic();
  const double tol = kGaussBonnetTolerance * surface.num_vertices();
  if (target.geometry == Geometry::Euclidean) {
    out.gauss_bonnet_ok = std::abs(out.sum - out.gauss_bonnet_value) <= tol;
  } else {
    out.gauss_bonnet_ok = out.sum - out.gauss_bonnet_value > tol;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subset inequalities.

enum class ViolationKind { Subset, GaussBonnet, CurvatureBound };

struct SubsetViolation {
  ViolationKind kind = ViolationKind::Subset;
  std::vector<int> subset;
  double lhs = 0.0;  // Σ_{v∈A} k_v
  double rhs = 0.0;  // -Σ_{Lk(A)} (π - Θ(e)) + 2π χ(G(A)\∂S) + π χ(G(A)∩∂S)
  double slack = 0.0;
  bool borderline = false;
};

enum class AttainabilityMode { Auto, Exhaustive, Restricted };
enum class Verdict { Attainable, NotAttainable, Borderline };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Attainable: return "attainable";
    case Verdict::NotAttainable: return "not-attainable";
    case Verdict::Borderline: return "borderline";
  }
  return "unknown";
}

struct AttainabilityOptions {
  AttainabilityMode mode = AttainabilityMode::Auto;
  int cutoff = 24;               // largest |V| enumerated exhaustively
  bool full_report = false;      // keep scanning after the first violation
  std::size_t max_recorded = 64; // violations stored in the report
  unsigned threads = 1;
  double tolerance = 1e-9;       // |slack| <= tolerance is borderline
};

struct AttainabilityReport {
  Verdict verdict = Verdict::Attainable;
  bool exhaustive = true;
  std::uint64_t subsets_checked = 0;
  std::uint64_t violation_count = 0;
  TargetCheck target;
  std::vector<SubsetViolation> violations;
  double min_slack = std::numeric_limits<double>::infinity();
  std::vector<int> min_slack_subset;

  bool attainable() const { return verdict == Verdict::Attainable; }
};

/// Evaluates the inequality for one subset A given as a vertex list.
inline SubsetViolation evaluate_subset(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                       const CurvatureTarget& target, std::span<const int> subset) {
  const SubsetAnalysis a = analyze_subset(surface, subset);
  SubsetViolation out;
  out.subset = a.subset;
  for (int v : a.subset) out.lhs += target.k[v];
  double link = 0.0;
  for (const auto& p : a.link_pairs) link += kPi - theta[p.edge];
  out.rhs = -link + 2.0 * kPi * a.chi_open + kPi * a.chi_boundary;
  out.slack = out.lhs - out.rhs;
  return out;
}

namespace detail {

// Bitmask evaluation of the subset inequality for |V| <= 64.
class MaskEvaluator {
 public:
  MaskEvaluator(const TriangulatedSurface& surface, const AngleAssignment& theta, const CurvatureTarget& target)
      : k_(target.k.data(), target.k.data() + target.k.size()) {
    for (int v = 0; v < surface.num_vertices(); ++v) {
      (surface.is_boundary_vertex(v) ? boundary_mask_ : interior_mask_) |= bit(v);
    }
    for (int t = 0; t < surface.num_faces(); ++t) {
      const auto& tri = surface.triangle(t);
      Face f;
      f.mask = bit(tri[0]) | bit(tri[1]) | bit(tri[2]);
      for (int c = 0; c < 3; ++c) {
        f.corner[c] = bit(tri[c]);
        f.link_weight[c] = kPi - theta[surface.triangle_edges(t)[c]];
      }
      faces_.push_back(f);
    }
    for (const auto& e : surface.edges()) {
      (e.is_boundary() ? boundary_edges_ : interior_edges_).push_back(bit(e.a) | bit(e.b));
    }
  }

  std::pair<double, double> lhs_rhs(std::uint64_t a) const {
    double lhs = 0.0;
    for (std::uint64_t m = a; m != 0; m &= m - 1) lhs += k_[static_cast<std::size_t>(std::countr_zero(m))];
    double link = 0.0;
    int faces = 0;
    for (const auto& f : faces_) {
      const std::uint64_t hit = f.mask & a;
      if (hit == 0) continue;
      ++faces;
      if (std::popcount(hit) == 1) {
        for (int c = 0; c < 3; ++c) {
          if (f.corner[c] == hit) link += f.link_weight[c];
        }
      }
    }
    int interior_edges = 0;
    for (auto m : interior_edges_) interior_edges += (m & a) != 0;
    int boundary_edges = 0;
    for (auto m : boundary_edges_) boundary_edges += (m & a) != 0;
    const int chi_open = std::popcount(a & interior_mask_) - interior_edges + faces;
    const int chi_boundary = std::popcount(a & boundary_mask_) - boundary_edges;
    return {lhs, -link + 2.0 * kPi * chi_open + kPi * chi_boundary};
  }

 private:
  static std::uint64_t bit(int v) { return std::uint64_t{1} << v; }

  struct Face {
    std::uint64_t mask = 0;
    std::array<std::uint64_t, 3> corner{};
    std::array<double, 3> link_weight{};
  };

  std::vector<double> k_;
  std::uint64_t interior_mask_ = 0;
  std::uint64_t boundary_mask_ = 0;
  std::vector<Face> faces_;
  std::vector<std::uint64_t> interior_edges_;
  std::vector<std::uint64_t> boundary_edges_;
};

struct ScanResult {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::uint64_t strict = 0;  // violations outside the borderline band
  std::vector<SubsetViolation> recorded;
  double min_slack = std::numeric_limits<double>::infinity();
  std::uint64_t min_slack_mask = 0;
};

inline void record(ScanResult& out, const SubsetViolation& v, std::size_t cap) {
  ++out.violations;
  if (!v.borderline) ++out.strict;
  if (out.recorded.size() < cap) out.recorded.push_back(v);
}

}  // namespace detail

/// Subset-inequality attainability check.
///
/// Exhaustive mode evaluates every proper non-empty A ⊆ V; A = V is covered by
/// the Gauss-Bonnet clause of check_target. Restricted mode, used beyond the
/// cutoff, only tests singletons, closed vertex neighbourhoods, boundary
/// components and their complements, so a pass there is not a proof.
inline AttainabilityReport attainability(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                         const CurvatureTarget& target, const AttainabilityOptions& options = {}) {
  AttainabilityReport report;
  report.target = check_target(surface, target);
  const int n = surface.num_vertices();
  const int cutoff = std::min(options.cutoff, 62);

  bool exhaustive = n <= cutoff;
  if (options.mode == AttainabilityMode::Exhaustive) {
    if (n > cutoff) {
      throw Error(ErrorCode::EnumerationTooLarge, std::to_string(n) + " vertices exceed the exhaustive cutoff of " +
                                                      std::to_string(cutoff));
    }
    exhaustive = true;
  } else if (options.mode == AttainabilityMode::Restricted) {
    exhaustive = false;
  }
  report.exhaustive = exhaustive;

  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::vector<SubsetViolation> head;
  for (int v : report.target.bound_violations) {
    const double bound = surface.is_boundary_vertex(v) ? kPi : 2.0 * kPi;
    head.push_back({ViolationKind::CurvatureBound, {v}, target.k[v], bound, bound - target.k[v], false});
  }
  if (!report.target.gauss_bonnet_ok) {
    head.push_back({ViolationKind::GaussBonnet, all, report.target.sum, report.target.gauss_bonnet_value,
                    report.target.sum - report.target.gauss_bonnet_value, false});
  }
  report.violation_count = head.size();
  report.violations = head;
  bool stop = !head.empty() && !options.full_report;

  detail::ScanResult scan;
  if (!stop && n >= 2) {
    if (exhaustive) {
      const detail::MaskEvaluator eval(surface, theta, target);
      const std::uint64_t full = (std::uint64_t{1} << n) - 1;
      const unsigned threads = std::max(1U, options.threads);
      std::vector<detail::ScanResult> parts(threads);
      std::atomic<bool> halt{false};
      auto work = [&](unsigned w) {
        auto& part = parts[w];
        for (std::uint64_t a = 1 + w; a < full; a += threads) {
          if (halt.load(std::memory_order_relaxed)) break;
          const auto [lhs, rhs] = eval.lhs_rhs(a);
          const double slack = lhs - rhs;
          ++part.checked;
          if (slack < part.min_slack) {
            part.min_slack = slack;
            part.min_slack_mask = a;
          }
          if (slack <= options.tolerance) {
            detail::record(part, {ViolationKind::Subset, subset_from_mask(a), lhs, rhs, slack,
                                  slack >= -options.tolerance},
                           options.max_recorded);
            if (!options.full_report && slack < -options.tolerance) halt.store(true, std::memory_order_relaxed);
          }
        }
      };
      if (threads == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
      }
      for (auto& part : parts) {
        scan.checked += part.checked;
        scan.violations += part.violations;
        scan.strict += part.strict;
        scan.recorded.insert(scan.recorded.end(), part.recorded.begin(), part.recorded.end());
        if (part.min_slack < scan.min_slack) {
          scan.min_slack = part.min_slack;
          scan.min_slack_mask = part.min_slack_mask;
        }
      }
      std::sort(scan.recorded.begin(), scan.recorded.end(),
                [](const SubsetViolation& x, const SubsetViolation& y) { return x.subset < y.subset; });
      if (scan.recorded.size() > options.max_recorded) scan.recorded.resize(options.max_recorded);
      report.min_slack_subset = subset_from_mask(scan.min_slack_mask);
    } else {
      // Candidate family for the restricted scan, deduplicated.
      std::map<std::vector<int>, bool> candidates;
      auto add = [&](std::vector<int> s) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (s.empty() || static_cast<int>(s.size()) == n) return;
        std::vector<char> in(static_cast<std::size_t>(n), 0);
        for (int v : s) in[static_cast<std::size_t>(v)] = 1;
        std::vector<int> complement;
        for (int v = 0; v < n; ++v) {
          if (!in[static_cast<std::size_t>(v)]) complement.push_back(v);
        }
        candidates.emplace(std::move(s), true);
        candidates.emplace(std::move(complement), true);
      };
      for (int v = 0; v < n; ++v) {
        add({v});
        std::vector<int> star{v};
        for (int w : surface.vertex_neighbors(v)) star.push_back(w);
        add(star);
      }
      for (const auto& cycle : surface.boundary_cycles()) add(cycle);
      for (const auto& [subset, unused] : candidates) {
        const auto r = evaluate_subset(surface, theta, target, subset);
        ++scan.checked;
        if (r.slack < scan.min_slack) {
          scan.min_slack = r.slack;
          report.min_slack_subset = r.subset;
        }
        if (r.slack <= options.tolerance) {
          auto v = r;
          v.borderline = r.slack >= -options.tolerance;
          detail::record(scan, v, options.max_recorded);
          if (!options.full_report && !v.borderline) break;
        }
      }
    }
  }
  report.subsets_checked = scan.checked;
  report.min_slack = scan.min_slack;
  report.violation_count += scan.violations;
  for (auto& v : scan.recorded) {
    if (report.violations.size() < options.max_recorded) report.violations.push_back(std::move(v));
  }

  if (!head.empty() || scan.strict > 0) {
    report.verdict = Verdict::NotAttainable;
  } else if (scan.violations > 0) {
    report.verdict = Verdict::Borderline;
  } else {
    report.verdict = Verdict::Attainable;
  }
  return report;
}

}  // namespace circleflow
