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

// Radius solvers for a prescribed curvature target.
//
// Both solvers work in u-coordinates, where the curvature map is the gradient
// of a convex energy Φ(u) = ∫ Σ (K_i - k_i) du_i and the Ricci flow reads
// du_i/dt = k_i - K_i(u).
//
//   integrate_flow  explicit Euler on the u-flow with an adaptive step
//   newton_solve    damped Newton on Φ with the curvature Jacobian as Hessian

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "circleflow/circle_geometry.hpp"
#include "circleflow/conditions.hpp"
#include "circleflow/curvature.hpp"
#include "circleflow/error.hpp"
#include "circleflow/mesh.hpp"

namespace circleflow {

enum class Normalization { None, MeanCurvature };

struct StepControl {
  double initial_dt = 0.05;
  double max_dt = 1.0;
  double min_dt = 1e-12;  // rejected steps keep retrying at this floor
  double shrink = 0.5;
  double grow = 1.2;
  int grow_after = 5;  // consecutive accepted steps before growing dt
};

struct FlowSpec {
  CurvatureTarget target;
  Normalization normalization = Normalization::None;
  StepControl step;
  double tolerance = 1e-10;  // on max |K_i - k_i|
  long max_steps = 100000;
  long stall_window = 10000;       // steps without ...
  double stall_improvement = 1e-3; // ... this much relative residual decrease
  bool track_energy = false;

  Geometry geometry() const { return target.geometry; }

  static FlowSpec for_target(CurvatureTarget target) {
    FlowSpec spec;
    spec.target = std::move(target);
    return spec;
  }

  /// Euclidean flow towards the mean curvature 2πχ(S)/|V|.
  static FlowSpec normalized(const TriangulatedSurface& surface) {
    FlowSpec spec;
    spec.target = CurvatureTarget::mean(surface);
    spec.normalization = Normalization::MeanCurvature;
    return spec;
  }
};

enum class SolveStatus { Converged, MaxStepsExceeded, LineSearchFailed, SingularHessian, Diverged };

constexpr std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxStepsExceeded: return "max-steps-exceeded";
    case SolveStatus::LineSearchFailed: return "line-search-failed";
    case SolveStatus::SingularHessian: return "singular-hessian";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

struct SolveReport {
  SolveStatus status = SolveStatus::MaxStepsExceeded;
  Geometry geometry = Geometry::Euclidean;
  RadiusVector r;
  Eigen::VectorXd u;
  Eigen::VectorXd curvature;
  Eigen::VectorXd target;
  long iterations = 0;        // accepted steps (flow) or Newton iterations
  long rejected_steps = 0;
  std::vector<double> times;      // flow time (flow) or iteration index (Newton)
  std::vector<double> residuals;  // max |K - k| at each recorded point
  std::vector<double> energy;     // Φ relative to the start, when tracked
  double conserved_drift = 0.0;   // |Σu - Σu(0)|
  std::string message;

  bool converged() const { return status == SolveStatus::Converged; }
  double final_residual() const {
    return residuals.empty() ? std::numeric_limits<double>::infinity() : residuals.back();
  }
};

namespace detail {

inline double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

inline void require_c1(const TriangulatedSurface& surface, const AngleAssignment& theta) {
  const auto bad = check_c1(surface, theta);
  if (!bad.empty()) {
    throw Error(ErrorCode::C1Violation, std::to_string(bad.size()) + " triangle(s) violate the angle condition, first is " +
                                            std::to_string(bad.front().triangle));
  }
}

// Radii this far from 1 are treated as leaving the domain; the angle formulas
// lose their meaning long before double precision runs out.
inline constexpr double kMinRadius = 1e-150;
inline constexpr double kMaxRadius = 1e150;

// Curvature at u, or nullopt if u is outside the usable domain.
inline std::optional<Eigen::VectorXd> try_curvature(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                                    const UCoordinates& u) {
  if (u.geometry == Geometry::Hyperbolic && (u.u.array() >= 0.0).any()) return std::nullopt;
  try {
    const RadiusVector r = u_to_r(u);
    if ((r.array() < kMinRadius).any() || (r.array() > kMaxRadius).any()) return std::nullopt;
    auto K = curvature_map(surface, theta, r, u.geometry).curvature;
    if (!K.allFinite()) return std::nullopt;
    return K;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::C1Violation || e.code() == ErrorCode::InvalidInput) throw;
    return std::nullopt;
  }
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                                   -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                                   0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                     0.2223810344533745, 0.1012285362903763};

}  // namespace detail

/// k - K(u): the right-hand side of the u-flow.
inline Eigen::VectorXd flow_rhs(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                const UCoordinates& u, const FlowSpec& spec) {
  if (u.geometry != spec.geometry()) throw Error(ErrorCode::InvalidInput, "u coordinates and flow geometry differ");
  return spec.target.k - curvature_map(surface, theta, u).curvature;
}

/// Φ(b) - Φ(a) along the straight segment, Φ the energy whose gradient is
/// K(u) - k. Uses 8-point Gauss-Legendre quadrature.
inline double energy_difference(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                const CurvatureTarget& target, const UCoordinates& a, const UCoordinates& b) {
  const Eigen::VectorXd delta = b.u - a.u;
  double sum = 0.0;
  for (std::size_t q = 0; q < detail::kGaussNodes.size(); ++q) {
    const double s = 0.5 * (detail::kGaussNodes[q] + 1.0);
    const UCoordinates p{a.geometry, a.u + s * delta};
    const Eigen::VectorXd K = curvature_map(surface, theta, p).curvature;
    sum += 0.5 * detail::kGaussWeights[q] * (K - target.k).dot(delta);
  }
  return sum;
}

/// Φ accumulated along a piecewise-linear path through the given points.
inline double path_energy(const TriangulatedSurface& surface, const AngleAssignment& theta,
                          const CurvatureTarget& target, std::span<const UCoordinates> path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += energy_difference(surface, theta, target, path[i - 1], path[i]);
  return total;
}

/// Integrates du/dt = k - K(u) from r0 with explicit Euler steps.
///
/// A step is accepted when max |K - k| does not increase (up to 8 ulp) and u
/// stays in the domain; otherwise dt is halved. dt grows by the configured factor after a
/// run of accepted steps, and never drops below min_dt. The run stops at the
/// tolerance, at max_steps (accepted and rejected steps both count), or when
/// the residual has not improved by stall_improvement over stall_window steps.
inline SolveReport integrate_flow(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                  const RadiusVector& r0, const FlowSpec& spec) {
  detail::require_c1(surface, theta);
  const Geometry g = spec.geometry();
  if (spec.normalization == Normalization::MeanCurvature) {
    if (g != Geometry::Euclidean) throw Error(ErrorCode::InvalidInput, "mean-curvature normalization is Euclidean only");
    const double k_av = 2.0 * kPi * surface.euler_characteristic() / surface.num_vertices();
    if ((spec.target.k.array() - k_av).abs().maxCoeff() > 1e-14 * (1.0 + std::abs(k_av))) {
      throw Error(ErrorCode::InvalidInput, "normalized flow requires the constant mean-curvature target");
    }
  }
  if (!(spec.step.initial_dt > 0.0 && spec.step.max_dt > 0.0)) throw Error(ErrorCode::InvalidInput, "dt bounds must be positive");

  SolveReport report;
  report.geometry = g;
  report.target = spec.target.k;
  UCoordinates u = r_to_u(r0, g);
  const double sum_u0 = u.u.sum();
  Eigen::VectorXd K = curvature_map(surface, theta, r0, g).curvature;
  double residual = detail::max_abs(K - spec.target.k);
  double time = 0.0;
  double energy = 0.0;
  report.times.push_back(time);
  report.residuals.push_back(residual);
  if (spec.track_energy) report.energy.push_back(energy);

  double dt = std::min(spec.step.initial_dt, spec.step.max_dt);
  int accepted_run = 0;
  double reference_residual = residual;
  long reference_step = 0;
  report.status = SolveStatus::MaxStepsExceeded;

  for (long step = 0;; ++step) {
    if (residual <= spec.tolerance) {
      report.status = SolveStatus::Converged;
      break;
    }
    if (step >= spec.max_steps) {
      report.message = "maximum step count reached; check attainability of the target";
      break;
    }
    if (step - reference_step >= spec.stall_window) {
      report.message = "residual stalled over " + std::to_string(spec.stall_window) +
                       " steps; the target is probably not attainable";
      break;
    }

    const Eigen::VectorXd rhs = spec.target.k - K;
    UCoordinates next{g, u.u + dt * rhs};
    const auto K_next = detail::try_curvature(surface, theta, next);
    const double next_residual = K_next ? detail::max_abs(*K_next - spec.target.k) : std::numeric_limits<double>::infinity();
    // Non-increasing up to rounding in the residual itself.
    if (!K_next || next_residual > residual * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) {
      ++report.rejected_steps;
      dt = std::max(dt * spec.step.shrink, spec.step.min_dt);
      accepted_run = 0;
      continue;
    }

    if (spec.track_energy) energy += energy_difference(surface, theta, spec.target, u, next);
    u = std::move(next);
    K = *K_next;
    residual = next_residual;
    time += dt;
    ++report.iterations;
    report.times.push_back(time);
    report.residuals.push_back(residual);
    if (spec.track_energy) report.energy.push_back(energy);
    if (residual < reference_residual * (1.0 - spec.stall_improvement)) {
      reference_residual = residual;
      reference_step = step;
    }
    if (++accepted_run >= spec.step.grow_after) {
      dt = std::min(dt * spec.step.grow, spec.step.max_dt);
      accepted_run = 0;
    }
  }

  report.u = u.u;
  report.r = u_to_r(u);
  report.curvature = K;
  report.conserved_drift = std::abs(u.u.sum() - sum_u0);
  return report;
}

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
  double armijo = 1e-4;
  int max_backtracks = 40;
  double fallback_dt = 0.1;  // first trial step of the flow fallback
};

/// Damped Newton descent on Φ.
///
/// Hyperbolic: the Jacobian is positive definite on u < 0 and steps are cut
/// back to stay inside the domain. Euclidean: the Jacobian has the constants as
/// kernel, so the step is taken in the hyperplane Σu = Σu0 by grounding one
/// vertex and re-centering. Steps are accepted by Armijo backtracking on Φ
/// evaluated by quadrature; when backtracking fails a flow step is taken
/// instead, and two consecutive failures of both end the run.
inline SolveReport newton_solve(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                const UCoordinates& u0, const CurvatureTarget& target,
                                const NewtonOptions& options = {}) {
  detail::require_c1(surface, theta);
  if (u0.geometry != target.geometry) throw Error(ErrorCode::InvalidInput, "start point and target geometry differ");
  const Geometry g = target.geometry;
  const int n = surface.num_vertices();

  SolveReport report;
  report.geometry = g;
  report.target = target.k;
  UCoordinates u = u0;
  const double sum_u0 = u.u.sum();
  Eigen::VectorXd K = curvature_map(surface, theta, u).curvature;
  double energy = 0.0;
  int failures = 0;

  auto finish = [&](SolveStatus status, std::string message) {
    report.status = status;
    report.message = std::move(message);
    report.u = u.u;
    report.r = u_to_r(u);
    report.curvature = K;
    report.conserved_drift = std::abs(u.u.sum() - sum_u0);
    return report;
  };

  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd grad = K - target.k;
    const double residual = detail::max_abs(grad);
    report.times.push_back(static_cast<double>(iter));
    report.residuals.push_back(residual);
    report.energy.push_back(energy);
    if (residual <= options.tolerance) return finish(SolveStatus::Converged, "");
    if (iter >= options.max_iterations) {
      return finish(SolveStatus::Diverged, "no convergence after " + std::to_string(iter) +
                                               " Newton iterations; check attainability of the target");
    }

    // Newton direction.
    Eigen::SparseMatrix<double> jac;
    try {
      jac = jacobian(surface, theta, u);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NumericalDegeneracy) throw;
      return finish(SolveStatus::SingularHessian, e.what());
    }
    Eigen::VectorXd dir(n);
    if (g == Geometry::Hyperbolic) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(jac);
      if (ldlt.info() != Eigen::Success) return finish(SolveStatus::SingularHessian, "Jacobian factorization failed");
      dir = ldlt.solve(-grad);
    } else if (n == 1) {
      dir.setZero();
    } else {
      const Eigen::SparseMatrix<double> reduced = jac.topLeftCorner(n - 1, n - 1);
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(reduced);
      if (ldlt.info() != Eigen::Success) {
        return finish(SolveStatus::SingularHessian, "reduced Jacobian factorization failed");
      }
      dir.head(n - 1) = ldlt.solve(-grad.head(n - 1));
      dir[n - 1] = 0.0;
      dir.array() -= dir.mean();
    }
    if (!dir.allFinite()) return finish(SolveStatus::SingularHessian, "non-finite Newton direction");

    double alpha = 1.0;
    if (g == Geometry::Hyperbolic) {
      for (int i = 0; i < n; ++i) {
        if (dir[i] > 0.0) alpha = std::min(alpha, 0.95 * (-u.u[i]) / dir[i]);
      }
    }
    const double slope = grad.dot(dir);
    bool accepted = false;
    for (int bt = 0; bt < options.max_backtracks && slope < 0.0; ++bt, alpha *= 0.5) {
      const UCoordinates trial{g, u.u + alpha * dir};
      if (!detail::try_curvature(surface, theta, trial)) continue;
      double delta_phi;
      try {
        delta_phi = energy_difference(surface, theta, target, u, trial);
      } catch (const Error&) {
        continue;
      }
      if (delta_phi <= options.armijo * alpha * slope) {
        energy += delta_phi;
        u = trial;
        K = curvature_map(surface, theta, u).curvature;
        accepted = true;
        break;
      }
    }
    if (accepted) {
      failures = 0;
      ++report.iterations;
      continue;
    }

    // Flow fallback.
    bool moved = false;
    for (double dt = options.fallback_dt; dt > 1e-14; dt *= 0.5) {
      const UCoordinates trial{g, u.u - dt * grad};
      const auto K_trial = detail::try_curvature(surface, theta, trial);
      if (K_trial && detail::max_abs(*K_trial - target.k) < residual) {
        energy += energy_difference(surface, theta, target, u, trial);
        u = trial;
        K = *K_trial;
        moved = true;
        break;
      }
    }
    ++report.iterations;
    if (moved) {
      failures = 0;
      continue;
    }
    if (++failures >= 2) return finish(SolveStatus::LineSearchFailed, "line search and flow fallback both failed twice");
  }
}

inline SolveReport newton_solve(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                const RadiusVector& r0, const CurvatureTarget& target,
                                const NewtonOptions& options = {}) {
  return newton_solve(surface, theta, r_to_u(r0, target.geometry), target, options);
}

/// Default start r ≡ 1.
inline RadiusVector default_radii(const TriangulatedSurface& surface) {
  return RadiusVector::Ones(surface.num_vertices());
}

/// Shifts Euclidean u so that Σu equals the given value (scaling gauge).
inline Eigen::VectorXd align_gauge(const Eigen::VectorXd& u, double sum) {
  return u.array() + (sum - u.sum()) / static_cast<double>(u.size());
}

struct RateFit {
  double rate = 0.0;       // -slope of log residual against time
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares exponential rate over the last half of the residual history.
inline RateFit fit_rate(std::span<const double> times, std::span<const double> residuals, std::size_t min_tail = 20) {
  if (times.size() != residuals.size()) throw Error(ErrorCode::InvalidInput, "history arrays differ in length");
  const std::size_t start = times.size() / 2;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = start; i < times.size(); ++i) {
    if (residuals[i] > 0.0 && std::isfinite(residuals[i])) {
      x.push_back(times[i]);
      y.push_back(std::log(residuals[i]));
    }
  }
  if (x.size() < min_tail) {
    throw Error(ErrorCode::InsufficientHistory,
                "rate fit needs at least " + std::to_string(min_tail) + " tail samples, have " + std::to_string(x.size()));
  }
  const double m = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorCode::InsufficientHistory, "tail samples span no time");
  RateFit fit;
  fit.rate = -sxy / sxx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.samples = x.size();
  return fit;
}

inline RateFit fit_rate(const SolveReport& report) {
  if (!report.converged()) throw Error(ErrorCode::InsufficientHistory, "rate fit needs a converged run");
  return fit_rate(report.times, report.residuals);
}

}  // namespace circleflow
