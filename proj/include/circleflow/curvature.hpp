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

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "circleflow/circle_geometry.hpp"
#include "circleflow/error.hpp"
#include "circleflow/mesh.hpp"

namespace circleflow {

/// Exterior intersection angle per edge, indexed like surface.edges().
class AngleAssignment {
 public:
  AngleAssignment(const TriangulatedSurface& surface, std::vector<double> per_edge) : theta_(std::move(per_edge)) {
    if (static_cast<int>(theta_.size()) != surface.num_edges()) {
      throw Error(ErrorCode::InvalidInput, "angle assignment has " + std::to_string(theta_.size()) +
                                               " entries for " + std::to_string(surface.num_edges()) + " edges");
    }
    for (std::size_t e = 0; e < theta_.size(); ++e) {
      if (!(theta_[e] >= 0.0 && theta_[e] < kPi)) {
        const auto& edge = surface.edge(static_cast<int>(e));
        throw Error(ErrorCode::InvalidInput, "angle on edge " + std::to_string(edge.a) + "-" +
                                                 std::to_string(edge.b) + " must lie in [0, pi), got " +
                                                 std::to_string(theta_[e]));
      }
    }
  }

  static AngleAssignment constant(const TriangulatedSurface& surface, double value) {
    return AngleAssignment(surface, std::vector<double>(static_cast<std::size_t>(surface.num_edges()), value));
  }

  double operator[](int e) const { return theta_[static_cast<std::size_t>(e)]; }
  std::span<const double> values() const { return theta_; }
  std::size_t size() const { return theta_.size(); }

  /// Angles on the edges opposite corners 0, 1, 2 of triangle t.
  std::array<double, 3> triangle_thetas(const TriangulatedSurface& surface, int t) const {
    const auto& e = surface.triangle_edges(t);
    return {theta_[static_cast<std::size_t>(e[0])], theta_[static_cast<std::size_t>(e[1])],
            theta_[static_cast<std::size_t>(e[2])]};
  }

 private:
  std::vector<double> theta_;
};

using RadiusVector = Eigen::VectorXd;

/// Flow coordinates: u = ln r (Euclidean) or u = ln tanh(r/2) (hyperbolic).
struct UCoordinates {
  Geometry geometry = Geometry::Euclidean;
  Eigen::VectorXd u;
};

inline void validate_radii(const RadiusVector& r) {
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0) || !std::isfinite(r[i])) {
      throw Error(ErrorCode::NonPositiveRadius,
                  "radius of vertex " + std::to_string(i) + " must be positive and finite, got " + std::to_string(r[i]));
    }
  }
}

inline UCoordinates r_to_u(const RadiusVector& r, Geometry geometry) {
  validate_radii(r);
  UCoordinates out{geometry, Eigen::VectorXd(r.size())};
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (geometry == Geometry::Euclidean) {
      out.u[i] = std::log(r[i]);
    } else {
      // ln tanh(r/2); the log1p form keeps precision once tanh(r/2) is near 1.
      out.u[i] = r[i] <= 1.0 ? std::log(std::tanh(0.5 * r[i])) : std::log1p(-2.0 / (std::exp(r[i]) + 1.0));
    }
  }
  return out;
}

inline RadiusVector u_to_r(const UCoordinates& coords) {
  RadiusVector r(coords.u.size());
  for (Eigen::Index i = 0; i < coords.u.size(); ++i) {
    const double u = coords.u[i];
    if (!std::isfinite(u)) throw Error(ErrorCode::DomainViolation, "non-finite u coordinate at vertex " + std::to_string(i));
    if (coords.geometry == Geometry::Euclidean) {
      r[i] = std::exp(u);
    } else {
      if (u >= 0.0) {
        throw Error(ErrorCode::DomainViolation,
                    "hyperbolic u coordinate must be negative, got " + std::to_string(u) + " at vertex " + std::to_string(i));
      }
      // r = 2 artanh(e^u) = log1p(e^u) - log(1 - e^u)
      r[i] = std::log1p(std::exp(u)) - (u < -1.0 ? std::log1p(-std::exp(u)) : std::log(-std::expm1(u)));
    }
  }
  return r;
}

struct CurvatureVector {
  Eigen::VectorXd curvature;   // K_i
  Eigen::VectorXd cone_angle;  // σ(v_i)
  double total_area = 0.0;     // hyperbolic only

  double sum() const { return curvature.sum(); }
};

namespace detail {

inline ThreeCircleConfig triangle_config(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                         const RadiusVector& r, int t) {
  const auto& tri = surface.triangle(t);
  try {
    return ThreeCircleConfig({r[tri[0]], r[tri[1]], r[tri[2]]}, theta.triangle_thetas(surface, t));
  } catch (const Error& e) {
    throw Error(e.code(), "triangle " + std::to_string(t) + " (" + std::to_string(tri[0]) + "," +
                              std::to_string(tri[1]) + "," + std::to_string(tri[2]) + "): " + e.what());
  }
}

inline void check_sizes(const TriangulatedSurface& surface, const AngleAssignment& theta, Eigen::Index n) {
  if (static_cast<int>(theta.size()) != surface.num_edges()) {
    throw Error(ErrorCode::InvalidInput, "angle assignment does not match the surface");
  }
  if (n != surface.num_vertices()) {
    throw Error(ErrorCode::InvalidInput, "vector has " + std::to_string(n) + " entries for " +
                                             std::to_string(surface.num_vertices()) + " vertices");
  }
}

}  // namespace detail

/// Cone angles and vertex curvatures: K_i = 2π - σ_i at interior vertices
/// and π - σ_i on the boundary.
inline CurvatureVector curvature_map(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                     const RadiusVector& r, Geometry geometry) {
  detail::check_sizes(surface, theta, r.size());
  validate_radii(r);
  CurvatureVector out{Eigen::VectorXd::Zero(r.size()), Eigen::VectorXd::Zero(r.size()), 0.0};
  for (int t = 0; t < surface.num_faces(); ++t) {
    const auto config = detail::triangle_config(surface, theta, r, t);
    const auto angles = inner_angles(config, geometry);
    const auto& tri = surface.triangle(t);
    for (int c = 0; c < 3; ++c) out.cone_angle[tri[c]] += angles.angles[c];
    out.total_area += angles.area;
  }
  for (int v = 0; v < surface.num_vertices(); ++v) {
    out.curvature[v] = (surface.is_boundary_vertex(v) ? kPi : 2.0 * kPi) - out.cone_angle[v];
  }
  return out;
}

inline CurvatureVector curvature_map(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                     const UCoordinates& u) {
  return curvature_map(surface, theta, u_to_r(u), u.geometry);
}

/// ∂K_i/∂u_j assembled from per-triangle angle derivatives, using dr/du = r
/// (Euclidean) and dr/du = sinh r (hyperbolic).
inline Eigen::SparseMatrix<double> jacobian(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                            const UCoordinates& coords) {
  const RadiusVector r = u_to_r(coords);
  detail::check_sizes(surface, theta, r.size());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(surface.num_faces()) * 9);
  for (int t = 0; t < surface.num_faces(); ++t) {
    const auto config = detail::triangle_config(surface, theta, r, t);
    const Mat3 d = angle_derivatives(config, coords.geometry);
    const auto& tri = surface.triangle(t);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        entries.emplace_back(tri[a], tri[b], -d[a][b] * conformal_weight(coords.geometry, r[tri[b]]));
      }
    }
  }
  Eigen::SparseMatrix<double> jac(r.size(), r.size());
  jac.setFromTriplets(entries.begin(), entries.end());
  return jac;
}

inline Eigen::MatrixXd jacobian_dense(const TriangulatedSurface& surface, const AngleAssignment& theta,
                                      const UCoordinates& coords) {
  return Eigen::MatrixXd(jacobian(surface, theta, coords));
}

}  // namespace circleflow
