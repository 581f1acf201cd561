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

// Development of a solved pattern into the Euclidean plane or the Poincaré
// disk, and SVG output.

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "circleflow/circle_geometry.hpp"
#include "circleflow/curvature.hpp"
#include "circleflow/error.hpp"
#include "circleflow/mesh.hpp"

namespace circleflow {

using Point = std::complex<double>;

struct EmbeddedPattern {
  Geometry geometry = Geometry::Euclidean;
  std::vector<Point> centers;    // plane points, or Poincaré disk points with |z| < 1
  std::vector<double> radii;     // in the native metric
  std::vector<char> placed;      // per triangle
  std::vector<Triangle> triangles;
  double max_closure_error = 0.0;  // worst mismatch when a vertex is reached twice
  bool overlap = false;            // developed triangles overlap

  int num_vertices() const { return static_cast<int>(centers.size()); }
};

/// Distance in the active model.
inline double geodesic_distance(Geometry g, Point a, Point b) {
  if (g == Geometry::Euclidean) return std::abs(a - b);
  const double q = std::abs(a - b) / std::abs(1.0 - std::conj(a) * b);
  return 2.0 * std::atanh(std::min(q, 1.0));
}

/// Exterior intersection angle of the drawn circles at a and b, from the
/// cosine relation between center distance and radii.
inline double intersection_angle(const EmbeddedPattern& pattern, int a, int b) {
  const double d = geodesic_distance(pattern.geometry, pattern.centers[static_cast<std::size_t>(a)],
                                     pattern.centers[static_cast<std::size_t>(b)]);
  const double ra = pattern.radii[static_cast<std::size_t>(a)];
  const double rb = pattern.radii[static_cast<std::size_t>(b)];
  double c;
  if (pattern.geometry == Geometry::Euclidean) {
    c = (d * d - ra * ra - rb * rb) / (2.0 * ra * rb);
  } else {
    c = (std::cosh(d) - std::cosh(ra) * std::cosh(rb)) / (std::sinh(ra) * std::sinh(rb));
  }
  return std::acos(std::clamp(c, -1.0, 1.0));
}

namespace detail {

// Point at distance `length` from `from`, turned by `angle` counterclockwise
// from the geodesic direction towards `toward`.
inline Point place_point(Geometry g, Point from, Point toward, double angle, double length) {
  const Point turn = std::polar(1.0, angle);
  if (g == Geometry::Euclidean) {
    const Point dir = (toward - from) / std::abs(toward - from);
    return from + length * dir * turn;
  }
  // Move `from` to the origin, where geodesics are diameters.
  const Point moved = (toward - from) / (1.0 - std::conj(from) * toward);
  const Point w = std::tanh(0.5 * length) * (moved / std::abs(moved)) * turn;
  return (w + from) / (1.0 + std::conj(from) * w);
}

inline Point to_klein(Point z) { return 2.0 * z / (1.0 + std::norm(z)); }

inline double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Separating-axis test on two triangles; touching along an edge or at a
// vertex does not count.
inline bool triangles_overlap(const std::array<Point, 3>& p, const std::array<Point, 3>& q, double eps) {
  auto separated_by_edges_of = [eps](const std::array<Point, 3>& a, const std::array<Point, 3>& b) {
    for (int i = 0; i < 3; ++i) {
      const Point e = a[static_cast<std::size_t>((i + 1) % 3)] - a[static_cast<std::size_t>(i)];
      const Point o = a[static_cast<std::size_t>(i)];
      const double own = cross(e, a[static_cast<std::size_t>((i + 2) % 3)] - o);
      const double sign = own >= 0.0 ? 1.0 : -1.0;
      bool all_outside = true;
      for (const Point& v : b) {
        if (sign * cross(e, v - o) > eps * std::abs(e)) {
          all_outside = false;
          break;
        }
      }
      if (all_outside) return true;
    }
    return false;
  };
  return !separated_by_edges_of(p, q) && !separated_by_edges_of(q, p);
}

}  // namespace detail

/// Lays out triangles breadth-first over the dual graph.
///
/// Gauge: triangle 0 is placed first with its lowest-index edge (p, q), p < q,
/// running from the origin along the positive real axis. Each further triangle
/// is attached across an already placed edge with its third vertex on the left
/// of the edge in triangle order.
inline EmbeddedPattern develop(const TriangulatedSurface& surface, const AngleAssignment& theta, const RadiusVector& r,
                               Geometry geometry) {
  if (surface.euler_characteristic() != 1 || surface.boundary_component_count() != 1) {
    throw Error(ErrorCode::NotDiskType, "layout needs a disk: chi = " + std::to_string(surface.euler_characteristic()) +
                                            ", boundary components = " +
                                            std::to_string(surface.boundary_component_count()));
  }
  const auto curv = curvature_map(surface, theta, r, geometry);
  for (int v = 0; v < surface.num_vertices(); ++v) {
    if (!surface.is_boundary_vertex(v) && std::abs(curv.curvature[v]) > 1e-8) {
      throw Error(ErrorCode::NonflatInterior,
                  "interior vertex " + std::to_string(v) + " has curvature " + std::to_string(curv.curvature[v]));
    }
  }

  const int nf = surface.num_faces();
  std::vector<TriangleAngles> tri(static_cast<std::size_t>(nf));
  for (int t = 0; t < nf; ++t) {
    tri[static_cast<std::size_t>(t)] = inner_angles(detail::triangle_config(surface, theta, r, t), geometry);
  }

  EmbeddedPattern out;
  out.geometry = geometry;
  out.centers.assign(static_cast<std::size_t>(surface.num_vertices()), Point{});
  out.radii.assign(r.data(), r.data() + r.size());
  out.placed.assign(static_cast<std::size_t>(nf), 0);
  out.triangles.assign(surface.triangles().begin(), surface.triangles().end());
  std::vector<char> vertex_placed(static_cast<std::size_t>(surface.num_vertices()), 0);

  auto put = [&](int v, Point z) {
    auto& slot = out.centers[static_cast<std::size_t>(v)];
    if (vertex_placed[static_cast<std::size_t>(v)]) {
      out.max_closure_error = std::max(out.max_closure_error, geodesic_distance(geometry, slot, z));
    } else {
      slot = z;
      vertex_placed[static_cast<std::size_t>(v)] = 1;
    }
  };

  // Seed.
  const auto& e0 = surface.triangle_edges(0);
  const int seed_corner = static_cast<int>(std::min_element(e0.begin(), e0.end()) - e0.begin());
  const int p = surface.edge(e0[static_cast<std::size_t>(seed_corner)]).a;
  const int q = surface.edge(e0[static_cast<std::size_t>(seed_corner)]).b;
  const double lpq = tri[0].lengths[static_cast<std::size_t>(seed_corner)];
  put(p, Point{0.0, 0.0});
  put(q, Point{geometry == Geometry::Euclidean ? lpq : std::tanh(0.5 * lpq), 0.0});

  // Places the vertex at corner c of triangle t from the other two.
  auto attach = [&](int t, int c) {
    const auto& vs = surface.triangle(t);
    const auto& ta = tri[static_cast<std::size_t>(t)];
    const int a = vs[static_cast<std::size_t>(detail::next(c))];
    const int b = vs[static_cast<std::size_t>(detail::prev(c))];
    const Point z = detail::place_point(geometry, out.centers[static_cast<std::size_t>(a)],
                                        out.centers[static_cast<std::size_t>(b)],
                                        ta.angles[static_cast<std::size_t>(detail::next(c))],
                                        ta.lengths[static_cast<std::size_t>(detail::prev(c))]);
    put(vs[static_cast<std::size_t>(c)], z);
    out.placed[static_cast<std::size_t>(t)] = 1;
  };

  attach(0, seed_corner);
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    for (int c = 0; c < 3; ++c) {
      const auto& edge = surface.edge(surface.triangle_edges(t)[static_cast<std::size_t>(c)]);
      if (edge.is_boundary()) continue;
      const int nb = edge.faces[0] == t ? edge.faces[1] : edge.faces[0];
      if (out.placed[static_cast<std::size_t>(nb)]) continue;
      const auto& nv = surface.triangle(nb);
      int third = 0;
      while (edge.has_vertex(nv[static_cast<std::size_t>(third)])) ++third;
      attach(nb, third);
      queue.push_back(nb);
    }
  }

  // Overlap check on straight-line images (the Klein model keeps geodesics straight).
  std::vector<std::array<Point, 3>> images(static_cast<std::size_t>(nf));
  double scale = 0.0;
  for (int t = 0; t < nf; ++t) {
    for (int c = 0; c < 3; ++c) {
      Point z = out.centers[static_cast<std::size_t>(surface.triangle(t)[static_cast<std::size_t>(c)])];
      if (geometry == Geometry::Hyperbolic) z = detail::to_klein(z);
      images[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] = z;
      scale = std::max(scale, std::abs(z));
    }
  }
  const double eps = 1e-9 * std::max(scale, 1.0);
  for (int s = 0; s < nf && !out.overlap; ++s) {
    for (int t = s + 1; t < nf; ++t) {
      if (detail::triangles_overlap(images[static_cast<std::size_t>(s)], images[static_cast<std::size_t>(t)], eps)) {
        out.overlap = true;
        break;
      }
    }
  }
  return out;
}

struct SvgOptions {
  double width = 800.0;
  double margin = 0.05;  // fraction of the drawing extent
  double stroke = 1.0;
  bool overlay = false;  // draw the triangulation
};

namespace detail {

struct Disk {
  Point center;
  double radius;
};

// Euclidean circle representing a hyperbolic circle in the Poincaré disk.
inline Disk poincare_circle(Point c, double rho) {
  const double r0 = std::tanh(0.5 * rho);
  const double m = std::abs(c);
  const Point dir = m > 0.0 ? c / m : Point{1.0, 0.0};
  const double far = (r0 + m) / (1.0 + m * r0);
  const double near = (m - r0) / (1.0 - m * r0);
  return {0.5 * (far + near) * dir, 0.5 * (far - near)};
}

}  // namespace detail

/// SVG 1.1 document with one circle per vertex (class "vertex").
inline std::string render_svg(const EmbeddedPattern& pattern, const SvgOptions& options = {}) {
  const bool hyp = pattern.geometry == Geometry::Hyperbolic;
  std::vector<detail::Disk> disks;
  disks.reserve(pattern.centers.size());
  for (std::size_t v = 0; v < pattern.centers.size(); ++v) {
    disks.push_back(hyp ? detail::poincare_circle(pattern.centers[v], pattern.radii[v])
                        : detail::Disk{pattern.centers[v], pattern.radii[v]});
  }

  double xmin = hyp ? -1.0 : std::numeric_limits<double>::infinity();
  double xmax = hyp ? 1.0 : -std::numeric_limits<double>::infinity();
  double ymin = xmin;
  double ymax = xmax;
  if (!hyp) {
    for (const auto& d : disks) {
      xmin = std::min(xmin, d.center.real() - d.radius);
      xmax = std::max(xmax, d.center.real() + d.radius);
      ymin = std::min(ymin, d.center.imag() - d.radius);
      ymax = std::max(ymax, d.center.imag() + d.radius);
    }
    if (disks.empty()) xmin = ymin = -1.0, xmax = ymax = 1.0;
  }
  const double pad = options.margin * std::max(xmax - xmin, ymax - ymin);
  xmin -= pad;
  xmax += pad;
  ymin -= pad;
  ymax += pad;
  const double s = options.width / (xmax - xmin);
  const double height = s * (ymax - ymin);
  auto X = [&](double x) { return (x - xmin) * s; };
  auto Y = [&](double y) { return (ymax - y) * s; };

  std::ostringstream os;
  os << std::setprecision(10);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << options.width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << options.width << ' ' << height << "\">\n";
  if (hyp) {
    os << "  <circle class=\"boundary\" cx=\"" << X(0.0) << "\" cy=\"" << Y(0.0) << "\" r=\"" << s
       << "\" fill=\"none\" stroke=\"black\" stroke-width=\"" << options.stroke << "\"/>\n";
  }
  if (options.overlay) {
    os << "  <g class=\"triangulation\" fill=\"none\" stroke=\"gray\" stroke-width=\"" << 0.5 * options.stroke
       << "\">\n";
    std::vector<std::pair<int, int>> edges;
    for (const auto& t : pattern.triangles) {
      for (int c = 0; c < 3; ++c) {
        const int a = t[static_cast<std::size_t>(c)];
        const int b = t[static_cast<std::size_t>(detail::next(c))];
        edges.emplace_back(std::min(a, b), std::max(a, b));
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& [a, b] : edges) {
      const Point p = pattern.centers[static_cast<std::size_t>(a)];
      const Point q = pattern.centers[static_cast<std::size_t>(b)];
      const double det = detail::cross(p, q);
      if (!hyp || std::abs(det) < 1e-12) {
        os << "    <line x1=\"" << X(p.real()) << "\" y1=\"" << Y(p.imag()) << "\" x2=\"" << X(q.real())
           << "\" y2=\"" << Y(q.imag()) << "\"/>\n";
        continue;
      }
      // Geodesic: arc of the circle through p and q orthogonal to the unit circle.
      const double hp = 0.5 * (std::norm(p) + 1.0);
      const double hq = 0.5 * (std::norm(q) + 1.0);
      const Point center{(hp * q.imag() - hq * p.imag()) / det, (p.real() * hq - q.real() * hp) / det};
      const double radius = std::sqrt(std::max(std::norm(center) - 1.0, 0.0));
      const int sweep = detail::cross(p - center, q - center) > 0.0 ? 1 : 0;
      os << "    <path d=\"M " << X(p.real()) << ' ' << Y(p.imag()) << " A " << radius * s << ' ' << radius * s
         << " 0 0 " << sweep << ' ' << X(q.real()) << ' ' << Y(q.imag()) << "\"/>\n";
    }
    os << "  </g>\n";
  }
  for (std::size_t v = 0; v < disks.size(); ++v) {
    os << "  <circle class=\"vertex\" data-vertex=\"" << v << "\" cx=\"" << X(disks[v].center.real()) << "\" cy=\""
       << Y(disks[v].center.imag()) << "\" r=\"" << disks[v].radius * s
       << "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"" << options.stroke << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace circleflow
