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

// Geometry of three mutually intersecting circles: center-to-center lengths,
// inner angles of the center triangle, and the partial derivatives of those
// angles with respect to the radii. Index convention throughout: quantity i
// belongs to corner i, and the edge quantities (length l_i, angle Θ_i) belong
// to the edge opposite corner i.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "circleflow/error.hpp"

namespace circleflow {

enum class Geometry { Euclidean, Hyperbolic };

constexpr std::string_view to_string(Geometry g) {
  return g == Geometry::Euclidean ? "euclidean" : "hyperbolic";
}

inline constexpr double kPi = std::numbers::pi;

/// ξ values below zero but above this are treated as roundoff (Θ sums of
/// exactly π land here).
inline constexpr double kXiTolerance = 1e-12;

/// Triangle-inequality slacks within this relative band of zero are clamped;
/// larger negative slacks are reported as degeneracy.
inline constexpr double kClampWindow = 1e-9;

using Mat3 = std::array<std::array<double, 3>, 3>;

namespace detail {

constexpr int next(int i) { return (i + 1) % 3; }
constexpr int prev(int i) { return (i + 2) % 3; }

// log(sinh x) for x >= 0, without overflow for large x.
inline double log_sinh(double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  if (x < 20.0) return std::log(std::sinh(x));
  return x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x));
}

inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline void require_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::NonPositiveRadius, "radius must be positive and finite, got " + std::to_string(r));
  }
}

}  // namespace detail

/// Center distance of two circles of radii r_a, r_b meeting at exterior
/// intersection angle theta.
///
/// Both branches use the half-angle form
///   Euclidean:  l^2 = (r_a - r_b)^2 + 4 r_a r_b cos^2(θ/2)
///   hyperbolic: sinh^2(l/2) = sinh^2((r_a - r_b)/2) + sinh r_a sinh r_b cos^2(θ/2)
/// which equals the cosine-law expression and has no cancellation as θ → π.
/// The hyperbolic branch switches to log-domain arithmetic for radii above 30
/// or below 1e-100.
inline double edge_length(Geometry geometry, double r_a, double r_b, double theta) {
  detail::require_radius(r_a);
  detail::require_radius(r_b);
  const double c = std::cos(0.5 * theta);
  const double c2 = c * c;
  if (geometry == Geometry::Euclidean) {
    const double hi = std::max(r_a, r_b);
    const double t = std::min(r_a, r_b) / hi;
    return hi * std::sqrt((1.0 - t) * (1.0 - t) + 4.0 * t * c2);
  }
  const double hi = std::max(r_a, r_b);
  const double lo = std::min(r_a, r_b);
  if (hi <= 30.0 && lo >= 1e-100) {
    const double d = std::sinh(0.5 * (r_a - r_b));
    return 2.0 * std::asinh(std::sqrt(d * d + std::sinh(r_a) * std::sinh(r_b) * c2));
  }
  // S = log sinh^2(l/2); l = S + 2 log(1 + sqrt(1 + e^{-S})).
  const double log_diff = 2.0 * detail::log_sinh(0.5 * std::abs(r_a - r_b));
  const double log_prod = detail::log_sinh(r_a) + detail::log_sinh(r_b) + 2.0 * std::log(c);
  const double s = detail::log_add_exp(log_diff, log_prod);
  if (s < -30.0) {
    // asinh(y) = y(1 - y^2/6 + ...) for tiny y
    const double y = std::exp(0.5 * s);
    return 2.0 * y * (1.0 - y * y / 6.0);
  }
  return s + 2.0 * std::log1p(std::sqrt(1.0 + std::exp(-s)));
}

/// Radii and intersection angles of one triangle, validated against the
/// per-triangle condition ξ ≥ 0 on construction.
class ThreeCircleConfig {
 public:
  ThreeCircleConfig(std::array<double, 3> radii, std::array<double, 3> thetas)
      : radii_(radii), thetas_(thetas) {
    for (int i = 0; i < 3; ++i) {
      detail::require_radius(radii_[i]);
      const double th = thetas_[i];
      if (!(th >= 0.0 && th < kPi)) {
        throw Error(ErrorCode::InvalidInput, "intersection angle must lie in [0, pi), got " + std::to_string(th));
      }
      cosines_[i] = std::cos(th);
    }
    for (int i = 0; i < 3; ++i) {
      xis_[i] = cosines_[i] + cosines_[detail::next(i)] * cosines_[detail::prev(i)];
      if (xis_[i] < -kXiTolerance) {
        throw Error(ErrorCode::C1Violation, "xi_" + std::to_string(i) + " = " + std::to_string(xis_[i]) + " < 0");
      }
    }
  }

  const std::array<double, 3>& radii() const { return radii_; }
  const std::array<double, 3>& thetas() const { return thetas_; }
  const std::array<double, 3>& cosines() const { return cosines_; }
  const std::array<double, 3>& xis() const { return xis_; }

  ThreeCircleConfig with_radius(int i, double r) const {
    auto radii = radii_;
    radii[static_cast<std::size_t>(i)] = r;
    return ThreeCircleConfig(radii, thetas_);
  }

 private:
  std::array<double, 3> radii_;
  std::array<double, 3> thetas_;
  std::array<double, 3> cosines_{};
  std::array<double, 3> xis_{};
};

/// ξ_i = cos Θ_i + cos Θ_j cos Θ_k for all three corners.
inline std::array<double, 3> xi_values(const std::array<double, 3>& thetas) {
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    out[static_cast<std::size_t>(i)] = std::cos(thetas[static_cast<std::size_t>(i)]) +
                                       std::cos(thetas[static_cast<std::size_t>(detail::next(i))]) *
                                           std::cos(thetas[static_cast<std::size_t>(detail::prev(i))]);
  }
  return out;
}

inline bool satisfies_c1(const std::array<double, 3>& thetas) {
  for (double xi : xi_values(thetas)) {
    if (xi < -kXiTolerance) return false;
  }
  return true;
}

inline std::array<double, 3> triangle_lengths(const ThreeCircleConfig& config, Geometry geometry) {
  const auto& r = config.radii();
  std::array<double, 3> l{};
  for (int i = 0; i < 3; ++i) {
    l[static_cast<std::size_t>(i)] = edge_length(geometry, r[static_cast<std::size_t>(detail::next(i))],
                                                 r[static_cast<std::size_t>(detail::prev(i))],
                                                 config.thetas()[static_cast<std::size_t>(i)]);
  }
  return l;
}

/// Strict triangle inequalities on the three center distances. Holds for
/// every configuration with ξ ≥ 0; used as a test oracle.
inline bool check_triangle_inequality(const ThreeCircleConfig& config, Geometry geometry) {
  const auto l = triangle_lengths(config, geometry);
  for (int i = 0; i < 3; ++i) {
    if (!(l[static_cast<std::size_t>(i)] <
          l[static_cast<std::size_t>(detail::next(i))] + l[static_cast<std::size_t>(detail::prev(i))])) {
      return false;
    }
  }
  return true;
}

struct TriangleAngles {
  std::array<double, 3> angles{};   // inner angle at each center
  std::array<double, 3> lengths{};  // l_i opposite corner i
  double area = 0.0;                // hyperbolic only: π - Σ angles

  double angle_sum() const { return angles[0] + angles[1] + angles[2]; }
};

namespace detail {

// Semi-perimeter and the three slacks s - l_i, with roundoff clamping.
struct Slacks {
  double s;
  std::array<double, 3> d;
};

inline Slacks triangle_slacks(const std::array<double, 3>& l) {
  Slacks out{0.5 * (l[0] + l[1] + l[2]), {}};
  for (int i = 0; i < 3; ++i) {
    double d = 0.5 * (l[static_cast<std::size_t>(next(i))] + l[static_cast<std::size_t>(prev(i))] -
                      l[static_cast<std::size_t>(i)]);
    if (d <= 0.0) {
      if (d < -kClampWindow * out.s || !std::isfinite(d)) {
        throw Error(ErrorCode::NumericalDegeneracy,
                    "center triangle violates the triangle inequality by " + std::to_string(-d));
      }
      d = 0.0;
    }
    out.d[static_cast<std::size_t>(i)] = d;
  }
  return out;
}

// log of sin-like factor: Euclidean uses x, hyperbolic sinh x.
inline double log_side(Geometry g, double x) {
  if (g == Geometry::Euclidean) {
    return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
  }
  return log_sinh(x);
}

}  // namespace detail

/// Inner angles of the center triangle by the half-angle form of the cosine
/// law, tan(ϑ_i/2)^2 = f(s-l_j) f(s-l_k) / (f(s) f(s-l_i)) with f = id
/// (Euclidean) or sinh (hyperbolic), evaluated in log space.
inline TriangleAngles inner_angles(const ThreeCircleConfig& config, Geometry geometry) {
  TriangleAngles out;
  out.lengths = triangle_lengths(config, geometry);
  const auto slack = detail::triangle_slacks(out.lengths);
  const double log_s = detail::log_side(geometry, slack.s);
  std::array<double, 3> log_d{};
  for (int i = 0; i < 3; ++i) log_d[static_cast<std::size_t>(i)] = detail::log_side(geometry, slack.d[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 3; ++i) {
    const double p = log_d[static_cast<std::size_t>(detail::next(i))] + log_d[static_cast<std::size_t>(detail::prev(i))];
    const double q = log_s + log_d[static_cast<std::size_t>(i)];
    double angle;
    if (p == -std::numeric_limits<double>::infinity()) {
      angle = 0.0;
    } else if (q == -std::numeric_limits<double>::infinity()) {
      angle = kPi;
    } else {
      const double m = std::max(p, q);
      angle = 2.0 * std::atan2(std::exp(0.5 * (p - m)), std::exp(0.5 * (q - m)));
    }
    out.angles[static_cast<std::size_t>(i)] = angle;
  }
  if (geometry == Geometry::Hyperbolic) out.area = kPi - out.angle_sum();
  return out;
}

/// ∂ϑ_a/∂r_b for the three corners, from the chain rule through the lengths:
///   Euclidean:  ∂ϑ_a/∂l_a = l_a/Γ,        ∂ϑ_a/∂l_c = -l_a cos ϑ_b / Γ,
///               ∂l_c/∂r_b = (r_b + r_a cos Θ_c) / l_c
///   hyperbolic: ∂ϑ_a/∂l_a = sinh l_a/Υ,   ∂ϑ_a/∂l_c = -sinh l_a cos ϑ_b / Υ,
///               ∂l_c/∂r_b = (cosh r_a sinh r_b + cos Θ_c cosh r_b sinh r_a) / sinh l_c
/// where {a, b, c} = {0, 1, 2}, Γ = l_b l_c sin ϑ_a and Υ = sinh l_b sinh l_c sin ϑ_a
/// (both corner-independent by the sine law).
inline Mat3 angle_derivatives(const ThreeCircleConfig& config, Geometry geometry, const TriangleAngles& tri) {
  const auto& r = config.radii();
  const auto& l = tri.lengths;
  const auto slack = detail::triangle_slacks(l);
  double log_gamma = std::log(2.0) + 0.5 * detail::log_side(geometry, slack.s);
  for (double d : slack.d) log_gamma += 0.5 * detail::log_side(geometry, d);
  if (!std::isfinite(log_gamma)) {
    throw Error(ErrorCode::NumericalDegeneracy, "degenerate center triangle in angle derivatives");
  }

  std::array<double, 3> cos_angle{};
  std::array<double, 3> scaled_side{};  // l_a / Γ  or  sinh l_a / Υ
  for (int a = 0; a < 3; ++a) {
    cos_angle[static_cast<std::size_t>(a)] = std::cos(tri.angles[static_cast<std::size_t>(a)]);
    scaled_side[static_cast<std::size_t>(a)] =
        std::exp(detail::log_side(geometry, l[static_cast<std::size_t>(a)]) - log_gamma);
  }

  Mat3 dtheta_dl{};
  for (int a = 0; a < 3; ++a) {
    for (int c = 0; c < 3; ++c) {
      if (a == c) {
        dtheta_dl[a][c] = scaled_side[static_cast<std::size_t>(a)];
      } else {
        const int b = 3 - a - c;
        dtheta_dl[a][c] = -scaled_side[static_cast<std::size_t>(a)] * cos_angle[static_cast<std::size_t>(b)];
      }
    }
  }

  Mat3 dl_dr{};
  for (int c = 0; c < 3; ++c) {
    for (int b = 0; b < 3; ++b) {
      if (b == c) continue;
      const int a = 3 - b - c;
      const double cos_theta = config.cosines()[static_cast<std::size_t>(c)];
      const auto lc = l[static_cast<std::size_t>(c)];
      const auto rb = r[static_cast<std::size_t>(b)];
      const auto ra = r[static_cast<std::size_t>(a)];
      if (geometry == Geometry::Euclidean) {
        dl_dr[c][b] = (rb + ra * cos_theta) / lc;
      } else {
        dl_dr[c][b] = (std::cosh(ra) * std::sinh(rb) + cos_theta * std::cosh(rb) * std::sinh(ra)) / std::sinh(lc);
      }
    }
  }

  Mat3 out{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double sum = 0.0;
      for (int c = 0; c < 3; ++c) sum += dtheta_dl[a][c] * dl_dr[c][b];
      if (!std::isfinite(sum)) throw Error(ErrorCode::NumericalDegeneracy, "non-finite angle derivative");
      out[a][b] = sum;
    }
  }
  return out;
}

inline Mat3 angle_derivatives(const ThreeCircleConfig& config, Geometry geometry) {
  return angle_derivatives(config, geometry, inner_angles(config, geometry));
}

/// Conformal weight w(r) with dr/du = w(r): r (Euclidean), sinh r (hyperbolic).
inline double conformal_weight(Geometry geometry, double r) {
  return geometry == Geometry::Euclidean ? r : std::sinh(r);
}

// ---------------------------------------------------------------------------
// Limit probes. These evaluate angle functionals along parameter sequences that
// approach the degenerate boundary of the radius domain.

struct AsymptoticProbe {
  std::vector<double> parameters;
  std::vector<double> values;
  double expected_limit = 0.0;

  double final_error() const { return values.empty() ? std::numeric_limits<double>::infinity() : std::abs(values.back() - expected_limit); }
};

/// Evaluates quantity(inner_angles(family(t))) for each t in parameters.
template <class Family, class Quantity>
AsymptoticProbe asymptotic_probe(Geometry geometry, Family&& family, Quantity&& quantity,
                                 std::span<const double> parameters, double expected_limit) {
  AsymptoticProbe out;
  out.expected_limit = expected_limit;
  for (double t : parameters) {
    const ThreeCircleConfig config = family(t);
    out.parameters.push_back(t);
    out.values.push_back(quantity(inner_angles(config, geometry)));
  }
  return out;
}

/// Decades 1e-1, 1e-2, ..., 10^-last.
inline std::vector<double> shrinking_sequence(int last_decade) {
  std::vector<double> out;
  for (int k = 1; k <= last_decade; ++k) out.push_back(std::pow(10.0, -k));
  return out;
}

/// ϑ_i as r_i → 0 with the other radii fixed; limit π - Θ_i.
inline AsymptoticProbe probe_vanishing_radius(Geometry geometry, const ThreeCircleConfig& base, int i,
                                              std::span<const double> radii) {
  return asymptotic_probe(
      geometry, [&](double t) { return base.with_radius(i, t); },
      [i](const TriangleAngles& a) { return a.angles[static_cast<std::size_t>(i)]; }, radii,
      kPi - base.thetas()[static_cast<std::size_t>(i)]);
}

/// ϑ_i + ϑ_j as r_i, r_j → 0 together, r_k fixed; limit π.
inline AsymptoticProbe probe_vanishing_pair(Geometry geometry, const ThreeCircleConfig& base, int i, int j,
                                            std::span<const double> radii) {
  return asymptotic_probe(
      geometry, [&](double t) { return base.with_radius(i, t).with_radius(j, t); },
      [i, j](const TriangleAngles& a) {
        return a.angles[static_cast<std::size_t>(i)] + a.angles[static_cast<std::size_t>(j)];
      },
      radii, kPi);
}

/// Angle sum as all radii → 0 (scaled copies of the base radii); limit π.
inline AsymptoticProbe probe_vanishing_all(Geometry geometry, const ThreeCircleConfig& base,
                                           std::span<const double> scales) {
  return asymptotic_probe(
      geometry,
      [&](double t) {
        auto r = base.radii();
        for (auto& x : r) x *= t;
        return ThreeCircleConfig(r, base.thetas());
      },
      [](const TriangleAngles& a) { return a.angle_sum(); }, scales, kPi);
}

/// ϑ_i as r_i grows (hyperbolic); limit 0.
inline AsymptoticProbe probe_large_radius(const ThreeCircleConfig& base, int i, std::span<const double> radii) {
  return asymptotic_probe(
      Geometry::Hyperbolic, [&](double t) { return base.with_radius(i, t); },
      [i](const TriangleAngles& a) { return a.angles[static_cast<std::size_t>(i)]; }, radii, 0.0);
}

}  // namespace circleflow
