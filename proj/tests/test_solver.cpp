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


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "test_support.hpp"

namespace circleflow {
namespace {

constexpr Geometry kEuc = Geometry::Euclidean;
constexpr Geometry kHyp = Geometry::Hyperbolic;

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

CurvatureTarget fan_target() {
  Eigen::VectorXd k = Eigen::VectorXd::Constant(7, kPi / 3);
  k[0] = 0.0;
  return {kEuc, k};
}

TEST(FlowRhs, EquilateralFan) {
  const auto s = testing::hex_fan();
  const auto th = AngleAssignment::constant(s, 0.0);
  const auto r = RadiusVector::Ones(7);
  // Euclidean, k ≡ 0: rhs = -K = (0, -π/3, ...).
  const auto e = flow_rhs(s, th, r_to_u(r, kEuc), FlowSpec::for_target(CurvatureTarget::zero(s, kEuc)));
  EXPECT_NEAR(e[0], 0.0, 1e-14);
  for (int v = 1; v <= 6; ++v) EXPECT_NEAR(e[v], -kPi / 3, 1e-14);
  // Hyperbolic, k ≡ 0: equilateral side-2 triangles with angle acos(cosh 2 / (cosh 2 + 1)).
  const double c2 = std::cosh(2.0);
  const double angle = std::acos(c2 / (c2 + 1.0));
  const auto h = flow_rhs(s, th, r_to_u(r, kHyp), FlowSpec::for_target(CurvatureTarget::zero(s, kHyp)));
  EXPECT_NEAR(h[0], -(2 * kPi - 6 * angle), 1e-13);
  for (int v = 1; v <= 6; ++v) EXPECT_NEAR(h[v], -(kPi - 2 * angle), 1e-13);
  // Solution point.
  const auto z = flow_rhs(s, th, r_to_u(r, kEuc), FlowSpec::for_target(fan_target()));
  EXPECT_LT(max_abs(z), 1e-14);
}

TEST(FlowRhs, NormalizedSumVanishes) {
  std::mt19937_64 rng(53);
  const auto s = testing::torus7();
  const auto th = testing::random_angles(s, rng);
  const auto rhs = flow_rhs(s, th, r_to_u(testing::random_radii(7, rng), kEuc), FlowSpec::normalized(s));
  EXPECT_NEAR(rhs.sum(), 0.0, 1e-12);
}

TEST(IntegrateFlow, TorusNormalizedConvergesToConstantRadii) {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> d(0.5, 2.0);
  const auto s = testing::torus7();
  const auto th = AngleAssignment::constant(s, 0.0);
  RadiusVector r0(7);
  for (int i = 0; i < 7; ++i) r0[i] = d(rng);
  const auto rep = integrate_flow(s, th, r0, FlowSpec::normalized(s));
  ASSERT_TRUE(rep.converged()) << rep.message;
  EXPECT_LE(max_abs(curvature_map(s, th, rep.r, kEuc).curvature), 1e-10);
  EXPECT_NEAR(rep.r.prod() / r0.prod(), 1.0, 1e-8);
  EXPECT_LT((rep.r.array() / rep.r[0] - 1.0).abs().maxCoeff(), 1e-9);
  EXPECT_LE(rep.conserved_drift, 1e-9 * rep.times.back());
}

TEST(IntegrateFlow, FanRecoversUniformRadii) {
  const auto s = testing::hex_fan();
  const auto th = AngleAssignment::constant(s, 0.0);
  RadiusVector r0 = RadiusVector::Constant(7, 0.4);
  r0[0] = 3.0;
  const auto rep = integrate_flow(s, th, r0, FlowSpec::for_target(fan_target()));
  ASSERT_TRUE(rep.converged());
  EXPECT_LT((rep.r.array() / rep.r[0] - 1.0).abs().maxCoeff(), 1e-9);
}

TEST(IntegrateFlow, HyperbolicZeroOnDiskDoesNotConverge) {
  const auto s = testing::hex_fan();
  FlowSpec spec = FlowSpec::for_target(CurvatureTarget::zero(s, kHyp));
  spec.max_steps = 10000;
  const auto rep = integrate_flow(s, AngleAssignment::constant(s, 0.0), RadiusVector::Ones(7), spec);
  EXPECT_EQ(rep.status, SolveStatus::MaxStepsExceeded);
  EXPECT_FALSE(rep.message.empty());
  for (double x : rep.residuals) EXPECT_GT(x, 0.1);
  EXPECT_TRUE((rep.u.array() < 0.0).all());
  EXPECT_THROW(fit_rate(rep), Error);
}

TEST(IntegrateFlow, EnergyDoesNotIncrease) {
  std::mt19937_64 rng(61);
  const auto s = testing::grid_disk(4, 4, rng);
  const auto th = testing::random_angles(s, rng);
  for (Geometry g : {kEuc, kHyp}) {
    const auto K = curvature_map(s, th, testing::random_radii(16, rng), g).curvature;
    FlowSpec spec = FlowSpec::for_target({g, K});
    spec.track_energy = true;
    const auto rep = integrate_flow(s, th, RadiusVector::Ones(16), spec);
    ASSERT_TRUE(rep.converged());
    ASSERT_EQ(rep.energy.size(), rep.residuals.size());
    for (std::size_t i = 1; i < rep.energy.size(); ++i) EXPECT_LE(rep.energy[i], rep.energy[i - 1] + 1e-12);
  }
}

TEST(IntegrateFlow, Preconditions) {
  const auto s = testing::hex_fan();
  std::vector<double> th(12, 0.0);
  th[static_cast<std::size_t>(s.edge_index(1, 2))] = 0.9 * kPi;
  th[static_cast<std::size_t>(s.edge_index(0, 2))] = 0.9 * kPi;
  try {
    integrate_flow(s, AngleAssignment(s, th), RadiusVector::Ones(7), FlowSpec::for_target(fan_target()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::C1Violation);
  }
  FlowSpec bad = FlowSpec::for_target(fan_target());
  bad.normalization = Normalization::MeanCurvature;
  EXPECT_THROW(integrate_flow(s, AngleAssignment::constant(s, 0.0), RadiusVector::Ones(7), bad), Error);
  bad = FlowSpec::for_target(fan_target());
  bad.step.initial_dt = 0.0;
  EXPECT_THROW(integrate_flow(s, AngleAssignment::constant(s, 0.0), RadiusVector::Ones(7), bad), Error);
}

TEST(NewtonSolve, StartAtSolution) {
  const auto s = testing::hex_fan();
  const auto rep = newton_solve(s, AngleAssignment::constant(s, 0.0), RadiusVector::Ones(7), fan_target());
  EXPECT_TRUE(rep.converged());
  EXPECT_EQ(rep.iterations, 0);
}

TEST(NewtonSolve, RecoversRadiiFromTheirCurvature) {
  std::mt19937_64 rng(67);
  for (int n = 0; n < 24; ++n) {
    TriangulatedSurface s;
    switch (n % 4) {
      case 0: s = testing::hex_fan(); break;
      case 1: s = testing::torus7(); break;
      case 2: s = testing::torus_minus_face(); break;
      default: s = testing::grid_disk(5, 5, rng); break;
    }
    const auto th = testing::random_angles(s, rng);
    const Geometry g = n % 8 < 4 ? kHyp : kEuc;
    const auto r_star = testing::random_radii(s.num_vertices(), rng, 0.3, 3.0);
    const CurvatureTarget target{g, curvature_map(s, th, r_star, g).curvature};
    const auto rep = newton_solve(s, th, RadiusVector::Ones(s.num_vertices()), target);
    ASSERT_TRUE(rep.converged()) << "instance " << n << ' ' << rep.message;
    EXPECT_LE(max_abs(curvature_map(s, th, rep.r, g).curvature - target.k), 1e-10);
    const auto u_star = r_to_u(r_star, g).u;
    const Eigen::VectorXd du = g == kEuc ? Eigen::VectorXd(align_gauge(rep.u, 0.0) - align_gauge(u_star, 0.0))
                                         : Eigen::VectorXd(rep.u - u_star);
    EXPECT_LT(max_abs(du), 1e-8) << "instance " << n;
    if (g == kEuc) {
      EXPECT_NEAR(rep.u.sum(), 0.0, 1e-9);  // stays on the start hyperplane
    }
  }
}

TEST(NewtonSolve, AgreesWithFlowOnFan) {
  const auto s = testing::hex_fan();
  const auto th = AngleAssignment::constant(s, 0.0);
  RadiusVector r0 = RadiusVector::Constant(7, 0.4);
  r0[0] = 3.0;
  const auto flow = integrate_flow(s, th, r0, FlowSpec::for_target(fan_target()));
  const auto newton = newton_solve(s, th, UCoordinates{kEuc, Eigen::VectorXd::Zero(7)}, fan_target());
  ASSERT_TRUE(flow.converged());
  ASSERT_TRUE(newton.converged());
  EXPECT_LT(max_abs(align_gauge(flow.u, 0.0) - align_gauge(newton.u, 0.0)), 1e-8);
}

TEST(NewtonSolve, EnergyDoesNotIncrease) {
  std::mt19937_64 rng(71);
  const auto s = testing::torus_minus_face();
  const auto th = testing::random_angles(s, rng);
  const auto K = curvature_map(s, th, testing::random_radii(7, rng, 0.05, 0.2), kHyp).curvature;
  const auto rep = newton_solve(s, th, RadiusVector::Constant(7, 3.0), {kHyp, K});
  ASSERT_TRUE(rep.converged());
  for (std::size_t i = 1; i < rep.energy.size(); ++i) EXPECT_LE(rep.energy[i], rep.energy[i - 1]);
}

TEST(NewtonSolve, UnattainableTargetFails) {
  const auto s = testing::hex_fan();
  const auto rep =
      newton_solve(s, AngleAssignment::constant(s, 0.0), RadiusVector::Ones(7), CurvatureTarget::zero(s, kHyp));
  EXPECT_FALSE(rep.converged());
  EXPECT_TRUE(rep.status == SolveStatus::Diverged || rep.status == SolveStatus::LineSearchFailed);
  EXPECT_GT(rep.final_residual(), 0.1);
}

TEST(NewtonSolve, ObtuseFanHasSymmetricSolution) {
  // Spokes tangent, rim circles crossing at 0.6π. With center curvature 0 and
  // rim π/3 every center triangle is equilateral: R + r = r sqrt(2 + 2 cos 0.6π).
  const auto s = testing::hex_fan();
  std::vector<double> th(12, 0.0);
  for (int i = 1; i <= 6; ++i) th[static_cast<std::size_t>(s.edge_index(i, i % 6 + 1))] = 0.6 * kPi;
  const auto rep = newton_solve(s, AngleAssignment(s, th), RadiusVector::Ones(7), fan_target());
  ASSERT_TRUE(rep.converged());
  EXPECT_LE(rep.final_residual(), 1e-10);
  EXPECT_NEAR(rep.r[0] / rep.r[1], std::sqrt(2 + 2 * std::cos(0.6 * kPi)) - 1, 1e-9);
}

TEST(NewtonSolve, SingleTriangleMatchesBisectionOracle) {
  std::mt19937_64 rng(73);
  const auto s = testing::single_triangle();
  for (int n = 0; n < 10; ++n) {
    const auto th = testing::random_angles(s, rng, 0.5);
    const auto K = curvature_map(s, th, testing::random_radii(3, rng), kEuc).curvature;
    const auto rep = newton_solve(s, th, RadiusVector::Ones(3), {kEuc, K});
    ASSERT_TRUE(rep.converged());
    const auto tt = th.triangle_thetas(s, 0);
    const auto want = oracle::bisect_triangle({tt[0], tt[1], tt[2]}, kPi - K[0], kPi - K[1]);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(rep.r[i] / rep.r[0], static_cast<double>(want[i]), 1e-7 * static_cast<double>(want[i]));
    // Realized angles are π - k.
    const auto ang = inner_angles(ThreeCircleConfig({rep.r[0], rep.r[1], rep.r[2]}, tt), kEuc);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(ang.angles[i], kPi - K[i], 1e-10);
  }
}

TEST(Energy, PathIndependence) {
  std::mt19937_64 rng(79);
  const auto s = testing::torus_minus_face();
  const auto th = testing::random_angles(s, rng);
  for (Geometry g : {kEuc, kHyp}) {
    const CurvatureTarget target = CurvatureTarget::zero(s, g);
    const auto a = r_to_u(testing::random_radii(7, rng, 0.3, 2.0), g);
    const auto b = r_to_u(testing::random_radii(7, rng, 0.3, 2.0), g);
    auto mid = r_to_u(testing::random_radii(7, rng, 0.3, 2.0), g);
    // Polylines with short segments keep the 8-point quadrature error below 1e-10.
    auto polyline = [&](const std::vector<const UCoordinates*>& corners) {
      std::vector<UCoordinates> path{*corners.front()};
      for (std::size_t c = 1; c < corners.size(); ++c) {
        for (int i = 1; i <= 16; ++i) {
          path.push_back({g, corners[c - 1]->u + (corners[c]->u - corners[c - 1]->u) * (i / 16.0)});
        }
      }
      return path;
    };
    const double direct = path_energy(s, th, target, polyline({&a, &b}));
    const double bent = path_energy(s, th, target, polyline({&a, &mid, &b}));
    EXPECT_NEAR(direct, bent, 1e-10);
    EXPECT_NEAR(direct, energy_difference(s, th, target, a, b), 1e-7);
  }
}

TEST(FitRate, TorusRunIsExponential) {
  const auto s = testing::torus7();
  const auto th = AngleAssignment::constant(s, 0.0);
  RadiusVector r0(7);
  r0 << 0.6, 1.7, 0.9, 1.2, 1.9, 0.55, 1.0;
  FlowSpec spec = FlowSpec::normalized(s);
  const auto rep = integrate_flow(s, th, r0, spec);
  ASSERT_TRUE(rep.converged());
  const auto fit = fit_rate(rep);
  EXPECT_GT(fit.rate, 0.0);
  EXPECT_GT(fit.r_squared, 0.99);
  spec.tolerance = 2e-10;
  const auto loose = fit_rate(integrate_flow(s, th, r0, spec));
  EXPECT_LT(std::abs(loose.rate - fit.rate), 0.1 * fit.rate);
}

TEST(FitRate, NeedsHistory) {
  std::vector<double> t{0, 1, 2}, r{1, 0.5, 0.25};
  EXPECT_THROW(fit_rate(t, r), Error);
  std::vector<double> tt, rr;
  for (int i = 0; i < 60; ++i) {
    tt.push_back(0.1 * i);
    rr.push_back(3.0 * std::exp(-2.0 * 0.1 * i));
  }
  const auto fit = fit_rate(tt, rr);
  EXPECT_NEAR(fit.rate, 2.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.samples, 30U);
}

}  // namespace
}  // namespace circleflow
