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

#include <map>
#include <random>
#include <set>

#include "test_support.hpp"

namespace circleflow {
namespace {

using testing::hex_fan;
using testing::single_triangle;
using testing::square;
using testing::torus7;
using testing::torus_minus_face;

ErrorCode build_error(std::vector<Triangle> t) {
  try {
    TriangulatedSurface::build(std::move(t));
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected build failure";
  return ErrorCode::InvalidInput;
}

TEST(Mesh, SingleTriangleCounts) {
  const auto s = single_triangle();
  EXPECT_EQ(s.num_vertices(), 3);
  EXPECT_EQ(s.num_edges(), 3);
  EXPECT_EQ(s.num_faces(), 1);
  EXPECT_EQ(s.euler_characteristic(), 1);
  EXPECT_EQ(s.boundary_component_count(), 1);
  EXPECT_EQ(s.boundary_vertices().size(), 3U);
}

TEST(Mesh, HexFanIsDisk) {
  const auto s = hex_fan();
  EXPECT_EQ(s.num_vertices(), 7);
  EXPECT_EQ(s.num_edges(), 12);
  EXPECT_EQ(s.num_faces(), 6);
  EXPECT_EQ(s.euler_characteristic(), 1);
  EXPECT_FALSE(s.is_boundary_vertex(0));
  for (int v = 1; v <= 6; ++v) EXPECT_TRUE(s.is_boundary_vertex(v));
  ASSERT_EQ(s.boundary_cycles().size(), 1U);
  EXPECT_EQ(s.boundary_cycles()[0].size(), 6U);
  EXPECT_EQ(s.genus(), 0);
}

TEST(Mesh, SevenVertexTorus) {
  const auto s = torus7();
  EXPECT_EQ(s.num_vertices(), 7);
  EXPECT_EQ(s.num_edges(), 21);
  EXPECT_EQ(s.num_faces(), 14);
  EXPECT_EQ(s.euler_characteristic(), 0);
  EXPECT_FALSE(s.has_boundary());
  EXPECT_EQ(s.genus(), 1);
  for (int v = 0; v < 7; ++v) EXPECT_EQ(s.vertex_neighbors(v).size(), 6U);
}

TEST(Mesh, TorusMinusFace) {
  const auto s = torus_minus_face();
  EXPECT_EQ(s.euler_characteristic(), -1);
  EXPECT_EQ(s.boundary_component_count(), 1);
  EXPECT_EQ(s.genus(), 1);
}

TEST(Mesh, EdgeLookup) {
  const auto s = square();
  const int e = s.edge_index(4, 1);
  EXPECT_EQ(s.edge(e).a, 1);
  EXPECT_EQ(s.edge(e).b, 4);
  EXPECT_FALSE(s.edge(e).is_boundary());
  EXPECT_TRUE(s.edge(s.edge_index(0, 1)).is_boundary());
  EXPECT_EQ(s.find_edge(0, 2), -1);
  EXPECT_THROW(s.edge_index(0, 2), Error);
  for (int t = 0; t < s.num_faces(); ++t) {
    for (int c = 0; c < 3; ++c) {
      const auto& edge = s.edge(s.triangle_edges(t)[static_cast<std::size_t>(c)]);
      EXPECT_FALSE(edge.has_vertex(s.triangle(t)[static_cast<std::size_t>(c)]));
    }
  }
}

TEST(Mesh, RejectsEdgeInThreeTriangles) {
  EXPECT_EQ(build_error({{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}), ErrorCode::NonManifold);
}

TEST(Mesh, RejectsInconsistentOrientation) {
  EXPECT_EQ(build_error({{0, 1, 2}, {0, 1, 3}}), ErrorCode::InconsistentOrientation);
}

TEST(Mesh, RejectsPinchedVertex) {
  // Two triangles sharing only vertex 0.
  EXPECT_EQ(build_error({{0, 1, 2}, {0, 3, 4}}), ErrorCode::NonManifold);
}

TEST(Mesh, RejectsDegenerateAndEmpty) {
  EXPECT_EQ(build_error({}), ErrorCode::InvalidInput);
  EXPECT_EQ(build_error({{0, 0, 1}}), ErrorCode::InvalidInput);
  EXPECT_EQ(build_error({{0, -1, 2}}), ErrorCode::InvalidInput);
}

TEST(Mesh, RejectsDuplicateFace) {
  EXPECT_NE(build_error({{0, 1, 2}, {0, 1, 2}}), ErrorCode::InvalidInput);
}

// ---------------------------------------------------------------------------
// Subset analysis against a brute-force cell count built from the raw
// triangle list only.

struct Oracle {
  int counting = 0;
  int euler = 0;
  int chi_open = 0;
  int chi_boundary = 0;
};

Oracle brute_force(const std::vector<Triangle>& tris, const std::set<int>& A) {
  std::map<std::pair<int, int>, int> edge_faces;
  std::set<int> verts;
  for (const auto& t : tris) {
    for (int c = 0; c < 3; ++c) {
      const int a = t[static_cast<std::size_t>(c)], b = t[static_cast<std::size_t>((c + 1) % 3)];
      ++edge_faces[{std::min(a, b), std::max(a, b)}];
      verts.insert(a);
    }
  }
  std::set<int> bverts;
  for (const auto& [e, n] : edge_faces) {
    if (n == 1) {
      bverts.insert(e.first);
      bverts.insert(e.second);
    }
  }
  auto in = [&](int v) { return A.count(v) > 0; };
  int faces = 0, link = 0;
  for (const auto& t : tris) {
    const int k = in(t[0]) + in(t[1]) + in(t[2]);
    faces += k > 0;
    link += k == 1;
  }
  int a_boundary = 0, a_interior = 0;
  for (int v : A) (bverts.count(v) ? a_boundary : a_interior)++;
  int e_open = 0, e_bd = 0;
  for (const auto& [e, n] : edge_faces) {
    if (!in(e.first) && !in(e.second)) continue;
    (n == 1 ? e_bd : e_open)++;
  }
  Oracle o;
  o.counting = 2 * static_cast<int>(A.size()) - faces + link - a_boundary;
  o.chi_open = a_interior - e_open + faces;
  o.chi_boundary = a_boundary - e_bd;
  o.euler = 2 * o.chi_open + o.chi_boundary;
  return o;
}

void check_all_subsets(const TriangulatedSurface& s) {
  const std::vector<Triangle> tris(s.triangles().begin(), s.triangles().end());
  const int n = s.num_vertices();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    const auto subset = subset_from_mask(mask);
    const auto a = analyze_subset(s, subset);
    const auto o = brute_force(tris, std::set<int>(subset.begin(), subset.end()));
    ASSERT_EQ(a.counting_side(), o.counting) << "mask " << mask;
    ASSERT_EQ(a.euler_side(), o.euler) << "mask " << mask;
    ASSERT_EQ(o.counting, o.euler) << "mask " << mask;
    ASSERT_EQ(a.chi_open, o.chi_open);
    ASSERT_EQ(a.chi_boundary, o.chi_boundary);
    ASSERT_EQ(a.chi_boundary, -a.open_arc_components);
  }
}

TEST(SubsetAnalysis, IdentityOnAllSubsetsOfSmallFixtures) {
  check_all_subsets(single_triangle());
  check_all_subsets(hex_fan());
  check_all_subsets(square());
  check_all_subsets(torus_minus_face());
}

TEST(SubsetAnalysis, IdentityOnAllTorusSubsets) {
  check_all_subsets(torus7());
}

TEST(SubsetAnalysis, IdentityOnRandomGridDisks) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = testing::grid_disk(3, 4, rng);
    check_all_subsets(s);
  }
}

TEST(SubsetAnalysis, SingleTriangleVertex) {
  const auto s = single_triangle();
  const auto a = analyze_subset(s, {0});
  EXPECT_EQ(a.star_triangles.size(), 1U);
  ASSERT_EQ(a.link_pairs.size(), 1U);
  EXPECT_EQ(a.link_pairs[0].vertex, 0);
  EXPECT_EQ(a.link_pairs[0].edge, s.edge_index(1, 2));
  EXPECT_EQ(a.chi_open, 1);       // triangle only
  EXPECT_EQ(a.chi_boundary, -1);  // vertex 0 with its two half-open edges
  EXPECT_EQ(a.counting_side(), 1);
}

TEST(SubsetAnalysis, WholeClosedSurface) {
  const auto s = torus7();
  std::vector<int> all{0, 1, 2, 3, 4, 5, 6};
  const auto a = analyze_subset(s, all);
  EXPECT_EQ(a.chi_open, 0);
  EXPECT_EQ(a.chi_boundary, 0);
  EXPECT_TRUE(a.link_pairs.empty());
}

TEST(SubsetAnalysis, WholeBoundaryCycleIsClosed) {
  const auto s = hex_fan();
  const auto a = analyze_subset(s, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(a.open_arc_components, 0);
  EXPECT_EQ(a.chi_boundary, 0);
}

TEST(SubsetAnalysis, DuplicatesAreMerged) {
  const auto s = hex_fan();
  const auto a = analyze_subset(s, {3, 1, 3});
  EXPECT_EQ(a.subset, (std::vector<int>{1, 3}));
}

TEST(SubsetAnalysis, Errors) {
  const auto s = hex_fan();
  try {
    analyze_subset(s, std::span<const int>());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySubset);
  }
  EXPECT_THROW(analyze_subset(s, {7}), Error);
}

}  // namespace
}  // namespace circleflow
