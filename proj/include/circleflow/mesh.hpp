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

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "circleflow/error.hpp"

namespace circleflow {

using Triangle = std::array<int, 3>;

/// Unordered edge stored as a sorted vertex pair (a < b) together with the
/// triangles that contain it.
struct Edge {
  int a = -1;
  int b = -1;
  std::array<int, 2> faces{-1, -1};
  int face_count = 0;

  bool is_boundary() const { return face_count == 1; }
  bool has_vertex(int v) const { return a == v || b == v; }
  int other(int v) const { return v == a ? b : a; }
};

/// Oriented triangulated compact surface, possibly with boundary.
///
/// Immutable after construction. Construction validates the manifold
/// conditions (each edge in one or two triangles, each vertex star a single
/// fan), consistent orientation and connectivity of the 1-skeleton.
class TriangulatedSurface {
 public:
  static TriangulatedSurface build(std::vector<Triangle> triangles) {
    TriangulatedSurface s;
    s.build_impl(std::move(triangles));
    return s;
  }

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_faces() const { return static_cast<int>(triangles_.size()); }

  std::span<const Triangle> triangles() const { return triangles_; }
  const Triangle& triangle(int t) const { return triangles_[static_cast<std::size_t>(t)]; }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

  /// Edge index of the corner-opposite edge: triangle_edges(t)[c] joins the two
  /// corners of t other than c.
  const std::array<int, 3>& triangle_edges(int t) const {
    return triangle_edges_[static_cast<std::size_t>(t)];
  }

  /// Index of edge {a, b}, or -1 when the pair is not an edge.
  int find_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = edge_lookup_.find(key(a, b));
    return it == edge_lookup_.end() ? -1 : it->second;
  }

  int edge_index(int a, int b) const {
    const int e = find_edge(a, b);
    if (e < 0) {
      throw Error(ErrorCode::InvalidInput,
                  "no edge " + std::to_string(a) + "-" + std::to_string(b));
    }
    return e;
  }

  std::span<const int> vertex_triangles(int v) const {
    return vertex_triangles_[static_cast<std::size_t>(v)];
  }
  std::span<const int> vertex_neighbors(int v) const {
    return vertex_neighbors_[static_cast<std::size_t>(v)];
  }

  bool is_boundary_vertex(int v) const { return boundary_flag_[static_cast<std::size_t>(v)] != 0; }
  std::span<const int> boundary_vertices() const { return boundary_vertices_; }
  std::span<const int> boundary_edges() const { return boundary_edges_; }
  bool has_boundary() const { return !boundary_edges_.empty(); }

  /// Boundary components as cyclic vertex sequences.
  const std::vector<std::vector<int>>& boundary_cycles() const { return boundary_cycles_; }

  int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }
  int boundary_component_count() const { return static_cast<int>(boundary_cycles_.size()); }
  int genus() const { return (2 - boundary_component_count() - euler_characteristic()) / 2; }

  /// Corner index (0..2) of vertex v in triangle t, or -1.
  int corner_of(int t, int v) const {
    const auto& tri = triangle(t);
    for (int c = 0; c < 3; ++c) {
      if (tri[static_cast<std::size_t>(c)] == v) return c;
    }
    return -1;
  }

 private:
  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }

  void build_impl(std::vector<Triangle> triangles) {
    if (triangles.empty()) throw Error(ErrorCode::InvalidInput, "surface needs at least one triangle");
    int max_index = -1;
    for (const auto& t : triangles) {
      for (int v : t) {
        if (v < 0) throw Error(ErrorCode::InvalidInput, "negative vertex index");
        max_index = std::max(max_index, v);
      }
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
        throw Error(ErrorCode::InvalidInput, "degenerate triangle (" + std::to_string(t[0]) + "," +
                                                 std::to_string(t[1]) + "," + std::to_string(t[2]) + ")");
      }
    }
    num_vertices_ = max_index + 1;
    triangles_ = std::move(triangles);

    const auto nv = static_cast<std::size_t>(num_vertices_);
    vertex_triangles_.assign(nv, {});
    for (int t = 0; t < num_faces(); ++t) {
      for (int v : triangles_[static_cast<std::size_t>(t)]) vertex_triangles_[static_cast<std::size_t>(v)].push_back(t);
    }
    for (std::size_t v = 0; v < nv; ++v) {
      if (vertex_triangles_[v].empty()) {
        throw Error(ErrorCode::InvalidInput,
                    "vertex indices must be dense; vertex " + std::to_string(v) + " is unused");
      }
    }

    // Edges, with the direction each triangle traverses them.
    triangle_edges_.assign(triangles_.size(), {-1, -1, -1});
    std::vector<std::array<int, 2>> directions;  // +1 when a triangle walks a->b
    for (int t = 0; t < num_faces(); ++t) {
      const auto& tri = triangles_[static_cast<std::size_t>(t)];
      for (int c = 0; c < 3; ++c) {
        const int from = tri[static_cast<std::size_t>((c + 1) % 3)];
        const int to = tri[static_cast<std::size_t>((c + 2) % 3)];
        const int a = std::min(from, to);
        const int b = std::max(from, to);
        auto [it, inserted] = edge_lookup_.try_emplace(key(a, b), static_cast<int>(edges_.size()));
        if (inserted) {
          edges_.push_back(Edge{a, b, {-1, -1}, 0});
          directions.push_back({0, 0});
        }
        const int e = it->second;
        auto& edge = edges_[static_cast<std::size_t>(e)];
        if (edge.face_count == 2) {
          throw Error(ErrorCode::NonManifold,
                      "edge " + std::to_string(a) + "-" + std::to_string(b) + " lies in three or more triangles");
        }
        directions[static_cast<std::size_t>(e)][static_cast<std::size_t>(edge.face_count)] = from == a ? 1 : -1;
        edge.faces[static_cast<std::size_t>(edge.face_count++)] = t;
        triangle_edges_[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] = e;
      }
    }
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if (edges_[e].face_count == 2 && directions[e][0] == directions[e][1]) {
        throw Error(ErrorCode::InconsistentOrientation,
                    "triangles " + std::to_string(edges_[e].faces[0]) + " and " +
                        std::to_string(edges_[e].faces[1]) + " traverse edge " + std::to_string(edges_[e].a) +
                        "-" + std::to_string(edges_[e].b) + " in the same direction");
      }
    }

    vertex_neighbors_.assign(nv, {});
    for (const auto& e : edges_) {
      vertex_neighbors_[static_cast<std::size_t>(e.a)].push_back(e.b);
      vertex_neighbors_[static_cast<std::size_t>(e.b)].push_back(e.a);
    }
    for (auto& n : vertex_neighbors_) std::sort(n.begin(), n.end());

    boundary_flag_.assign(nv, 0);
    std::vector<std::vector<int>> vertex_boundary_edges(nv);
    for (int e = 0; e < num_edges(); ++e) {
      const auto& edge = edges_[static_cast<std::size_t>(e)];
      if (!edge.is_boundary()) continue;
      boundary_edges_.push_back(e);
      boundary_flag_[static_cast<std::size_t>(edge.a)] = 1;
      boundary_flag_[static_cast<std::size_t>(edge.b)] = 1;
      vertex_boundary_edges[static_cast<std::size_t>(edge.a)].push_back(e);
      vertex_boundary_edges[static_cast<std::size_t>(edge.b)].push_back(e);
    }
    for (int v = 0; v < num_vertices_; ++v) {
      const auto count = vertex_boundary_edges[static_cast<std::size_t>(v)].size();
      if (count != 0 && count != 2) {
        throw Error(ErrorCode::NonManifold,
                    "boundary is pinched at vertex " + std::to_string(v) + " (" + std::to_string(count) +
                        " boundary edges)");
      }
      if (count == 2) boundary_vertices_.push_back(v);
    }

    check_vertex_stars();
    check_connected();
    trace_boundary_cycles(vertex_boundary_edges);
  }

  // Each vertex star must be a single edge-connected fan of triangles.
  void check_vertex_stars() const {
    for (int v = 0; v < num_vertices_; ++v) {
      const auto& star = vertex_triangles_[static_cast<std::size_t>(v)];
      std::vector<char> seen(star.size(), 0);
      std::vector<std::size_t> stack{0};
      seen[0] = 1;
      std::size_t reached = 1;
      while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int t = star[i];
        for (int e : triangle_edges_[static_cast<std::size_t>(t)]) {
          const auto& edge = edges_[static_cast<std::size_t>(e)];
          if (!edge.has_vertex(v) || edge.face_count != 2) continue;
          const int other = edge.faces[0] == t ? edge.faces[1] : edge.faces[0];
          for (std::size_t j = 0; j < star.size(); ++j) {
            if (star[j] == other && !seen[j]) {
              seen[j] = 1;
              ++reached;
              stack.push_back(j);
            }
          }
        }
      }
      if (reached != star.size()) {
        throw Error(ErrorCode::NonManifold, "star of vertex " + std::to_string(v) + " is not a single fan");
      }
    }
  }

  void check_connected() const {
    std::vector<char> seen(static_cast<std::size_t>(num_vertices_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : vertex_neighbors_[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          ++reached;
          stack.push_back(w);
        }
      }
    }
    if (reached != num_vertices_) {
      throw Error(ErrorCode::Disconnected, "1-skeleton has " + std::to_string(num_vertices_ - reached) +
                                               " vertices unreachable from vertex 0");
    }
  }

  void trace_boundary_cycles(const std::vector<std::vector<int>>& vertex_boundary_edges) {
    std::vector<char> used(edges_.size(), 0);
    for (int start_edge : boundary_edges_) {
      if (used[static_cast<std::size_t>(start_edge)]) continue;
      std::vector<int> cycle;
      const int start = edges_[static_cast<std::size_t>(start_edge)].a;
      int v = start;
      int e = start_edge;
      do {
        used[static_cast<std::size_t>(e)] = 1;
        cycle.push_back(v);
        v = edges_[static_cast<std::size_t>(e)].other(v);
        const auto& incident = vertex_boundary_edges[static_cast<std::size_t>(v)];
        e = incident[0] == e ? incident[1] : incident[0];
      } while (v != start);
      boundary_cycles_.push_back(std::move(cycle));
    }
  }

  int num_vertices_ = 0;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;
  std::vector<std::vector<int>> vertex_triangles_;
  std::vector<std::vector<int>> vertex_neighbors_;
  std::vector<char> boundary_flag_;
  std::vector<int> boundary_vertices_;
  std::vector<int> boundary_edges_;
  std::vector<std::vector<int>> boundary_cycles_;
};

/// (edge, vertex) pair of the link of a vertex set: the vertex lies in the
/// set, the edge avoids it, and together they span a triangle.
struct LinkPair {
  int edge = -1;
  int vertex = -1;
  friend bool operator==(const LinkPair&, const LinkPair&) = default;
};

/// Cell decomposition of the subcomplex G(A) spanned by all cells touching a
/// vertex set A, split into the part away from the surface boundary and the
/// part on it.
struct SubsetAnalysis {
  std::vector<int> subset;
  std::vector<int> star_triangles;
  std::array<int, 3> faces_by_count{0, 0, 0};  // |F_1(A)|, |F_2(A)|, |F_3(A)|
  std::vector<LinkPair> link_pairs;
  std::vector<int> interior_edges;
  std::vector<int> boundary_edges;
  std::vector<int> interior_vertices;
  std::vector<int> boundary_vertices;
  int chi_open = 0;
  int chi_boundary = 0;
  int open_arc_components = 0;

  int size() const { return static_cast<int>(subset.size()); }

  /// 2|A| - |F(A)| + |Lk(A)| - |A ∩ V_∂|
  int counting_side() const {
    return 2 * size() - static_cast<int>(star_triangles.size()) + static_cast<int>(link_pairs.size()) -
           static_cast<int>(boundary_vertices.size());
  }
  /// 2 χ(G(A) \ ∂S) + χ(G(A) ∩ ∂S)
  int euler_side() const { return 2 * chi_open + chi_boundary; }
};

namespace detail {

// Components of G(A) ∩ ∂S that are open arcs rather than whole boundary
// cycles, found by walking boundary edges joined through vertices of A.
inline int count_open_arcs(const TriangulatedSurface& surface, const std::vector<char>& in_subset,
                           const std::vector<int>& boundary_edges_of_subset) {
  if (boundary_edges_of_subset.empty()) return 0;
  std::unordered_map<int, int> slot;
  for (std::size_t i = 0; i < boundary_edges_of_subset.size(); ++i) {
    slot.emplace(boundary_edges_of_subset[i], static_cast<int>(i));
  }
  std::vector<int> parent(boundary_edges_of_subset.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  // Join the two boundary edges at every boundary vertex of A.
  for (int v : surface.boundary_vertices()) {
    if (!in_subset[static_cast<std::size_t>(v)]) continue;
    int first = -1;
    for (int w : surface.vertex_neighbors(v)) {
      const int e = surface.find_edge(v, w);
      if (!surface.edge(e).is_boundary()) continue;
      const int s = slot.at(e);
      if (first < 0) {
        first = s;
      } else {
        parent[static_cast<std::size_t>(find(s))] = find(first);
      }
    }
  }
  // A component is a closed cycle iff all its edges have both ends in A.
  std::unordered_map<int, bool> closed;
  for (std::size_t i = 0; i < boundary_edges_of_subset.size(); ++i) {
    const auto& edge = surface.edge(boundary_edges_of_subset[i]);
    const bool both = in_subset[static_cast<std::size_t>(edge.a)] && in_subset[static_cast<std::size_t>(edge.b)];
    auto [it, inserted] = closed.try_emplace(find(static_cast<int>(i)), both);
    if (!inserted) it->second = it->second && both;
  }
  int arcs = 0;
  for (const auto& [root, is_closed] : closed) {
    if (!is_closed) ++arcs;
  }
  return arcs;
}

}  // namespace detail

/// Builds the subset analysis of A by direct cell classification. Vertices in
/// ∂S and boundary edges are the only cells counted on the boundary side;
/// triangles always lie off it.
inline SubsetAnalysis analyze_subset(const TriangulatedSurface& surface, std::span<const int> subset) {
  if (subset.empty()) throw Error(ErrorCode::EmptySubset, "vertex subset must be non-empty");
  const auto nv = static_cast<std::size_t>(surface.num_vertices());
  std::vector<char> in(nv, 0);
  SubsetAnalysis out;
  for (int v : subset) {
    if (v < 0 || v >= surface.num_vertices()) {
      throw Error(ErrorCode::InvalidInput, "vertex " + std::to_string(v) + " out of range");
    }
    if (!in[static_cast<std::size_t>(v)]) out.subset.push_back(v);
    in[static_cast<std::size_t>(v)] = 1;
  }
  std::sort(out.subset.begin(), out.subset.end());

  for (int v : out.subset) {
    (surface.is_boundary_vertex(v) ? out.boundary_vertices : out.interior_vertices).push_back(v);
  }
  for (int t = 0; t < surface.num_faces(); ++t) {
    const auto& tri = surface.triangle(t);
    int count = 0;
    int lone_corner = -1;
    for (int c = 0; c < 3; ++c) {
      if (in[static_cast<std::size_t>(tri[static_cast<std::size_t>(c)])]) {
        ++count;
        lone_corner = c;
      }
    }
    if (count == 0) continue;
    out.star_triangles.push_back(t);
    ++out.faces_by_count[static_cast<std::size_t>(count - 1)];
    if (count == 1) {
      out.link_pairs.push_back(LinkPair{surface.triangle_edges(t)[static_cast<std::size_t>(lone_corner)],
                                        tri[static_cast<std::size_t>(lone_corner)]});
    }
  }
  for (int e = 0; e < surface.num_edges(); ++e) {
    const auto& edge = surface.edge(e);
    if (!in[static_cast<std::size_t>(edge.a)] && !in[static_cast<std::size_t>(edge.b)]) continue;
    (edge.is_boundary() ? out.boundary_edges : out.interior_edges).push_back(e);
  }
  out.chi_open = static_cast<int>(out.interior_vertices.size()) - static_cast<int>(out.interior_edges.size()) +
                 static_cast<int>(out.star_triangles.size());
  out.chi_boundary = static_cast<int>(out.boundary_vertices.size()) - static_cast<int>(out.boundary_edges.size());
  out.open_arc_components = detail::count_open_arcs(surface, in, out.boundary_edges);

  if (out.counting_side() != out.euler_side()) {
    throw std::logic_error("subset Euler identity violated for a subset of size " + std::to_string(out.size()));
  }
  return out;
}

inline SubsetAnalysis analyze_subset(const TriangulatedSurface& surface, std::initializer_list<int> subset) {
  return analyze_subset(surface, std::span<const int>(subset.begin(), subset.size()));
}

/// Vertex list of a bitmask subset (|V| <= 64).
inline std::vector<int> subset_from_mask(std::uint64_t mask) {
  std::vector<int> out;
  for (int v = 0; mask != 0; ++v, mask >>= 1) {
    if (mask & 1U) out.push_back(v);
  }
  return out;
}

}  // namespace circleflow
