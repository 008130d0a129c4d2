#pragma once

// Finite pieces of the Bass-Serre tree T of Gamma.
//
// A vertex gamma G is keyed by the syllable list of the normal form of gamma
// (head dropped). An edge gamma i1(H) runs from gamma t^-1 G to gamma G and
// is keyed by its target together with head(gamma) reduced mod m1 Z^n. The
// syllable list of a vertex spells the unique reduced edge path from the
// base vertex, so distances come from common prefixes.

#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "hnngeo/group.hpp"

namespace hnngeo {

struct TreeVertex {
  std::vector<Syllable> syllables;

  friend bool operator==(const TreeVertex&, const TreeVertex&) = default;
  friend auto operator<=>(const TreeVertex&, const TreeVertex&) = default;
};

struct TreeVertexHash {
  std::size_t operator()(const TreeVertex& v) const noexcept {
    return hash_value(v.syllables);
  }
};

struct TreeEdge {
  TreeVertex target;
  IntVec rep;         // head of gamma modulo m1 Z^n
  TreeVertex source;  // determined by (target, rep)

  friend bool operator==(const TreeEdge& a, const TreeEdge& b) {
    return a.target == b.target && a.rep == b.rep;
  }
};

struct TreeEdgeHash {
  std::size_t operator()(const TreeEdge& e) const noexcept {
    return hash_value(e.target.syllables) * 31u + hash_value(e.rep);
  }
};

// A point at parameter u of an edge; u = 0 is the source. Vertex points
// are normalized to u = 0 on the vertex's canonical outgoing edge.
struct TreePoint {
  TreeEdge edge;
  double u = 0.0;

  friend bool operator==(const TreePoint& a, const TreePoint& b) {
    return a.edge == b.edge && a.u == b.u;
  }
};

// Piece of a path running along `edge` from parameter u0 to u1.
struct TreeSegment {
  TreeEdge edge;
  double u0 = 0.0;
  double u1 = 0.0;

  double length() const noexcept { return u1 > u0 ? u1 - u0 : u0 - u1; }
};

// Unit-speed path: concatenation of segments.
struct TreePath {
  std::vector<TreeSegment> segments;

  double length() const noexcept;
};

class TreeBall;

class BassSerreTree {
 public:
  explicit BassSerreTree(Group group);

  const Group& group() const noexcept { return group_; }

  TreeVertex base() const { return {}; }
  TreeVertex vertex_of(const GroupElement& g) const { return {g.syllables}; }
  GroupElement representative(const TreeVertex& v) const;
  GroupElement representative(const TreeEdge& e) const;

  TreeEdge edge_of(const GroupElement& gamma) const;
  // Outgoing edges first (one per m2 class), then incoming (one per m1 class).
  std::vector<TreeEdge> neighbors(const TreeVertex& v) const;
  TreeEdge canonical_out_edge(const TreeVertex& v) const;
  TreeEdge zero_in_edge(const TreeVertex& v) const;

  TreeVertex act_vertex(const GroupElement& g, const TreeVertex& v) const;
  TreeEdge act_edge(const GroupElement& g, const TreeEdge& e) const;
  TreePoint act_point(const GroupElement& g, const TreePoint& p) const;

  TreePoint vertex_point(const TreeVertex& v) const;
  TreePoint normalize(TreePoint p) const;

  int height(const TreeVertex& v) const noexcept;
  double height(const TreePoint& p) const noexcept;

  int vertex_distance(const TreeVertex& a, const TreeVertex& b) const noexcept;
  double point_distance(const TreePoint& a, const TreePoint& b) const;

  double tree_distance(const TreePoint& a, const TreePoint& b, const TreeBall& ball) const;
  TreePath geodesic(const TreePoint& a, const TreePoint& b, const TreeBall& ball) const;
  // Point at arc length s of a nonempty path, clamped to [0, length()].
  TreePoint point_on(const TreePath& path, double s) const;

  // Restriction of beta_x to [lo, hi]: the path starting at beta(lo) with
  // height(beta(u)) = height(x) + u. Upward steps take the canonical outgoing
  // edge, downward steps the zero-class incoming edge.
  TreePath ascending_ray(const TreePoint& x, double lo, double hi, const TreeBall& ball) const;
  TreePoint ray_point(const TreePoint& x, double u, const TreeBall& ball) const;

  std::string vertex_label(const TreeVertex& v) const;
  std::string edge_label(const TreeEdge& e) const;

 private:
  TreePath vertex_path(const TreeVertex& a, const TreeVertex& b) const;
  // Edge between a non-base vertex and its parent, oriented as in T.
  TreeEdge parent_edge(const TreeVertex& v) const;

  Group group_;
};

class TreeBall {
 public:
  // With enumerate = false only membership tests work; vertices() and
  // edges() then hold just the center.
  TreeBall(const BassSerreTree& tree, TreeVertex center, int radius, bool enumerate = true);

  const TreeVertex& center() const noexcept { return center_; }
  int radius() const noexcept { return radius_; }
  const std::vector<TreeVertex>& vertices() const noexcept { return vertices_; }
  const std::vector<TreeEdge>& edges() const noexcept { return edges_; }
  // Indices into vertices() for each edge's (source, target).
  const std::vector<std::pair<std::size_t, std::size_t>>& edge_ends() const noexcept {
    return edge_ends_;
  }
  std::optional<std::size_t> index_of(const TreeVertex& v) const;

  bool contains(const TreeVertex& v) const;
  bool contains(const TreePoint& p) const;
  void require(const TreePoint& p) const;  // throws OutsideBall

  // CSV columns: source_key,target_key,c_source
  void write_edge_csv(std::ostream& out) const;

 private:
  const BassSerreTree* tree_;
  TreeVertex center_;
  int radius_;
  std::vector<TreeVertex> vertices_;
  std::vector<TreeEdge> edges_;
  std::vector<std::pair<std::size_t, std::size_t>> edge_ends_;
  std::unordered_map<TreeVertex, std::size_t, TreeVertexHash> index_;
};

}  // namespace hnngeo
