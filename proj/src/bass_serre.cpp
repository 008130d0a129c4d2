#include "hnngeo/bass_serre.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>

#include "hnngeo/error.hpp"

namespace hnngeo {

namespace {

// Arc-length slack when locating a point at a segment boundary.
constexpr double kSnap = 1e-12;

TreeVertex prefix(const TreeVertex& v, std::size_t k) {
  return {std::vector<Syllable>(v.syllables.begin(),
                                v.syllables.begin() + static_cast<std::ptrdiff_t>(k))};
}

std::size_t common_prefix(const TreeVertex& a, const TreeVertex& b) {
  const std::size_t m = std::min(a.syllables.size(), b.syllables.size());
  std::size_t k = 0;
  while (k < m && a.syllables[k] == b.syllables[k]) ++k;
  return k;
}

// Sub-path between arc lengths a <= b.
TreePath subpath(const TreePath& path, double a, double b) {
  TreePath out;
  double pos = 0.0;
  for (const auto& seg : path.segments) {
    const double len = seg.length();
    const double lo = std::max(a, pos);
    const double hi = std::min(b, pos + len);
    if (hi > lo) {
      const double dir = seg.u1 >= seg.u0 ? 1.0 : -1.0;
      out.segments.push_back(
          {seg.edge, seg.u0 + dir * (lo - pos), seg.u0 + dir * (hi - pos)});
    }
    pos += len;
  }
  return out;
}

}  // namespace

double TreePath::length() const noexcept {
  double total = 0.0;
  for (const auto& s : segments) total += s.length();
  return total;
}

BassSerreTree::BassSerreTree(Group group) : group_(std::move(group)) {}

GroupElement BassSerreTree::representative(const TreeVertex& v) const {
  return {v.syllables, IntVec(group_.rank(), 0)};
}

GroupElement BassSerreTree::representative(const TreeEdge& e) const {
  return {e.target.syllables, e.rep};
}

TreeEdge BassSerreTree::edge_of(const GroupElement& gamma) const {
  TreeEdge e;
  e.target = vertex_of(gamma);
  e.rep = group_.presentation().cosets1().rep_of(gamma.head);
  GroupElement src = representative(e);
  group_.mul_letter(src, {group_.rank(), -1});
  e.source = vertex_of(src);
  return e;
}

std::vector<TreeEdge> BassSerreTree::neighbors(const TreeVertex& v) const {
  std::vector<TreeEdge> out;
  const auto& p = group_.presentation();
  const Letter t{group_.rank(), 1};
  for (const auto& r : p.cosets2().reps()) {
    GroupElement g = representative(v);
    group_.mul_vector(g, r);
    group_.mul_letter(g, t);
    out.push_back(edge_of(g));
  }
  for (const auto& r : p.cosets1().reps()) {
    out.push_back(edge_of({v.syllables, r}));
  }
  return out;
}

TreeEdge BassSerreTree::canonical_out_edge(const TreeVertex& v) const {
  GroupElement g = representative(v);
  group_.mul_letter(g, {group_.rank(), 1});
  return edge_of(g);
}

TreeEdge BassSerreTree::zero_in_edge(const TreeVertex& v) const {
  return edge_of(representative(v));
}

TreeVertex BassSerreTree::act_vertex(const GroupElement& g, const TreeVertex& v) const {
  return vertex_of(group_.multiply(g, representative(v)));
}

TreeEdge BassSerreTree::act_edge(const GroupElement& g, const TreeEdge& e) const {
  return edge_of(group_.multiply(g, representative(e)));
}

TreePoint BassSerreTree::act_point(const GroupElement& g, const TreePoint& p) const {
  return normalize({act_edge(g, p.edge), p.u});
}

TreePoint BassSerreTree::vertex_point(const TreeVertex& v) const {
  return {canonical_out_edge(v), 0.0};
}

TreePoint BassSerreTree::normalize(TreePoint p) const {
  if (p.u <= 0.0) return vertex_point(p.edge.source);
  if (p.u >= 1.0) return vertex_point(p.edge.target);
  return p;
}

int BassSerreTree::height(const TreeVertex& v) const noexcept {
  int c = 0;
  for (const auto& s : v.syllables) c += s.sign;
  return c;
}

double BassSerreTree::height(const TreePoint& p) const noexcept {
  return height(p.edge.source) + p.u;
}

int BassSerreTree::vertex_distance(const TreeVertex& a, const TreeVertex& b) const noexcept {
  const std::size_t k = common_prefix(a, b);
  return static_cast<int>(a.syllables.size() + b.syllables.size() - 2 * k);
}

double BassSerreTree::point_distance(const TreePoint& a, const TreePoint& b) const {
  if (a.edge == b.edge) return std::abs(a.u - b.u);
  const std::array<std::pair<const TreeVertex*, double>, 2> ea{
      {{&a.edge.source, a.u}, {&a.edge.target, 1.0 - a.u}}};
  const std::array<std::pair<const TreeVertex*, double>, 2> eb{
      {{&b.edge.source, b.u}, {&b.edge.target, 1.0 - b.u}}};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [va, da] : ea) {
    for (const auto& [vb, db] : eb) {
      best = std::min(best, da + vertex_distance(*va, *vb) + db);
    }
  }
  return best;
}

double BassSerreTree::tree_distance(const TreePoint& a, const TreePoint& b,
                                    const TreeBall& ball) const {
  ball.require(a);
  ball.require(b);
  return point_distance(a, b);
}

TreeEdge BassSerreTree::parent_edge(const TreeVertex& v) const {
  const Syllable& last = v.syllables.back();
  if (last.sign == 1) return edge_of(representative(v));
  TreeVertex parent = prefix(v, v.syllables.size() - 1);
  return edge_of({parent.syllables, last.rep});
}

TreePath BassSerreTree::vertex_path(const TreeVertex& a, const TreeVertex& b) const {
  TreePath path;
  const std::size_t k = common_prefix(a, b);
  for (std::size_t len = a.syllables.size(); len > k; --len) {
    TreeVertex child = prefix(a, len);
    TreeEdge e = parent_edge(child);
    const bool child_is_target = child.syllables.back().sign == 1;
    path.segments.push_back({e, child_is_target ? 1.0 : 0.0, child_is_target ? 0.0 : 1.0});
  }
  for (std::size_t len = k + 1; len <= b.syllables.size(); ++len) {
    TreeVertex child = prefix(b, len);
    TreeEdge e = parent_edge(child);
    const bool child_is_target = child.syllables.back().sign == 1;
    path.segments.push_back({e, child_is_target ? 0.0 : 1.0, child_is_target ? 1.0 : 0.0});
  }
  return path;
}

TreePath BassSerreTree::geodesic(const TreePoint& a, const TreePoint& b,
                                 const TreeBall& ball) const {
  ball.require(a);
  ball.require(b);
  TreePath path;
  if (a.edge == b.edge) {
    if (a.u != b.u) path.segments.push_back({a.edge, a.u, b.u});
    return path;
  }
  // Leave a's edge through one endpoint, enter b's through one endpoint.
  double best = std::numeric_limits<double>::infinity();
  int best_ea = 0;
  int best_eb = 0;
  for (int ea = 0; ea < 2; ++ea) {
    for (int eb = 0; eb < 2; ++eb) {
      const double d = (ea ? 1.0 - a.u : a.u) +
                       vertex_distance(ea ? a.edge.target : a.edge.source,
                                       eb ? b.edge.target : b.edge.source) +
                       (eb ? 1.0 - b.u : b.u);
      if (d < best) {
        best = d;
        best_ea = ea;
        best_eb = eb;
      }
    }
  }
  const double exit_u = best_ea ? 1.0 : 0.0;
  const double entry_u = best_eb ? 1.0 : 0.0;
  if (a.u != exit_u) path.segments.push_back({a.edge, a.u, exit_u});
  TreePath middle = vertex_path(best_ea ? a.edge.target : a.edge.source,
                                best_eb ? b.edge.target : b.edge.source);
  path.segments.insert(path.segments.end(), middle.segments.begin(), middle.segments.end());
  if (b.u != entry_u) path.segments.push_back({b.edge, entry_u, b.u});
  return path;
}

TreePoint BassSerreTree::point_on(const TreePath& path, double s) const {
  if (path.segments.empty()) {
    throw Error(ErrorKind::OutsideBall, "point requested on an empty path");
  }
  double pos = 0.0;
  for (const auto& seg : path.segments) {
    const double len = seg.length();
    if (s <= pos + len + kSnap) {
      const double off = s - pos;
      if (off <= kSnap) return normalize({seg.edge, seg.u0});
      if (off >= len - kSnap) return normalize({seg.edge, seg.u1});
      const double dir = seg.u1 >= seg.u0 ? 1.0 : -1.0;
      return normalize({seg.edge, seg.u0 + dir * off});
    }
    pos += len;
  }
  const auto& last = path.segments.back();
  return normalize({last.edge, last.u1});
}

TreePath BassSerreTree::ascending_ray(const TreePoint& x, double lo, double hi,
                                      const TreeBall& ball) const {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::OutsideBall, "ray span must be a finite interval");
  }
  ball.require(x);
  const double down = std::max(0.0, -lo);
  const double up = std::max(0.0, hi);

  // Downward part, collected from x outward and then reversed.
  std::vector<TreeSegment> below;
  double covered = x.u;
  if (x.u > 0.0) below.push_back({x.edge, 0.0, x.u});
  TreeVertex v = x.edge.source;
  while (covered < down) {
    TreeEdge e = zero_in_edge(v);
    below.push_back({e, 0.0, 1.0});
    v = e.source;
    covered += 1.0;
  }

  TreePath full;
  full.segments.assign(below.rbegin(), below.rend());
  if (x.u < 1.0) full.segments.push_back({x.edge, x.u, 1.0});
  covered = 1.0 - x.u;
  v = x.edge.target;
  while (covered < up) {
    TreeEdge e = canonical_out_edge(v);
    full.segments.push_back({e, 0.0, 1.0});
    v = e.target;
    covered += 1.0;
  }
  // Arc length of x inside `full` equals the length of the reversed part.
  double origin = 0.0;
  for (const auto& s : below) origin += s.length();
  TreePath ray = subpath(full, origin + lo, origin + hi);
  // Balls are convex, so checking both ends suffices.
  if (!ray.segments.empty()) {
    const auto& first = ray.segments.front();
    const auto& last = ray.segments.back();
    if (!ball.contains(normalize({first.edge, first.u0})) ||
        !ball.contains(normalize({last.edge, last.u1}))) {
      throw Error(ErrorKind::OutsideBall, "ray segment leaves the tree ball");
    }
  }
  return ray;
}

TreePoint BassSerreTree::ray_point(const TreePoint& x, double u, const TreeBall& ball) const {
  if (u == 0.0) {
    ball.require(x);
    return normalize(x);
  }
  const double lo = std::min(0.0, u);
  const double hi = std::max(0.0, u);
  TreePath path = ascending_ray(x, lo, hi, ball);
  TreePoint p = point_on(path, u > 0 ? path.length() : 0.0);
  return p;
}

std::string BassSerreTree::vertex_label(const TreeVertex& v) const {
  return group_.format(representative(v));
}

std::string BassSerreTree::edge_label(const TreeEdge& e) const {
  return group_.format(representative(e));
}

TreeBall::TreeBall(const BassSerreTree& tree, TreeVertex center, int radius, bool enumerate)
    : tree_(&tree), center_(std::move(center)), radius_(radius) {
  if (radius < 0) throw Error(ErrorKind::ConfigError, "tree ball radius must be >= 0");
  vertices_.push_back(center_);
  index_.emplace(center_, 0);
  std::vector<int> depth{0};
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!enumerate || depth[i] >= radius_) continue;
    const TreeVertex v = vertices_[i];
    for (auto& e : tree.neighbors(v)) {
      const TreeVertex& other = e.source == v ? e.target : e.source;
      if (index_.count(other)) continue;
      const std::size_t j = vertices_.size();
      index_.emplace(other, j);
      vertices_.push_back(other);
      depth.push_back(depth[i] + 1);
      edge_ends_.push_back(e.source == v ? std::pair{i, j} : std::pair{j, i});
      edges_.push_back(std::move(e));
    }
  }
}

std::optional<std::size_t> TreeBall::index_of(const TreeVertex& v) const {
  auto it = index_.find(v);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool TreeBall::contains(const TreeVertex& v) const {
  return tree_->vertex_distance(center_, v) <= radius_;
}

bool TreeBall::contains(const TreePoint& p) const {
  if (!contains(p.edge.source) && !contains(p.edge.target)) return false;
  return tree_->point_distance(tree_->vertex_point(center_), p) <= radius_ + 1e-12;
}

void TreeBall::require(const TreePoint& p) const {
  if (!contains(p)) {
    throw Error(ErrorKind::OutsideBall,
                "tree point outside ball of radius " + std::to_string(radius_));
  }
}

void TreeBall::write_edge_csv(std::ostream& out) const {
  out << "source_key,target_key,c_source\n";
  for (const auto& e : edges_) {
    out << tree_->vertex_label(e.source) << ',' << tree_->vertex_label(e.target) << ','
        << tree_->height(e.source) << '\n';
  }
}

}  // namespace hnngeo
