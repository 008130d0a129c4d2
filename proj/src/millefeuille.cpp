#include "hnngeo/millefeuille.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_set>

#include "hnngeo/error.hpp"

namespace hnngeo {

namespace {

YPoint lerp(const YPoint& a, const YPoint& b, double f) {
  YPoint out;
  out.x.resize(a.x.size());
  for (std::size_t i = 0; i < a.x.size(); ++i) out.x[i] = a.x[i] + f * (b.x[i] - a.x[i]);
  out.s = a.s + f * (b.s - a.s);
  return out;
}

bool same_point(const MPoint& a, const MPoint& b) { return a.tree == b.tree && a.y == b.y; }

}  // namespace

MilleFeuille::MilleFeuille(const BassSerreTree& tree, const TreeBall& ball, const YModel& model)
    : tree_(&tree), ball_(&ball), model_(&model) {
  if (tree.group().rank() != model.rank()) {
    throw Error(ErrorKind::ConfigError, "tree and Y model ranks differ");
  }
}

MPoint MilleFeuille::make_mpoint(const TreePoint& t, const YPoint& y) const {
  if (std::abs(tree_->height(t) - y.s) > kFibreTol) {
    throw Error(ErrorKind::FibreMismatch, "tree height and Y height differ");
  }
  return {tree_->normalize(t), y};
}

MPoint MilleFeuille::base_point() const {
  return {tree_->vertex_point(tree_->base()), YPoint{RealVec(model_->rank(), 0.0), 0.0}};
}

bool MilleFeuille::on_fibre(const MPoint& m) const {
  return std::abs(tree_->height(m.tree) - m.y.s) <= kFibreTol;
}

MPoint MilleFeuille::act(const GroupElement& g, const MPoint& m) const {
  MPoint out{tree_->act_point(g, m.tree), act_y(tree_->group(), g, m.y)};
  ball_->require(out.tree);
  model_->require(out.y);
  return out;
}

ProductDistance MilleFeuille::product_distance(const MPoint& a, const MPoint& b) const {
  ProductDistance d;
  d.tree = tree_->tree_distance(a.tree, b.tree, *ball_);
  d.y = model_->distance(a.y, b.y);
  d.lower = d.tree + d.y.lower;
  d.upper = d.tree + d.y.upper;
  return d;
}

MPath MilleFeuille::connect_theta(const MPoint& a, const MPoint& b) const {
  if (same_point(a, b)) return {};
  YField field = model_->field(YPoint{a.y.x, tree_->height(b.tree)});
  return connect_theta(a, b, field);
}

MPath MilleFeuille::connect_theta(const MPoint& a, const MPoint& b, YField& from_y2) const {
  MPath path;
  if (same_point(a, b)) return path;
  const double c1 = tree_->height(b.tree);
  const YPoint y2{a.y.x, c1};
  if (!(from_y2.source() == y2)) {
    throw Error(ErrorKind::ConfigError, "field is not rooted at the intermediate point");
  }

  // theta1: tree geodesic, Y moving vertically so that b(y) follows c.
  path.tree_distance = tree_->tree_distance(a.tree, b.tree, *ball_);
  const TreePath sigma = tree_->geodesic(a.tree, b.tree, *ball_);
  for (const auto& seg : sigma.segments) {
    const double base_h = tree_->height(seg.edge.source);
    MArc arc;
    arc.part = 1;
    arc.edge = seg.edge;
    arc.u0 = seg.u0;
    arc.u1 = seg.u1;
    arc.y0 = {a.y.x, base_h + seg.u0};
    arc.y1 = {a.y.x, base_h + seg.u1};
    arc.length = 2.0 * seg.length();
    path.theta1_length += arc.length;
    path.arcs.push_back(std::move(arc));
  }

  // theta2: Y geodesic y2 -> y1, tree following the beta ray of x1.
  if (!(y2 == b.y)) {
    path.y21 = from_y2.distance_to(b.y);
    const YPath sigma_t = from_y2.path_to(b.y);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : sigma_t.points) {
      lo = std::min(lo, p.s);
      hi = std::max(hi, p.s);
    }
    TreePath ray;
    try {
      ray = tree_->ascending_ray(b.tree, lo - c1, hi - c1, *ball_);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::OutsideBall) throw;
      throw Error(ErrorKind::PathEscapesWindow, "beta ray leaves the tree ball");
    }
    auto tree_at = [&](double s) {
      if (ray.segments.empty()) return tree_->normalize(b.tree);
      return tree_->point_on(ray, s - lo);
    };
    for (std::size_t i = 1; i < sigma_t.points.size(); ++i) {
      const YPoint& p = sigma_t.points[i - 1];
      const YPoint& q = sigma_t.points[i];
      // Split at integer heights so the tree part stays on one edge.
      std::vector<double> cuts{0.0, 1.0};
      if (p.s != q.s) {
        const double s0 = std::min(p.s, q.s);
        const double s1 = std::max(p.s, q.s);
        for (double c = std::floor(s0) + 1.0; c < s1; c += 1.0) {
          cuts.push_back((c - p.s) / (q.s - p.s));
        }
        std::sort(cuts.begin(), cuts.end());
      }
      for (std::size_t k = 1; k < cuts.size(); ++k) {
        if (cuts[k] <= cuts[k - 1]) continue;
        const YPoint ya = k == 1 ? p : lerp(p, q, cuts[k - 1]);
        const YPoint yb = k + 1 == cuts.size() ? q : lerp(p, q, cuts[k]);
        MArc arc;
        arc.part = 2;
        arc.y0 = ya;
        arc.y1 = yb;
        const double ylen = model_->segment_length(ya, yb);
        if (ya.s == yb.s) {
          TreePoint t = tree_at(ya.s);
          arc.edge = t.edge;
          arc.u0 = arc.u1 = t.u;
          arc.length = ylen;
        } else {
          TreePoint mid = tree_at(0.5 * (ya.s + yb.s));
          const double base_h = tree_->height(mid.edge.source);
          arc.edge = mid.edge;
          arc.u0 = std::clamp(ya.s - base_h, 0.0, 1.0);
          arc.u1 = std::clamp(yb.s - base_h, 0.0, 1.0);
          arc.length = ylen + std::abs(yb.s - ya.s);
        }
        path.theta2_length += arc.length;
        path.arcs.push_back(std::move(arc));
      }
    }
  }
  path.total_length = path.theta1_length + path.theta2_length;
  return path;
}

double MilleFeuille::dM_upper(const MPoint& a, const MPoint& b) const {
  return connect_theta(a, b).total_length;
}

MPoint MilleFeuille::point_on(const MPath& path, double s) const {
  if (path.arcs.empty()) {
    throw Error(ErrorKind::ConfigError, "point requested on an empty path");
  }
  double pos = 0.0;
  for (std::size_t i = 0; i < path.arcs.size(); ++i) {
    const MArc& arc = path.arcs[i];
    if (s <= pos + arc.length || i + 1 == path.arcs.size()) {
      const double f =
          arc.length > 0.0 ? std::clamp((s - pos) / arc.length, 0.0, 1.0) : 0.0;
      return {tree_->normalize({arc.edge, arc.u0 + f * (arc.u1 - arc.u0)}),
              lerp(arc.y0, arc.y1, f)};
    }
    pos += arc.length;
  }
  return {};  // unreachable
}

Normalization MilleFeuille::normalize_to_fundamental_domain(const MPoint& m) const {
  const Group& group = tree_->group();
  ball_->require(m.tree);
  // Send the edge gamma i1(H) to t i1(H), then translate inside G.
  const GroupElement gamma = tree_->representative(m.tree.edge);
  const GroupElement g1 = group.multiply(group.t(), group.inverse(gamma));
  const YPoint y1 = act_y(group, g1, m.y);
  IntVec shift(group.rank());
  for (std::size_t i = 0; i < shift.size(); ++i) {
    shift[i] = -static_cast<std::int64_t>(std::floor(y1.x[i]));
  }
  Normalization out;
  out.g = group.multiply(group.from_vector(shift), g1);
  out.point.tree = tree_->act_point(out.g, m.tree);
  out.point.y = act_y(group, out.g, m.y);
  for (auto& c : out.point.y.x) {
    // Round-off from the phi powers can land a hair outside [0, 1).
    if (c < 0.0) c = 0.0;
    if (c >= 1.0) c = std::nextafter(1.0, 0.0);
  }
  if (!(out.point.tree.edge.source == tree_->base())) {
    throw Error(ErrorKind::OutsideBall, "normalization did not reach the base vertex");
  }
  ball_->require(out.point.tree);
  return out;
}

ProperReport MilleFeuille::properness_probe(int radius) const {
  const Group& group = tree_->group();
  ProperReport report;
  report.radius = radius;
  const GroupBall elements = group.ball(radius);
  report.elements = elements.size();

  const TreeBall local(*tree_, tree_->base(), 2);
  std::unordered_set<std::string> signatures;
  for (const auto& g : elements.elements()) {
    std::ostringstream key;
    const SemidirectElement j = group.j_N(g);
    key << j.level;
    for (const auto& c : j.translation) key << ',' << to_string(c);
    for (const auto& v : local.vertices()) {
      key << '|' << tree_->vertex_label(tree_->act_vertex(g, v));
    }
    signatures.insert(key.str());
  }
  report.collisions = report.elements - signatures.size();

  const MPoint base = base_point();
  YField field = model_->field(base.y);
  report.min_displacement_by_length.assign(static_cast<std::size_t>(radius) + 1,
                                           std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const int len = elements.lengths()[i];
    MPoint moved;
    try {
      moved = act(elements.elements()[i], base);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::OutsideBall && e.kind() != ErrorKind::OutsideWindow) throw;
      ++report.skipped;
      continue;
    }
    const double lower = tree_->point_distance(base.tree, moved.tree) +
                         field.distance_to(moved.y).lower;
    auto& slot = report.min_displacement_by_length[static_cast<std::size_t>(len)];
    slot = std::min(slot, lower);
  }
  for (std::size_t r = 1; r < report.min_displacement_by_length.size(); ++r) {
    if (report.min_displacement_by_length[r] + 1e-12 < report.min_displacement_by_length[r - 1]) {
      report.displacement_nondecreasing = false;
    }
  }
  return report;
}

std::optional<MPoint> sample_mpoint(const MilleFeuille& space,
                                    const std::vector<GroupElement>& elements,
                                    std::mt19937_64& rng) {
  const BassSerreTree& tree = space.tree();
  const Group& group = tree.group();
  std::uniform_int_distribution<std::size_t> pick(0, elements.size() - 1);
  std::uniform_int_distribution<int> eighth(0, 7);
  std::uniform_int_distribution<int> quarter(0, 3);
  const GroupElement& gamma = elements[pick(rng)];
  const double u = eighth(rng) / 8.0;
  RealVec x(group.rank());
  for (auto& c : x) c = quarter(rng) / 4.0;
  const MPoint m0 =
      space.make_mpoint(tree.normalize({tree.edge_of(group.t()), u}), YPoint{x, u});
  try {
    return space.act(gamma, m0);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::OutsideBall && e.kind() != ErrorKind::OutsideWindow) throw;
    return std::nullopt;
  }
}

LemmaReport verify_lemma(const MilleFeuille& space, const std::vector<GroupElement>& elements,
                         std::size_t pairs, std::uint64_t seed, std::size_t max_attempts) {
  LemmaReport report;
  report.kappa = space.model().kappa();
  const double k1 = 1.0 + report.kappa;
  std::mt19937_64 rng(seed);
  double ratio_sum = 0.0;
  std::size_t within = 0;
  for (std::size_t attempt = 0; attempt < max_attempts && report.pairs < pairs; ++attempt) {
    const auto a = sample_mpoint(space, elements, rng);
    const auto b = sample_mpoint(space, elements, rng);
    if (!a || !b) {
      ++report.rejected;
      continue;
    }
    MPath path;
    try {
      path = space.connect_theta(*a, *b);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PathEscapesWindow && e.kind() != ErrorKind::OutsideWindow) {
        throw;
      }
      ++report.rejected;
      continue;
    }
    const ProductDistance d = space.product_distance(*a, *b);
    LemmaRow row{d.tree,
                 d.lower,
                 d.upper,
                 path.total_length,
                 path.theta1_length,
                 path.theta2_length,
                 path.y21.upper};
    constexpr double eps = 1e-9;
    if (d.lower > path.total_length + eps) ++report.lower_violations;
    if (path.total_length > 4.0 * k1 * d.upper + eps) ++report.upper_violations;
    if (path.theta1_length > 2.0 * path.tree_distance + eps) ++report.theta1_violations;
    if (path.theta2_length > 2.0 * k1 * path.y21.upper + eps) ++report.theta2_violations;
    if (d.upper > 0.0) {
      const double ratio = path.total_length / d.upper;
      if (report.informative == 0) {
        report.ratio_min = report.ratio_max = ratio;
      } else {
        report.ratio_min = std::min(report.ratio_min, ratio);
        report.ratio_max = std::max(report.ratio_max, ratio);
      }
      ++report.informative;
      ratio_sum += ratio;
      if (ratio >= 1.0 / k1 - eps && ratio <= 4.0 * k1 + eps) ++within;
    }
    report.rows.push_back(row);
    ++report.pairs;
  }
  if (report.informative > 0) {
    report.ratio_mean = ratio_sum / static_cast<double>(report.informative);
    report.fraction_within =
        static_cast<double>(within) / static_cast<double>(report.informative);
  }
  return report;
}

NormalizationSweep normalization_sweep(const MilleFeuille& space,
                                       const std::vector<GroupElement>& elements,
                                       std::size_t samples, std::uint64_t seed) {
  const BassSerreTree& tree = space.tree();
  NormalizationSweep sweep;
  std::mt19937_64 rng(seed);
  const std::size_t max_attempts = 20 * samples + 20;
  for (std::size_t attempt = 0; attempt < max_attempts && sweep.samples < samples; ++attempt) {
    const auto m = sample_mpoint(space, elements, rng);
    if (!m) {
      ++sweep.rejected;
      continue;
    }
    ++sweep.samples;
    try {
      const Normalization n = space.normalize_to_fundamental_domain(*m);
      bool good = n.point.tree.edge.source == tree.base() && space.on_fibre(n.point) &&
                  tree.act_point(n.g, m->tree) == n.point.tree;
      const double h = tree.height(n.point.tree);
      good = good && h >= 0.0 && h < 1.0 && space.model().in_window(n.point.y);
      for (double c : n.point.y.x) good = good && c >= 0.0 && c < 1.0;
      if (good) ++sweep.successes;
    } catch (const Error&) {
      // counted as a failure
    }
  }
  return sweep;
}

namespace {

std::vector<std::pair<double, double>> reduce_by_w(
    const std::vector<std::pair<double, double>>& samples, bool keep_max) {
  std::map<double, double> best;
  for (const auto& [w, v] : samples) {
    auto [it, inserted] = best.try_emplace(w, v);
    if (!inserted) it->second = keep_max ? std::max(it->second, v) : std::min(it->second, v);
  }
  return {best.begin(), best.end()};
}

std::vector<double> candidate_slopes(const std::vector<std::pair<double, double>>& pts) {
  std::vector<double> slopes{0.0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double s = (pts[j].second - pts[i].second) / (pts[j].first - pts[i].first);
      if (s > 0.0) slopes.push_back(s);
    }
  }
  std::sort(slopes.begin(), slopes.end());
  return slopes;
}

}  // namespace

AffineBound fit_upper_line(const std::vector<std::pair<double, double>>& samples) {
  const auto pts = reduce_by_w(samples, true);
  if (pts.empty()) return {};
  const double mid = 0.5 * (pts.front().first + pts.back().first);
  AffineBound best;
  double best_value = std::numeric_limits<double>::infinity();
  for (double a : candidate_slopes(pts)) {
    double b = -std::numeric_limits<double>::infinity();
    for (const auto& [w, v] : pts) b = std::max(b, v - a * w);
    const double value = a * mid + b;
    // Slopes are sorted, so ties keep the smaller slope.
    if (value < best_value - 1e-12) {
      best_value = value;
      best = {a, b};
    }
  }
  return best;
}

AffineBound fit_lower_line(const std::vector<std::pair<double, double>>& samples) {
  const auto pts = reduce_by_w(samples, false);
  if (pts.empty()) return {};
  const double mid = 0.5 * (pts.front().first + pts.back().first);
  AffineBound best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (double a : candidate_slopes(pts)) {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [w, v] : pts) b = std::min(b, v - a * w);
    const double value = a * mid + b;
    if (value > best_value + 1e-12) {
      best_value = value;
      best = {a, b};
    }
  }
  return best;
}

QIFit orbit_qi_fit(const Group& group, int radius, const QIFitOptions& options) {
  BassSerreTree tree(group);
  TreeBall ball(tree, tree.base(), radius + options.extra_tree_radius, false);
  YModel model(group.presentation(), options.grid_step, {options.window, options.x_max});
  MilleFeuille space(tree, ball, model);
  const MPoint base = space.base_point();
  const GroupBall elements = group.ball(radius);

  // Group translates by level so that each theta2 field is shared.
  std::map<int, std::vector<std::size_t>> by_level;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    by_level[group.t_exponent(elements.elements()[i])].push_back(i);
  }
  YField from_base = model.field(base.y);
  std::vector<std::pair<double, double>> upper;
  std::vector<std::pair<double, double>> lower;
  QIFit fit;
  for (const auto& [level, indices] : by_level) {
    if (level < -options.window || level > options.window) {
      fit.rejected += indices.size();
      continue;
    }
    YField from_y2 = model.field(YPoint{base.y.x, static_cast<double>(level)});
    for (std::size_t i : indices) {
      const double w = elements.lengths()[i];
      try {
        const MPoint moved = space.act(elements.elements()[i], base);
        const MPath path = space.connect_theta(base, moved, from_y2);
        const double d_lower =
            tree.point_distance(base.tree, moved.tree) + from_base.distance_to(moved.y).lower;
        upper.push_back({w, path.total_length});
        lower.push_back({w, d_lower});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::OutsideBall && e.kind() != ErrorKind::OutsideWindow &&
            e.kind() != ErrorKind::PathEscapesWindow) {
          throw;
        }
        ++fit.rejected;
      }
    }
  }
  fit.sample_count = upper.size();
  const AffineBound up = fit_upper_line(upper);
  const AffineBound lo = fit_lower_line(lower);
  fit.A_upper = up.slope;
  fit.B_upper = up.intercept;
  fit.a_lower = lo.slope;
  fit.b_lower = 0.0 - lo.intercept;
  return fit;
}

}  // namespace hnngeo
