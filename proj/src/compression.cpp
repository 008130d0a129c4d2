#include "hnngeo/compression.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "hnngeo/error.hpp"

namespace hnngeo {

std::string to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::EdgeIndicator:
      return "edge_indicator";
    case EmbeddingKind::WeightedGeodesic:
      return "weighted_geodesic";
    case EmbeddingKind::OrbitConcat:
      return "orbit_concat";
  }
  return "unknown";
}

void EmbeddingSpec::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::ConfigError, "target exponent p must be > 1");
  }
  if (kind == EmbeddingKind::WeightedGeodesic && !(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorKind::ConfigError, "beta must lie in (0,1)");
  }
}

double lp_power_distance(const SparseVector& a, const SparseVector& b, double p) {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      sum += std::pow(std::abs(a[i++].second), p);
    } else if (i == a.size() || b[j].first < a[i].first) {
      sum += std::pow(std::abs(b[j++].second), p);
    } else {
      sum += std::pow(std::abs(a[i++].second - b[j++].second), p);
    }
  }
  return sum;
}

double lp_distance(const SparseVector& a, const SparseVector& b, double p) {
  return std::pow(lp_power_distance(a, b, p), 1.0 / p);
}

TreeEmbedding embed_tree(const EmbeddingSpec& spec, const BassSerreTree& /*tree*/,
                         const TreeBall& ball) {
  spec.validate();
  if (spec.kind == EmbeddingKind::OrbitConcat) {
    throw Error(ErrorKind::ConfigError, "orbit_concat is not a tree embedding");
  }
  const auto root = ball.index_of(spec.root);
  if (!root) throw Error(ErrorKind::OutsideBall, "embedding root outside the tree ball");

  const std::size_t nv = ball.vertices().size();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacent(nv);
  for (std::size_t e = 0; e < ball.edge_ends().size(); ++e) {
    const auto [a, b] = ball.edge_ends()[e];
    adjacent[a].push_back({b, e});
    adjacent[b].push_back({a, e});
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(nv, kNone);
  std::vector<std::size_t> parent_edge(nv, kNone);
  TreeEmbedding out;
  out.depth.assign(nv, -1);
  out.depth[*root] = 0;
  std::deque<std::size_t> queue{*root};
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (const auto& [w, e] : adjacent[v]) {
      if (out.depth[w] >= 0) continue;
      out.depth[w] = out.depth[v] + 1;
      parent[w] = v;
      parent_edge[w] = e;
      queue.push_back(w);
    }
  }

  out.images.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    SparseVector& img = out.images[v];
    int j = 1;  // distance from v to the far endpoint of the current edge
    for (std::size_t w = v; parent[w] != kNone; w = parent[w], ++j) {
      const double value = spec.kind == EmbeddingKind::EdgeIndicator
                               ? 1.0
                               : std::pow(1.0 + j, spec.beta);
      img.push_back({parent_edge[w], value});
    }
    std::sort(img.begin(), img.end());
  }
  return out;
}

double GroupEmbedding::distance(std::size_t i, std::size_t j) const {
  double sum = lp_power_distance(tree_part[i], tree_part[j], p);
  for (std::size_t k = 0; k < flat_part[i].size(); ++k) {
    sum += std::pow(std::abs(flat_part[i][k] - flat_part[j][k]), p);
  }
  return std::pow(sum, 1.0 / p);
}

GroupEmbedding embed_group(const EmbeddingSpec& tree_spec, const BassSerreTree& tree,
                           const TreeBall& ball, const std::vector<GroupElement>& elements,
                           double translation_scale) {
  const TreeEmbedding tree_images = embed_tree(tree_spec, tree, ball);
  const Group& group = tree.group();
  GroupEmbedding out;
  out.p = tree_spec.p;
  out.elements = elements;
  out.tree_part.reserve(elements.size());
  out.flat_part.reserve(elements.size());
  for (const auto& g : elements) {
    const auto v = ball.index_of(tree.vertex_of(g));
    if (!v) throw Error(ErrorKind::OutsideBall, "element's vertex outside the tree ball");
    out.tree_part.push_back(tree_images.images[*v]);
    const SemidirectElement j = group.j_N(g);
    RealVec flat = to_real(j.translation);
    for (auto& c : flat) c *= translation_scale;
    flat.push_back(static_cast<double>(j.level));
    out.flat_part.push_back(std::move(flat));
  }
  return out;
}

ExponentEstimate estimate_exponent(const std::vector<std::pair<double, double>>& samples) {
  // Only the extreme image distance at each d matters.
  std::map<double, std::pair<double, double>> by_d;  // d -> (min img, max img)
  ExponentEstimate est;
  bool any_positive = false;
  for (const auto& [d, img] : samples) {
    if (!(d > 0.0)) continue;
    ++est.pair_count;
    any_positive = any_positive || img > 0.0;
    auto [it, inserted] = by_d.try_emplace(d, img, img);
    if (!inserted) {
      it->second.first = std::min(it->second.first, img);
      it->second.second = std::max(it->second.second, img);
    }
  }
  if (est.pair_count < kMinPairs) {
    throw Error(ErrorKind::InsufficientRange, "fewer than 50 pairs with positive distance");
  }
  est.d_min = by_d.begin()->first;
  est.d_max = by_d.rbegin()->first;
  if (est.d_max < kMinRange * est.d_min) {
    throw Error(ErrorKind::InsufficientRange, "distances span less than a factor of 8");
  }
  if (!any_positive) {
    throw Error(ErrorKind::NoValidEnvelope, "every image distance is zero");
  }

  // An exponent is sustained when the worst ratio img / d^alpha at large
  // scales is no smaller than at small scales.
  const double split = std::sqrt(est.d_min * est.d_max);
  auto worst_ratio = [&](double alpha, bool far) {
    double c = std::numeric_limits<double>::infinity();
    for (const auto& [d, range] : by_d) {
      if ((d >= split) != far) continue;
      c = std::min(c, range.first / std::pow(d, alpha));
    }
    return c;
  };
  const int steps = static_cast<int>(std::lround(1.0 / kAlphaStep));
  est.alpha_hat = 0.0;
  est.C_hat = worst_ratio(0.0, true);
  for (int k = steps; k >= 0; --k) {
    const double alpha = k / static_cast<double>(steps);
    const double c_far = worst_ratio(alpha, true);
    const double c_near = worst_ratio(alpha, false);
    if (c_far > 0.0 && c_far >= c_near * (1.0 - 1e-9)) {
      est.alpha_hat = alpha;
      est.C_hat = c_far;
      break;
    }
  }
  for (const auto& [d, range] : by_d) {
    est.D_hat = std::max(est.D_hat, est.C_hat * std::pow(d, est.alpha_hat) - range.first);
  }

  for (const auto& [d, range] : by_d) {
    if (d >= split) est.A_hat = std::max(est.A_hat, range.second / d);
  }
  for (const auto& [d, range] : by_d) {
    est.B_hat = std::max(est.B_hat, range.second - est.A_hat * d);
  }
  return est;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t count,
                                                              std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (count < 2) return pairs;
  if (count <= kAllPairsLimit) {
    pairs.reserve(count * (count - 1) / 2);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i + 1; j < count; ++j) pairs.push_back({i, j});
    }
    return pairs;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  pairs.reserve(kSampledPairs);
  while (pairs.size() < kSampledPairs) {
    const std::size_t i = pick(rng);
    const std::size_t j = pick(rng);
    if (i != j) pairs.push_back({i, j});
  }
  return pairs;
}

std::vector<std::pair<double, double>> tree_samples(const TreeEmbedding& embedding,
                                                    const BassSerreTree& tree,
                                                    const TreeBall& ball, double p,
                                                    std::uint64_t seed) {
  const auto& vs = ball.vertices();
  std::vector<std::pair<double, double>> out;
  for (const auto& [i, j] : sample_pairs(vs.size(), seed)) {
    out.push_back({static_cast<double>(tree.vertex_distance(vs[i], vs[j])),
                   lp_distance(embedding.images[i], embedding.images[j], p)});
  }
  return out;
}

std::vector<std::pair<double, double>> group_samples(const GroupEmbedding& embedding,
                                                     const Group& group,
                                                     const GroupBall& lengths,
                                                     std::uint64_t seed) {
  std::vector<std::pair<double, double>> out;
  const auto& es = embedding.elements;
  for (const auto& [i, j] : sample_pairs(es.size(), seed)) {
    const auto d = lengths.length_of(group.multiply(group.inverse(es[i]), es[j]));
    if (!d) throw Error(ErrorKind::BudgetExceeded, "pair distance beyond the length table");
    out.push_back({static_cast<double>(*d), embedding.distance(i, j)});
  }
  return out;
}

SymbolicExponent exponent_literal(double value) {
  std::ostringstream s;
  s << value;
  return {value, s.str()};
}

SymbolicExponent exponent_named(std::string name, double value) {
  return {value, std::move(name)};
}

SymbolicExponent compose_min(const SymbolicExponent& a, const SymbolicExponent& b) {
  if (a == b) return a;
  return {std::min(a.value, b.value), "min(" + a.expr + ", " + b.expr + ")"};
}

}  // namespace hnngeo
