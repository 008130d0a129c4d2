#include <cmath>
#include <deque>
#include <random>

#include "doctest.h"
#include "hnngeo/compression.hpp"
#include "hnngeo/error.hpp"

using namespace hnngeo;

namespace {

void check_envelopes(const ExponentEstimate& est,
                     const std::vector<std::pair<double, double>>& samples) {
  CHECK(est.alpha_hat >= 0.0);
  CHECK(est.alpha_hat <= 1.0);
  CHECK(est.C_hat >= 0.0);
  CHECK(est.D_hat >= 0.0);
  CHECK(est.B_hat >= 0.0);
  std::size_t lower_bad = 0;
  std::size_t upper_bad = 0;
  for (const auto& [d, img] : samples) {
    if (d <= 0.0) continue;
    const double scale = 1e-12 * (1.0 + img);
    if (img < est.C_hat * std::pow(d, est.alpha_hat) - est.D_hat - scale) ++lower_bad;
    if (img > est.A_hat * d + est.B_hat + scale) ++upper_bad;
  }
  CHECK(lower_bad == 0);
  CHECK(upper_bad == 0);
}

std::vector<std::pair<double, double>> power_law(double gamma, int kmax = 256) {
  std::vector<std::pair<double, double>> out;
  for (int k = 1; k <= kmax; ++k) out.push_back({double(k), std::pow(double(k), gamma)});
  return out;
}

// All-pairs distances inside the ball by BFS over its own edge list.
std::vector<std::vector<int>> ball_distances(const TreeBall& ball) {
  const std::size_t n = ball.vertices().size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [a, b] : ball.edge_ends()) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (std::size_t s = 0; s < n; ++s) {
    std::deque<std::size_t> q{s};
    dist[s][s] = 0;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop_front();
      for (std::size_t w : adj[v]) {
        if (dist[s][w] < 0) {
          dist[s][w] = dist[s][v] + 1;
          q.push_back(w);
        }
      }
    }
  }
  return dist;
}

BassSerreTree bs12() { return BassSerreTree(Group(presentation_from_preset("bs:1:2"))); }

}  // namespace

TEST_CASE("exponent of exact power laws") {
  for (double gamma : {0.25, 0.5, 1.0}) {
    CAPTURE(gamma);
    const auto samples = power_law(gamma);
    const ExponentEstimate est = estimate_exponent(samples);
    CHECK(std::abs(est.alpha_hat - gamma) <= 0.01 + 1e-12);
    CHECK(est.pair_count == 256);
    CHECK(est.d_min == 1.0);
    CHECK(est.d_max == 256.0);
    check_envelopes(est, samples);
  }
  const ExponentEstimate id = estimate_exponent(power_law(1.0, 100));
  CHECK(id.alpha_hat == 1.0);
  CHECK(id.C_hat == 1.0);
  CHECK(id.D_hat == 0.0);
  CHECK(id.A_hat == 1.0);
  CHECK(id.B_hat == 0.0);

  // Off-grid law: recovered within one step.
  const auto samples = power_law(0.337);
  const ExponentEstimate est = estimate_exponent(samples);
  CHECK(est.alpha_hat == doctest::Approx(0.33));
  check_envelopes(est, samples);
}

TEST_CASE("scaling image distances") {
  auto samples = power_law(0.5);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> noise(0.8, 1.2);
  for (auto& s : samples) s.second *= noise(rng);
  const ExponentEstimate base = estimate_exponent(samples);
  for (double c : {0.125, 3.0, 1000.0}) {
    auto scaled = samples;
    for (auto& s : scaled) s.second *= c;
    const ExponentEstimate est = estimate_exponent(scaled);
    CHECK(est.alpha_hat == base.alpha_hat);
    CHECK(est.C_hat == doctest::Approx(c * base.C_hat));
    CHECK(est.A_hat == doctest::Approx(c * base.A_hat));
    check_envelopes(est, scaled);
  }
}

TEST_CASE("estimator errors") {
  auto expect = [](const std::vector<std::pair<double, double>>& s, ErrorKind kind) {
    try {
      estimate_exponent(s);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == kind);
    }
  };
  expect(power_law(0.5, 40), ErrorKind::InsufficientRange);
  std::vector<std::pair<double, double>> narrow;
  for (int i = 0; i < 100; ++i) narrow.push_back({1.0 + (i % 7), 1.0});
  expect(narrow, ErrorKind::InsufficientRange);
  auto zeros = power_law(0.5);
  for (auto& s : zeros) s.second = 0.0;
  expect(zeros, ErrorKind::NoValidEnvelope);
}

TEST_CASE("edge indicator is exact on a small ball") {
  const BassSerreTree tree = bs12();
  const TreeBall ball(tree, tree.base(), 5);
  REQUIRE(ball.vertices().size() >= 90);
  const auto dist = ball_distances(ball);
  for (double p : {2.0, 3.0, 4.0}) {
    CAPTURE(p);
    const TreeEmbedding emb =
        embed_tree({EmbeddingKind::EdgeIndicator, 0.5, p, tree.base()}, tree, ball);
    const auto root = *ball.index_of(tree.base());
    CHECK(emb.images[root].empty());
    std::size_t bad = 0;
    for (std::size_t i = 0; i < ball.vertices().size(); ++i) {
      for (std::size_t j = 0; j < ball.vertices().size(); ++j) {
        if (lp_power_distance(emb.images[i], emb.images[j], p) != double(dist[i][j])) ++bad;
      }
    }
    CHECK(bad == 0);
  }
  // Rooted elsewhere.
  const TreeVertex other = ball.vertices()[17];
  const TreeEmbedding emb =
      embed_tree({EmbeddingKind::EdgeIndicator, 0.5, 2.0, other}, tree, ball);
  for (std::size_t j = 0; j < ball.vertices().size(); ++j) {
    CHECK(lp_power_distance(emb.images[3], emb.images[j], 2.0) == double(dist[3][j]));
  }
}

TEST_CASE("embedding errors") {
  const BassSerreTree tree = bs12();
  const TreeBall ball(tree, tree.base(), 2);
  const TreeVertex far = tree.vertex_of(tree.group().t(4));
  CHECK_THROWS_AS(embed_tree({EmbeddingKind::EdgeIndicator, 0.5, 2.0, far}, tree, ball),
                  Error);
  CHECK_THROWS_AS(embed_tree({EmbeddingKind::EdgeIndicator, 0.5, 1.0, tree.base()}, tree, ball),
                  Error);
  CHECK_THROWS_AS(
      embed_tree({EmbeddingKind::WeightedGeodesic, 1.0, 2.0, tree.base()}, tree, ball), Error);
}

TEST_CASE("edge indicator exponent is 1/p") {
  const BassSerreTree tree = bs12();
  const TreeBall ball(tree, tree.base(), 9);
  REQUIRE(ball.vertices().size() >= 1000);
  for (double p : {2.0, 4.0}) {
    CAPTURE(p);
    const TreeEmbedding emb =
        embed_tree({EmbeddingKind::EdgeIndicator, 0.5, p, tree.base()}, tree, ball);
    const auto samples = tree_samples(emb, tree, ball, p, 1);
    const ExponentEstimate est = estimate_exponent(samples);
    CHECK(std::abs(est.alpha_hat - 1.0 / p) <= 0.05);
    check_envelopes(est, samples);
  }
}

TEST_CASE("weighted geodesic family") {
  const BassSerreTree tree = bs12();
  const TreeBall ball(tree, tree.base(), 8);
  double previous = -1.0;
  for (int b = 1; b <= 9; ++b) {
    const double beta = b / 10.0;
    CAPTURE(beta);
    const TreeEmbedding emb =
        embed_tree({EmbeddingKind::WeightedGeodesic, beta, 2.0, tree.base()}, tree, ball);
    for (const auto& [u, v] : ball.edge_ends()) {
      CHECK(lp_distance(emb.images[u], emb.images[v], 2.0) >= 1.0);
    }
    const auto samples = tree_samples(emb, tree, ball, 2.0, 1);
    const ExponentEstimate est = estimate_exponent(samples);
    check_envelopes(est, samples);
    CHECK(est.alpha_hat >= previous - 0.01);
    MESSAGE("beta " << beta << " alpha_hat " << est.alpha_hat);
    previous = est.alpha_hat;
  }
}

TEST_CASE("pair sampling") {
  CHECK(sample_pairs(1, 0).empty());
  CHECK(sample_pairs(10, 0).size() == 45);
  const auto a = sample_pairs(5000, 7);
  const auto b = sample_pairs(5000, 7);
  CHECK(a.size() == kSampledPairs);
  CHECK(a == b);
  CHECK(a != sample_pairs(5000, 8));
  for (const auto& [i, j] : a) CHECK(i != j);
}

TEST_CASE("group embedding") {
  const BassSerreTree tree = bs12();
  const Group& g = tree.group();
  const TreeBall ball(tree, tree.base(), 5);
  const GroupBall elements = g.ball(5);
  const GroupEmbedding emb = embed_group(
      {EmbeddingKind::EdgeIndicator, 0.5, 2.0, tree.base()}, tree, ball, elements.elements());
  CHECK(emb.tree_part[0].empty());
  CHECK(emb.flat_part[0] == RealVec{0.0, 0.0});

  std::size_t collisions = 0;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    for (std::size_t j = i + 1; j < elements.size(); ++j) {
      if (emb.distance(i, j) == 0.0) ++collisions;
    }
  }
  CHECK(collisions == 0);

  const GroupBall lengths = g.ball(10);
  const auto samples = group_samples(emb, g, lengths, 3);
  const ExponentEstimate est = estimate_exponent(samples);
  check_envelopes(est, samples);
  CHECK(est.A_hat > 0.0);
  CHECK(est.alpha_hat > 0.0);
}

TEST_CASE("compose_min") {
  const SymbolicExponent one = exponent_literal(1.0);
  const SymbolicExponent half = exponent_literal(0.5);
  CHECK(compose_min(one, one) == one);
  CHECK(compose_min(one, one).value == 1.0);
  CHECK(compose_min(half, one).value == 0.5);
  CHECK(compose_min(one, half).value == 0.5);
  CHECK(compose_min(half, one).expr == "min(0.5, 1)");
  for (int k = 0; k <= 100; ++k) {
    const SymbolicExponent a = exponent_literal(k / 100.0);
    CHECK(compose_min(a, a) == a);
  }
  const SymbolicExponent tree = exponent_named("alpha_T", 0.97);
  const SymbolicExponent y = exponent_named("alpha_Y", 0.5);
  const SymbolicExponent both = compose_min(tree, y);
  CHECK(both.value == 0.5);
  CHECK(both.expr == "min(alpha_T, alpha_Y)");
  CHECK(compose_min(both, tree).value == 0.5);
}
