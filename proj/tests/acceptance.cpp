// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any
// criterion fails. Oracles here are independent of the library code paths
// they check (affine images, brute-force coset counts, BFS over edge lists).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "hnngeo/bass_serre.hpp"
#include "hnngeo/compression.hpp"
#include "hnngeo/error.hpp"
#include "hnngeo/group.hpp"
#include "hnngeo/millefeuille.hpp"
#include "hnngeo/y_space.hpp"
#include "test_util.hpp"

using namespace hnngeo;
using namespace hnngeo::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed checks with a short reason.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (failures_++ < 5) reasons_ << what << "; ";
    }
  }
  void note(const std::string& s) { notes_ << s << "; "; }
  Outcome outcome() const {
    std::string d = notes_.str() + (pass_ ? "" : "failed: " + reasons_.str());
    if (failures_ > 5) d += "(" + std::to_string(failures_) + " failures)";
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  std::size_t failures_ = 0;
  std::ostringstream reasons_;
  std::ostringstream notes_;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// ---- 1. Normal forms against the affine representation -------------------
// (a o b)(y) = a(b(y)).
AffineMap compose(const AffineMap& a, const AffineMap& b) {
  return {a.scale * b.scale, a.scale * b.offset + a.offset};
}

Outcome criterion1() {
  Checker c;
  for (const char* preset : {"bs:1:2", "bs:1:3"}) {
    const Group g(presentation_from_preset(preset));
    std::mt19937_64 rng(101);
    std::size_t agree = 0;
    std::size_t equal_pairs = 0;
    for (int i = 0; i < 1000; ++i) {
      const Word w1 = random_word(g, rng, 12);
      Word w2;
      if (i % 2 == 0) {
        w2 = random_word(g, rng, 12);
      } else {
        // Same element spelled differently.
        w2 = w1;
        insert_relators(g, w2, rng, 3);
      }
      const bool nf_equal = g.britton_reduce(w1) == g.britton_reduce(w2);
      const bool oracle_equal = g.affine_oracle(w1) == g.affine_oracle(w2);
      if (nf_equal == oracle_equal) ++agree;
      if (oracle_equal) ++equal_pairs;
    }
    c.check(agree == 1000, std::string(preset) + " normal form/oracle disagreement");
    c.note(std::string(preset) + " agree " + std::to_string(agree) + "/1000 (" +
           std::to_string(equal_pairs) + " equal)");

    // Group axioms, exactly.
    std::size_t axiom_failures = 0;
    for (int i = 0; i < 500; ++i) {
      const GroupElement a = random_element(g, rng, 8);
      const GroupElement b = random_element(g, rng, 8);
      const GroupElement d = random_element(g, rng, 8);
      if (g.multiply(g.multiply(a, b), d) != g.multiply(a, g.multiply(b, d))) ++axiom_failures;
      if (g.multiply(a, g.identity()) != a || g.multiply(g.identity(), a) != a) ++axiom_failures;
      if (g.multiply(a, g.inverse(a)) != g.identity()) ++axiom_failures;
      if (g.britton_reduce(g.to_word(a)) != a) ++axiom_failures;
      if (g.affine_oracle(g.multiply(a, b)) != compose(g.affine_oracle(a), g.affine_oracle(b))) {
        ++axiom_failures;
      }
    }
    c.check(axiom_failures == 0, std::string(preset) + " axiom failures");
  }
  return c.outcome();
}

// ---- 2. Bass-Serre balls are trees with the right degrees ----------------

// [Z^n : m Z^n] by listing residues of a box modulo the lattice.
std::int64_t coset_count(const IntMatrix& m) {
  const std::size_t n = m.dim();
  const RatMatrix inv = inverse(to_rational(m));
  const std::int64_t side = 8;
  std::int64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= side;
  std::vector<IntVec> classes;
  for (std::int64_t code = 0; code < total; ++code) {
    IntVec v(n);
    std::int64_t rest = code;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = rest % side;
      rest /= side;
    }
    bool seen = false;
    for (const auto& r : classes) {
      const RatVec u = mul(inv, to_rational(sub(v, r)));
      bool integral = true;
      for (const auto& q : u) integral = integral && denominator(q) == 1;
      if (integral) {
        seen = true;
        break;
      }
    }
    if (!seen) classes.push_back(v);
  }
  return static_cast<std::int64_t>(classes.size());
}

Outcome criterion2() {
  Checker c;
  const std::vector<std::pair<std::string, std::int64_t>> cases{
      {"bs:1:2", 3}, {"bs:2:3", 5}, {"abc:2:2,1;1,1", 2}};
  for (const auto& [preset, stated] : cases) {
    const Presentation pres = presentation_from_preset(preset);
    const std::int64_t expected = coset_count(pres.m1()) + coset_count(pres.m2());
    c.check(expected == stated, preset + " oracle degree differs from the stated value");
    const BassSerreTree tree{Group(pres)};
    for (int r = 0; r <= 5; ++r) {
      const TreeBall ball(tree, tree.base(), r);
      const std::size_t nv = ball.vertices().size();
      c.check(ball.edges().size() + 1 == nv, preset + " |E| != |V|-1 at r=" + std::to_string(r));
      // Connectivity by union-find over the edge list.
      std::vector<std::size_t> parent(nv);
      std::iota(parent.begin(), parent.end(), 0);
      std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
      };
      std::vector<std::size_t> degree(nv, 0);
      for (const auto& [a, b] : ball.edge_ends()) {
        parent[find(a)] = find(b);
        ++degree[a];
        ++degree[b];
      }
      std::size_t roots = 0;
      for (std::size_t v = 0; v < nv; ++v) roots += find(v) == v;
      c.check(roots == 1, preset + " ball not connected");
      for (std::size_t v = 0; v < nv; ++v) {
        if (tree.vertex_distance(tree.base(), ball.vertices()[v]) < r) {
          c.check(static_cast<std::int64_t>(degree[v]) == expected, preset + " interior degree");
        }
      }
      if (r == 5) c.note(preset + " |V(5)|=" + std::to_string(nv) + " deg " + std::to_string(expected));
    }
  }
  return c.outcome();
}

// ---- 3. Height equivariance and fibre preservation ------------------------
Outcome criterion3() {
  Checker c;
  std::size_t tree_fail = 0;
  std::size_t y_fail = 0;
  std::size_t fibre_fail = 0;
  for (const char* preset : {"bs:1:2", "bs:2:3", "abc:2:2,1;1,1"}) {
    const BassSerreTree tree{Group(presentation_from_preset(preset))};
    const Group& g = tree.group();
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> eighth(0, 7);
    std::uniform_int_distribution<int> coord(-16, 16);
    for (int i = 0; i < 1000; ++i) {
      const GroupElement gamma = random_element(g, rng, 8);
      const GroupElement at = random_element(g, rng, 8);
      const TreePoint x = tree.normalize({tree.edge_of(at), eighth(rng) / 8.0});
      if (tree.height(tree.act_point(gamma, x)) != tree.height(x) + g.t_exponent(gamma)) {
        ++tree_fail;
      }
      RatYPoint y;
      for (std::size_t k = 0; k < g.rank(); ++k) y.x.push_back(Rational(coord(rng), 4));
      y.s = Rational(coord(rng), 8);
      if (height_b(act_y(g, gamma, y)) != height_b(y) + g.t_exponent(gamma)) ++y_fail;
    }
  }
  {
    const BassSerreTree tree{Group(presentation_from_preset("bs:1:2"))};
    const TreeBall ball(tree, tree.base(), 12, false);
    const YModel model(tree.group().presentation(), 0.05, {12, 1e6});
    const MilleFeuille space(tree, ball, model);
    const auto elements = tree.group().ball(4).elements();
    std::mt19937_64 rng(304);
    std::size_t done = 0;
    while (done < 500) {
      const auto m = sample_mpoint(space, elements, rng);
      if (!m) continue;
      const GroupElement gamma = random_element(tree.group(), rng, 4);
      const MPoint moved = space.act(gamma, *m);
      // Exact: dyadic heights shift by integers.
      if (tree.height(moved.tree) != moved.y.s) ++fibre_fail;
      ++done;
    }
  }
  c.check(tree_fail == 0, "c equivariance");
  c.check(y_fail == 0, "b equivariance");
  c.check(fibre_fail == 0, "fibre preservation");
  c.note("3x1000 tree, 3x1000 Y, 500 fibre samples; failures " + std::to_string(tree_fail) +
         "/" + std::to_string(y_fail) + "/" + std::to_string(fibre_fail));
  return c.outcome();
}

// ---- 4. Discretized bilipschitz comparison of d and d_M -------------------
Outcome criterion4() {
  Checker c;
  const BassSerreTree tree{Group(presentation_from_preset("bs:1:2"))};
  // Sampled points lie on edges gamma [base, t], |gamma| <= 5.
  const TreeBall ball(tree, tree.base(), 6, false);
  const YModel model(tree.group().presentation(), 0.05, {6, 32.0});
  const MilleFeuille space(tree, ball, model);
  const auto elements = tree.group().ball(5).elements();
  const LemmaReport rep = verify_lemma(space, elements, 300, 4, 6000);
  c.check(rep.pairs >= 300, "fewer than 300 pairs");
  c.check(rep.kappa <= 0.15, "kappa above 0.15");
  c.check(rep.lower_violations == 0, "d > d_M");
  c.check(rep.upper_violations == 0, "d_M > 4(1+k) d");
  c.check(rep.theta1_violations == 0, "theta1 > 2 d_T");
  c.check(rep.theta2_violations == 0, "theta2 > 2(1+k) d_Y");
  c.note("pairs " + std::to_string(rep.pairs) + ", rejected " + std::to_string(rep.rejected) +
         ", kappa " + fmt(rep.kappa) + ", ratio [" + fmt(rep.ratio_min) + ", " +
         fmt(rep.ratio_max) + "]");
  return c.outcome();
}

// ---- 5. Y metric: vertical convergence and near-isometry ------------------
Outcome criterion5() {
  Checker c;
  const Presentation pres = presentation_from_preset("bs:1:2");
  const YPoint a{{0.3}, -1.2};
  const YPoint b{{0.3}, 2.35};
  const double exact = std::abs(b.s - a.s);
  double previous = std::numeric_limits<double>::infinity();
  std::string errors;
  for (double h : {0.2, 0.1, 0.05}) {
    const YModel model(pres, h, {6, 32.0});
    const double err = std::abs(model.distance(a, b).upper - exact) / exact;
    errors += fmt(err, 3) + " ";
    c.check(err <= previous + 1e-12, "vertical error grew as h decreased");
    previous = err;
  }
  c.check(previous <= 0.01, "vertical error above 1% at h=0.05");
  c.note("relative vertical errors " + errors);

  const Group g(pres);
  const double h = 0.05;
  const YModel model(pres, h, {6, 32.0});
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> xs(-3.0, 3.0);
  std::uniform_real_distribution<double> ss(-2.0, 2.0);
  std::size_t samples = 0;
  std::size_t violations = 0;
  while (samples < 200) {
    const GroupElement el = random_element(g, rng, 6);
    if (std::abs(g.t_exponent(el)) > 2) continue;
    const YPoint p{{xs(rng)}, ss(rng)};
    const YPoint q{{xs(rng)}, ss(rng)};
    const YPoint gp = act_y(g, el, p);
    const YPoint gq = act_y(g, el, q);
    if (!model.in_window(gp) || !model.in_window(gq)) continue;
    const double d = model.distance(p, q).upper;
    const double dg = model.distance(gp, gq).upper;
    if (std::abs(dg - d) > 2.0 * model.kappa() * d + 4.0 * h) ++violations;
    ++samples;
  }
  c.check(violations == 0, "near-isometry bound");
  c.note("200 action samples, violations " + std::to_string(violations));
  return c.outcome();
}

// ---- 6. Injectivity certificate and normalization --------------------------
Outcome criterion6() {
  Checker c;
  const BassSerreTree tree{Group(presentation_from_preset("bs:1:2"))};
  const TreeBall ball(tree, tree.base(), 11, false);
  const YModel model(tree.group().presentation(), 0.05, {6, 32.0});
  const MilleFeuille space(tree, ball, model);
  const ProperReport proper = space.properness_probe(5);
  c.check(proper.collisions == 0, "collisions in ball(5)");
  const auto elements = tree.group().ball(5).elements();
  const NormalizationSweep sweep = normalization_sweep(space, elements, 300, 6);
  c.check(sweep.samples == 300, "fewer than 300 normalization samples");
  c.check(sweep.successes == sweep.samples, "normalization failures");
  c.note("ball(5) " + std::to_string(proper.elements) + " elements, collisions " +
         std::to_string(proper.collisions) + "; normalized " + std::to_string(sweep.successes) +
         "/" + std::to_string(sweep.samples));
  return c.outcome();
}

// ---- 7. Orbit quasi-isometry fit -------------------------------------------
Outcome criterion7() {
  Checker c;
  const Group g(presentation_from_preset("bs:1:2"));
  const QIFit fit4 = orbit_qi_fit(g, 4);
  const QIFit fit6 = orbit_qi_fit(g, 6);
  c.check(fit6.a_lower > 0.0, "a_lower not positive");
  c.check(fit6.a_lower >= 0.5 * fit4.a_lower, "a_lower unstable from r=4 to r=6");
  c.check(fit6.rejected == 0, "samples rejected");
  c.note("r=6: " + fmt(fit6.a_lower) + " w - " + fmt(fit6.b_lower) + " <= d <= d_M <= " +
         fmt(fit6.A_upper) + " w + " + fmt(fit6.B_upper) + "; r=4 a_lower " + fmt(fit4.a_lower));
  return c.outcome();
}

// ---- 8. Compression estimator calibration ---------------------------------
bool envelopes_hold(const ExponentEstimate& e, const std::vector<std::pair<double, double>>& s) {
  for (const auto& [d, img] : s) {
    if (d <= 0.0) continue;
    const double slack = 1e-12 * (1.0 + img);
    if (img < e.C_hat * std::pow(d, e.alpha_hat) - e.D_hat - slack) return false;
    if (img > e.A_hat * d + e.B_hat + slack) return false;
  }
  return true;
}

Outcome criterion8() {
  Checker c;
  std::string laws;
  for (double gamma : {0.25, 0.5, 1.0}) {
    std::vector<std::pair<double, double>> s;
    for (int k = 1; k <= 256; ++k) s.push_back({double(k), std::pow(double(k), gamma)});
    const ExponentEstimate e = estimate_exponent(s);
    c.check(std::abs(e.alpha_hat - gamma) <= 0.01 + 1e-12, "power law " + fmt(gamma));
    c.check(envelopes_hold(e, s), "power-law envelopes");
    laws += fmt(e.alpha_hat) + " ";
  }
  c.note("power laws -> " + laws);

  const BassSerreTree tree{Group(presentation_from_preset("bs:1:2"))};
  {
    // Brute force on a ~100-vertex ball with distances from its own edge list.
    const TreeBall small(tree, tree.base(), 5);
    const std::size_t n = small.vertices().size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [a, b] : small.edge_ends()) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::size_t bad = 0;
    for (double p : {2.0, 4.0}) {
      const TreeEmbedding emb =
          embed_tree({EmbeddingKind::EdgeIndicator, 0.5, p, tree.base()}, tree, small);
      for (std::size_t s = 0; s < n; ++s) {
        std::vector<int> dist(n, -1);
        dist[s] = 0;
        std::deque<std::size_t> q{s};
        while (!q.empty()) {
          const std::size_t v = q.front();
          q.pop_front();
          for (std::size_t w : adj[v]) {
            if (dist[w] < 0) {
              dist[w] = dist[v] + 1;
              q.push_back(w);
            }
          }
        }
        for (std::size_t t = 0; t < n; ++t) {
          if (lp_power_distance(emb.images[s], emb.images[t], p) != double(dist[t])) ++bad;
        }
      }
    }
    c.check(bad == 0, "edge indicator not exact");
    c.note("exact law on " + std::to_string(n) + " vertices");
  }
  {
    const TreeBall big(tree, tree.base(), 9);
    c.check(big.vertices().size() >= 1000, "ball smaller than 1000 vertices");
    std::string alphas;
    for (double p : {2.0, 4.0}) {
      const TreeEmbedding emb =
          embed_tree({EmbeddingKind::EdgeIndicator, 0.5, p, tree.base()}, tree, big);
      const auto s = tree_samples(emb, tree, big, p, 8);
      const ExponentEstimate e = estimate_exponent(s);
      c.check(std::abs(e.alpha_hat - 1.0 / p) <= 0.05, "edge indicator exponent at p=" + fmt(p));
      c.check(envelopes_hold(e, s), "edge indicator envelopes");
      alphas += fmt(e.alpha_hat) + " ";
    }
    c.note(std::to_string(big.vertices().size()) + " vertices, p=2,4 -> " + alphas);
  }
  {
    const TreeBall ball(tree, tree.base(), 8);
    double previous = -1.0;
    std::string column;
    for (int b = 1; b <= 9; ++b) {
      const TreeEmbedding emb =
          embed_tree({EmbeddingKind::WeightedGeodesic, b / 10.0, 2.0, tree.base()}, tree, ball);
      const auto s = tree_samples(emb, tree, ball, 2.0, 8);
      const ExponentEstimate e = estimate_exponent(s);
      c.check(e.alpha_hat >= previous - 0.01 - 1e-12, "beta sweep decreased");
      c.check(envelopes_hold(e, s), "weighted envelopes");
      previous = e.alpha_hat;
      column += fmt(e.alpha_hat) + " ";
    }
    c.note("beta sweep " + column);
  }
  return c.outcome();
}

// ---- 9. Composition rule ----------------------------------------------------
Outcome criterion9() {
  Checker c;
  const SymbolicExponent one = exponent_literal(1.0);
  const SymbolicExponent half = exponent_literal(0.5);
  c.check(compose_min(one, one).value == 1.0, "min(1,1)");
  c.check(compose_min(half, one).value == 0.5, "min(0.5,1)");
  c.check(compose_min(one, half).value == 0.5, "min(1,0.5)");
  for (int k = 0; k <= 100; ++k) {
    const SymbolicExponent a = exponent_literal(k / 100.0);
    c.check(compose_min(a, a) == a, "idempotence");
  }
  // Group bound from the two factors: tree and Y both contribute 1.
  const SymbolicExponent group =
      compose_min(exponent_named("alpha_T", 1.0), exponent_named("alpha_Y", 1.0));
  c.check(group.value == 1.0, "composed value");
  c.check(group.expr == "min(alpha_T, alpha_Y)", "composed expression");
  c.note("alpha(Gamma) >= " + group.expr + " = " + fmt(group.value));
  return c.outcome();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "normal forms vs affine oracle", 10.0, criterion1},
      {2, "Bass-Serre balls are trees", 30.0, criterion2},
      {3, "height equivariance and fibre", 60.0, criterion3},
      {4, "d <= d_M <= 4(1+k) d", 300.0, criterion4},
      {5, "Y metric sanity", 120.0, criterion5},
      {6, "injectivity and normalization", 60.0, criterion6},
      {7, "orbit QI fit", 120.0, criterion7},
      {8, "compression calibration", 180.0, criterion8},
      {9, "composition rule", 10.0, criterion9},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = cr.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.budget_s) {
      out.pass = false;
      out.detail += " over time budget of " + fmt(cr.budget_s) + " s;";
    }
    if (!out.pass) ++failed;
    std::printf("criterion %d: %s  [%.2f s]  %s | %s\n", cr.id, out.pass ? "PASS" : "FAIL", secs,
                cr.title, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
