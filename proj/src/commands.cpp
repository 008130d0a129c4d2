#include "hnngeo/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hnngeo/bass_serre.hpp"
#include "hnngeo/compression.hpp"
#include "hnngeo/error.hpp"
#include "hnngeo/group.hpp"
#include "hnngeo/millefeuille.hpp"

namespace hnngeo {

namespace {

nlohmann::json header(const RunConfig& config, const std::string& command) {
  nlohmann::json doc;
  doc["command"] = command;
  doc["config"] = to_json(config);
  doc["presentation"] = config.presentation().description();
  doc["seed"] = config.seed;
  return doc;
}

// Fixed-format numbers keep CSV output stable across platforms.
std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

nlohmann::json point_json(const YPoint& p) { return {{"x", p.x}, {"s", p.s}}; }

YModel make_model(const RunConfig& config, const Presentation& presentation) {
  return YModel(presentation, config.grid_step, config.window, config.base_metric);
}

}  // namespace

void write_outputs(const CommandResult& result, const std::string& dir,
                   const std::string& command) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : result.files) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + name);
    out << text;
  }
  std::ofstream out(std::filesystem::path(dir) / (command + ".json"), std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + command + ".json");
  out << result.summary.dump(2) << '\n';
}

CommandResult cmd_normal_form(const RunConfig& config, const std::string& word) {
  const Group group(config.presentation());
  const GroupElement g = group.britton_reduce(group.parse_word(word));
  CommandResult r;
  r.summary = header(config, "normal-form");
  r.summary["word"] = word;
  r.summary["normal_form"] = group.format(g);
  r.summary["t_exponent"] = group.t_exponent(g);
  return r;
}

CommandResult cmd_word_length(const RunConfig& config, const std::string& word) {
  const Group group(config.presentation());
  const GroupElement g = group.britton_reduce(group.parse_word(word));
  const auto length = group.word_length(g, config.tree_radius);
  CommandResult r;
  r.summary = header(config, "word-length");
  r.summary["word"] = word;
  r.summary["normal_form"] = group.format(g);
  r.summary["budget"] = config.tree_radius;
  r.summary["within_budget"] = length.has_value();
  r.summary["length"] = length ? nlohmann::json(*length) : nlohmann::json(nullptr);
  return r;
}

CommandResult cmd_ball_growth(const RunConfig& config) {
  const Group group(config.presentation());
  const GroupBall ball = group.ball(config.tree_radius);
  CommandResult r;
  r.summary = header(config, "ball-growth");
  std::ostringstream csv;
  csv << "radius,sphere_size,ball_size\n";
  nlohmann::json sizes = nlohmann::json::array();
  for (int k = 0; k <= config.tree_radius; ++k) {
    const std::size_t sphere = ball.sphere_end(k) - ball.sphere_begin(k);
    csv << k << ',' << sphere << ',' << ball.sphere_end(k) << '\n';
    sizes.push_back(ball.sphere_end(k));
  }
  r.summary["ball_sizes"] = sizes;
  r.files.push_back({"ball_growth.csv", csv.str()});
  return r;
}

CommandResult cmd_tree_ball(const RunConfig& config) {
  const BassSerreTree tree{Group(config.presentation())};
  const TreeBall ball(tree, tree.base(), config.tree_radius);
  const std::size_t nv = ball.vertices().size();
  std::vector<std::size_t> degree(nv, 0);
  for (const auto& [a, b] : ball.edge_ends()) {
    ++degree[a];
    ++degree[b];
  }
  const auto& pres = tree.group().presentation();
  const std::int64_t expected = pres.index1() + pres.index2();
  std::size_t interior = 0;
  std::size_t bad_degree = 0;
  for (std::size_t i = 0; i < nv; ++i) {
    if (tree.vertex_distance(tree.base(), ball.vertices()[i]) < config.tree_radius) {
      ++interior;
      if (static_cast<std::int64_t>(degree[i]) != expected) ++bad_degree;
    }
  }
  const bool is_tree = ball.edges().size() + 1 == nv;
  CommandResult r;
  r.summary = header(config, "tree-ball");
  r.summary["vertices"] = nv;
  r.summary["edges"] = ball.edges().size();
  r.summary["is_tree"] = is_tree;
  r.summary["expected_degree"] = expected;
  r.summary["interior_vertices"] = interior;
  r.summary["interior_degree_mismatches"] = bad_degree;
  std::ostringstream csv;
  ball.write_edge_csv(csv);
  r.files.push_back({"tree_ball.csv", csv.str()});
  if (!is_tree || bad_degree > 0) r.exit_code = kExitViolation;
  return r;
}

CommandResult cmd_y_dist(const RunConfig& config, const YPoint& from, const YPoint& to) {
  const Presentation pres = config.presentation();
  const YModel model = make_model(config, pres);
  const YDistance d = model.distance(from, to);
  const YPath path = model.geodesic(from, to);
  CommandResult r;
  r.summary = header(config, "y-dist");
  r.summary["from"] = point_json(from);
  r.summary["to"] = point_json(to);
  r.summary["lower"] = d.lower;
  r.summary["upper"] = d.upper;
  r.summary["snap"] = d.snap;
  r.summary["kappa"] = model.kappa();
  std::ostringstream csv;
  for (std::size_t i = 0; i < model.rank(); ++i) csv << 'x' << (i + 1) << ',';
  csv << "s\n";
  for (const auto& p : path.points) {
    for (double c : p.x) csv << num(c) << ',';
    csv << num(p.s) << '\n';
  }
  r.files.push_back({"y_path.csv", csv.str()});
  return r;
}

CommandResult cmd_verify_lemma(const RunConfig& config) {
  const BassSerreTree tree{Group(config.presentation())};
  // Samples sit on edges gamma [base, t] with |gamma| <= radius.
  const TreeBall ball(tree, tree.base(), config.tree_radius + 1, false);
  const YModel model = make_model(config, tree.group().presentation());
  const MilleFeuille space(tree, ball, model);
  const GroupBall elements = tree.group().ball(config.tree_radius);
  const LemmaReport rep = verify_lemma(space, elements.elements(), config.sample_budget,
                                       config.seed, 20 * config.sample_budget);
  CommandResult r;
  r.summary = header(config, "verify-lemma");
  r.summary["kappa"] = rep.kappa;
  r.summary["pairs"] = rep.pairs;
  r.summary["informative_pairs"] = rep.informative;
  r.summary["rejected_samples"] = rep.rejected;
  if (rep.informative > 0) {
    r.summary["ratio"] = {{"min", rep.ratio_min}, {"max", rep.ratio_max}, {"mean", rep.ratio_mean}};
  } else {
    r.summary["ratio"] = nullptr;
  }
  r.summary["fraction_within_bounds"] = rep.fraction_within;
  r.summary["violations"] = {{"lower_le_dM", rep.lower_violations},
                             {"dM_le_4_1pk_upper", rep.upper_violations},
                             {"theta1_le_2dT", rep.theta1_violations},
                             {"theta2_le_2_1pk_dY", rep.theta2_violations}};
  r.summary["ok"] = rep.ok();
  std::ostringstream csv;
  csv << "tree_distance,product_lower,product_upper,dM_upper,theta1,theta2,y21_upper\n";
  for (const auto& row : rep.rows) {
    csv << num(row.tree_distance) << ',' << num(row.product_lower) << ','
        << num(row.product_upper) << ',' << num(row.dM_upper) << ',' << num(row.theta1) << ','
        << num(row.theta2) << ',' << num(row.y21_upper) << '\n';
  }
  r.files.push_back({"lemma_pairs.csv", csv.str()});
  if (!rep.ok()) r.exit_code = kExitViolation;
  return r;
}

CommandResult cmd_probe(const RunConfig& config) {
  const int radius = config.tree_radius;
  const BassSerreTree tree{Group(config.presentation())};
  const TreeBall ball(tree, tree.base(), radius + 6, false);
  const YModel model = make_model(config, tree.group().presentation());
  const MilleFeuille space(tree, ball, model);
  const ProperReport proper = space.properness_probe(radius);
  const GroupBall elements = tree.group().ball(radius);
  const NormalizationSweep sweep =
      normalization_sweep(space, elements.elements(), config.sample_budget, config.seed);
  QIFitOptions qi_options;
  qi_options.grid_step = config.grid_step;
  qi_options.window = config.window.s_max;
  qi_options.x_max = config.window.x_max;
  const QIFit fit = orbit_qi_fit(tree.group(), radius, qi_options);

  CommandResult r;
  r.summary = header(config, "probe");
  r.summary["radius"] = radius;
  r.summary["elements"] = proper.elements;
  r.summary["collisions"] = proper.collisions;
  r.summary["min_displacement_by_length"] = proper.min_displacement_by_length;
  r.summary["displacement_nondecreasing"] = proper.displacement_nondecreasing;
  r.summary["displacement_skipped"] = proper.skipped;
  r.summary["normalization"] = {{"samples", sweep.samples},
                                {"successes", sweep.successes},
                                {"rejected_samples", sweep.rejected},
                                {"success_rate", sweep.samples > 0
                                                     ? double(sweep.successes) / sweep.samples
                                                     : 1.0}};
  r.summary["qi_fit"] = {{"A_upper", fit.A_upper},         {"B_upper", fit.B_upper},
                         {"a_lower", fit.a_lower},         {"b_lower", fit.b_lower},
                         {"sample_count", fit.sample_count}, {"rejected", fit.rejected},
                         {"success", fit.success()}};
  std::ostringstream csv;
  csv << "length,min_displacement_lower\n";
  for (std::size_t k = 0; k < proper.min_displacement_by_length.size(); ++k) {
    csv << k << ',' << num(proper.min_displacement_by_length[k]) << '\n';
  }
  r.files.push_back({"displacement.csv", csv.str()});
  if (proper.collisions > 0 || sweep.successes < sweep.samples) r.exit_code = kExitViolation;
  return r;
}

CommandResult cmd_estimate_compression(const RunConfig& config) {
  const BassSerreTree tree{Group(config.presentation())};
  const Group& group = tree.group();
  const TreeBall ball(tree, tree.base(), config.tree_radius);
  // Word distances need a ball of twice the radius; keep that affordable.
  const int group_radius = std::min(config.tree_radius, 5);
  const GroupBall elements = group.ball(group_radius);
  const GroupBall lengths = group.ball(2 * group_radius);

  CommandResult r;
  r.summary = header(config, "estimate-compression");
  r.summary["tree_vertices"] = ball.vertices().size();
  r.summary["group_radius"] = group_radius;
  r.summary["group_elements"] = elements.size();
  std::ostringstream csv;
  csv << "p,embedding,beta,alpha_hat,C,D,A,B,pairs,d_min,d_max\n";
  auto estimate_json = [&](const ExponentEstimate& e) {
    return nlohmann::json{{"alpha_hat", e.alpha_hat}, {"C", e.C_hat},  {"D", e.D_hat},
                          {"A", e.A_hat},             {"B", e.B_hat},  {"pairs", e.pair_count},
                          {"d_min", e.d_min},         {"d_max", e.d_max}, {"seed", config.seed}};
  };
  auto row = [&](double p, const std::string& kind, const std::string& beta,
                 const ExponentEstimate& e) {
    csv << num(p) << ',' << kind << ',' << beta << ',' << num(e.alpha_hat) << ','
        << num(e.C_hat) << ',' << num(e.D_hat) << ',' << num(e.A_hat) << ',' << num(e.B_hat)
        << ',' << e.pair_count << ',' << num(e.d_min) << ',' << num(e.d_max) << '\n';
  };

  nlohmann::json per_p = nlohmann::json::array();
  for (double p : config.p_values) {
    nlohmann::json entry;
    entry["p"] = p;
    double best_tree = 0.0;

    const EmbeddingSpec indicator{EmbeddingKind::EdgeIndicator, 0.5, p, tree.base()};
    const TreeEmbedding ind = embed_tree(indicator, tree, ball);
    const ExponentEstimate ind_est =
        estimate_exponent(tree_samples(ind, tree, ball, p, config.seed));
    entry["edge_indicator"] = estimate_json(ind_est);
    row(p, "edge_indicator", "", ind_est);
    best_tree = ind_est.alpha_hat;

    nlohmann::json sweep = nlohmann::json::array();
    bool nondecreasing = true;
    double previous = -1.0;
    for (int b = 1; b <= 9; ++b) {
      const double beta = b / 10.0;
      const EmbeddingSpec spec{EmbeddingKind::WeightedGeodesic, beta, p, tree.base()};
      const ExponentEstimate est =
          estimate_exponent(tree_samples(embed_tree(spec, tree, ball), tree, ball, p, config.seed));
      nlohmann::json e = estimate_json(est);
      e["beta"] = beta;
      sweep.push_back(e);
      row(p, "weighted_geodesic", num(beta), est);
      if (est.alpha_hat < previous - kAlphaStep - 1e-12) nondecreasing = false;
      previous = est.alpha_hat;
      best_tree = std::max(best_tree, est.alpha_hat);
    }
    entry["weighted_geodesic"] = sweep;
    entry["beta_sweep_nondecreasing"] = nondecreasing;

    GroupEmbedding g_emb = embed_group(indicator, tree, ball, elements.elements());
    const ExponentEstimate group_est =
        estimate_exponent(group_samples(g_emb, group, lengths, config.seed));
    entry["orbit_concat"] = estimate_json(group_est);
    row(p, "orbit_concat", "", group_est);

    // The j_N coordinates alone stand in for the Y factor.
    for (auto& part : g_emb.tree_part) part.clear();
    const ExponentEstimate flat_est =
        estimate_exponent(group_samples(g_emb, group, lengths, config.seed));
    entry["j_N_part"] = estimate_json(flat_est);
    row(p, "j_N_part", "", flat_est);

    const SymbolicExponent composed = compose_min(exponent_named("alpha_T", best_tree),
                                                  exponent_named("alpha_Y", flat_est.alpha_hat));
    entry["composed"] = {{"expr", composed.expr},
                         {"value", composed.value},
                         {"alpha_T", best_tree},
                         {"alpha_Y", flat_est.alpha_hat}};
    per_p.push_back(entry);
  }
  r.summary["estimates"] = per_p;
  r.files.push_back({"compression.csv", csv.str()});
  return r;
}

}  // namespace hnngeo
