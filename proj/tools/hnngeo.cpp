// hnngeo: batch front end. Every subcommand prints its summary JSON on
// stdout and, when an output directory is set, writes CSV tables and
// <command>.json there.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hnngeo/commands.hpp"
#include "hnngeo/config.hpp"
#include "hnngeo/error.hpp"
#include "hnngeo/linalg.hpp"

namespace {

// "x1,...,xn,s" -> YPoint.
hnngeo::YPoint parse_point(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    values.push_back(boost::multiprecision::cpp_rational(hnngeo::parse_rational(item))
                         .convert_to<double>());
  }
  if (values.size() < 2) {
    throw hnngeo::Error(hnngeo::ErrorKind::ParseError,
                        "point must be \"x1,...,xn,s\" with at least two entries");
  }
  hnngeo::YPoint p;
  p.s = values.back();
  values.pop_back();
  p.x = values;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry of HNN extensions of Z^n: normal forms, Bass-Serre trees, "
               "the warped space Y, the fibre product M and compression estimates"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> preset;
  std::optional<int> radius;
  std::optional<double> grid_step;
  std::optional<std::size_t> pairs;
  std::optional<std::uint64_t> seed;
  std::vector<double> p_values;
  std::optional<std::string> out_dir;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--preset", preset, "presentation preset, e.g. bs:1:2 or abc:2:2,1;1,1");
    cmd->add_option("--radius", radius, "ball radius (word-length budget for word-length)");
    cmd->add_option("--grid-step", grid_step, "Y grid step h, 1/h an integer <= 255");
    cmd->add_option("--pairs", pairs, "sample budget");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--p", p_values, "target exponent p > 1 (repeatable)");
    cmd->add_option("--out", out_dir, "output directory for CSV and JSON");
  };

  std::string word;
  std::string from_text;
  std::string to_text;

  auto* normal_form = app.add_subcommand("normal-form", "Britton normal form and t-exponent");
  normal_form->add_option("word", word, "word such as \"t x t^-1 x^2\"")->required();
  auto* word_length = app.add_subcommand("word-length", "exact word length by BFS");
  word_length->add_option("word", word, "word")->required();
  auto* ball_growth = app.add_subcommand("ball-growth", "sphere and ball sizes");
  auto* tree_ball = app.add_subcommand("tree-ball", "Bass-Serre tree ball and degree check");
  auto* y_dist = app.add_subcommand("y-dist", "distance bracket and geodesic in Y");
  y_dist->add_option("--from", from_text, "start point x1,...,xn,s")->required();
  y_dist->add_option("--to", to_text, "end point x1,...,xn,s")->required();
  auto* verify = app.add_subcommand("verify-lemma", "sampled check of d <= d_M <= 4(1+k) d");
  auto* probe = app.add_subcommand("probe", "injectivity, normalization and QI probes");
  auto* compression =
      app.add_subcommand("estimate-compression", "compression exponent estimates");
  for (auto* cmd : {normal_form, word_length, ball_growth, tree_ball, y_dist, verify, probe,
                    compression}) {
    add_common(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    hnngeo::RunConfig config;
    if (!config_path.empty()) config = hnngeo::load_run_config(config_path);
    if (preset) {
      config.preset = *preset;
      config.presentation_json.reset();
    }
    if (radius) config.tree_radius = *radius;
    if (grid_step) config.grid_step = *grid_step;
    if (pairs) config.sample_budget = *pairs;
    if (seed) config.seed = *seed;
    if (!p_values.empty()) config.p_values = p_values;
    if (out_dir) config.output_dir = *out_dir;
    config.validate();

    hnngeo::CommandResult result;
    std::string name;
    if (*normal_form) {
      name = "normal-form";
      result = hnngeo::cmd_normal_form(config, word);
    } else if (*word_length) {
      name = "word-length";
      result = hnngeo::cmd_word_length(config, word);
    } else if (*ball_growth) {
      name = "ball-growth";
      result = hnngeo::cmd_ball_growth(config);
    } else if (*tree_ball) {
      name = "tree-ball";
      result = hnngeo::cmd_tree_ball(config);
    } else if (*y_dist) {
      name = "y-dist";
      result = hnngeo::cmd_y_dist(config, parse_point(from_text), parse_point(to_text));
    } else if (*verify) {
      name = "verify-lemma";
      result = hnngeo::cmd_verify_lemma(config);
    } else if (*probe) {
      name = "probe";
      result = hnngeo::cmd_probe(config);
    } else {
      name = "estimate-compression";
      result = hnngeo::cmd_estimate_compression(config);
    }
    std::cout << result.summary.dump(2) << '\n';
    if (!config.output_dir.empty()) hnngeo::write_outputs(result, config.output_dir, name);
    return result.exit_code;
  } catch (const hnngeo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hnngeo::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hnngeo::kExitError;
  }
}
