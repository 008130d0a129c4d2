#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hnngeo/commands.hpp"
#include "hnngeo/config.hpp"
#include "hnngeo/error.hpp"

using namespace hnngeo;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.preset = "bs:1:2";
  c.tree_radius = 3;
  c.sample_budget = 20;
  c.seed = 9;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("run config JSON") {
  const nlohmann::json doc = nlohmann::json::parse(R"({
    "preset": "bs:2:3", "tree_radius": 4,
    "y_model": {"grid_step": 0.1, "window": {"s_max": 5, "x_max": 20},
                "base_metric": [["2"]]},
    "sample_budget": 77, "seed": 12, "p_values": [2, 3.5], "output_dir": "o"})");
  const RunConfig c = run_config_from_json(doc);
  CHECK(c.preset == "bs:2:3");
  CHECK(c.tree_radius == 4);
  CHECK(c.grid_step == 0.1);
  CHECK(c.window.s_max == 5);
  CHECK(c.window.x_max == 20.0);
  REQUIRE(c.base_metric);
  CHECK((*c.base_metric)(0, 0) == Rational(2));
  CHECK(c.sample_budget == 77);
  CHECK(c.seed == 12);
  CHECK(c.p_values == std::vector<double>{2.0, 3.5});
  CHECK(c.output_dir == "o");
  CHECK(to_json(run_config_from_json(to_json(c))) == to_json(c));
  CHECK(c.presentation().description() == presentation_from_preset("bs:2:3").description());

  const nlohmann::json explicit_pres = nlohmann::json::parse(
      R"({"presentation": {"n": 1, "m1": [[1]], "m2": [[3]], "phi": [["3"]]}})");
  CHECK(run_config_from_json(explicit_pres).presentation().description() ==
        presentation_from_preset("bs:1:3").description());

  for (const char* bad : {R"({"p_values": [1.0]})", R"({"sample_budget": 0})",
                          R"({"tree_radius": -1})", R"({"tree_radius": "x"})", R"([1])"}) {
    CAPTURE(std::string(bad));
    try {
      run_config_from_json(nlohmann::json::parse(bad));
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ConfigError);
    }
  }
}

TEST_CASE("normal-form and word-length commands") {
  const RunConfig c = small_config();
  const CommandResult a = cmd_normal_form(c, "t^-1 x^2 t");
  CHECK(a.summary["normal_form"] == "x");
  CHECK(a.summary["t_exponent"] == 0);
  CHECK(cmd_normal_form(c, "t t^-1").summary["normal_form"] == "1");
  const CommandResult cube = cmd_normal_form(c, "t^3");
  CHECK(cube.summary["normal_form"] == "t^3");
  CHECK(cube.summary["t_exponent"] == 3);
  CHECK_THROWS_AS(cmd_normal_form(c, "t y"), Error);

  RunConfig wide = c;
  wide.tree_radius = 6;
  CHECK(cmd_word_length(wide, "x^4").summary["length"] == 4);
  RunConfig narrow = c;
  narrow.tree_radius = 2;
  const CommandResult far = cmd_word_length(narrow, "x^4");
  CHECK(far.summary["within_budget"] == false);
  CHECK(far.summary["length"].is_null());
}

TEST_CASE("ball-growth and tree-ball commands") {
  RunConfig c = small_config();
  const CommandResult growth = cmd_ball_growth(c);
  CHECK(growth.summary["ball_sizes"] == nlohmann::json::array({1, 5, 17, 43}));
  REQUIRE(growth.files.size() == 1);
  CHECK(growth.files[0].second.rfind("radius,sphere_size,ball_size\n0,1,1\n1,4,5\n", 0) == 0);

  for (const char* preset : {"bs:1:2", "bs:2:3", "abc:2:2,1;1,1"}) {
    c.preset = preset;
    const CommandResult tb = cmd_tree_ball(c);
    CHECK(tb.exit_code == kExitOk);
    CHECK(tb.summary["is_tree"] == true);
    CHECK(tb.summary["interior_degree_mismatches"] == 0);
  }
}

TEST_CASE("verify-lemma command") {
  RunConfig c = small_config();
  const CommandResult r = cmd_verify_lemma(c);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.summary["ok"] == true);
  CHECK(r.summary["pairs"] == 20);
  CHECK(r.summary["fraction_within_bounds"] == 1.0);

  // A single pair from the trivial ball: the ratio may be undefined.
  RunConfig trivial = c;
  trivial.tree_radius = 0;
  trivial.sample_budget = 1;
  const CommandResult t = cmd_verify_lemma(trivial);
  CHECK(t.exit_code == kExitOk);
  CHECK(t.summary["pairs"] == 1);
  if (t.summary["informative_pairs"] == 0) CHECK(t.summary["ratio"].is_null());
}

TEST_CASE("probe command") {
  RunConfig c = small_config();
  c.tree_radius = 0;
  const CommandResult zero = cmd_probe(c);
  CHECK(zero.exit_code == kExitOk);
  CHECK(zero.summary["collisions"] == 0);

  c.preset = "bs:1:3";
  c.tree_radius = 4;
  const CommandResult r = cmd_probe(c);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.summary["collisions"] == 0);
  CHECK(r.summary["normalization"]["success_rate"] == 1.0);
  CHECK(r.summary["qi_fit"]["a_lower"].get<double>() > 0.0);
}

TEST_CASE("estimate-compression command") {
  RunConfig c = small_config();
  c.tree_radius = 5;
  c.p_values = {2.0, 4.0};
  const CommandResult r = cmd_estimate_compression(c);
  CHECK(r.exit_code == kExitOk);
  const auto& est = r.summary["estimates"];
  REQUIRE(est.size() == 2);
  CHECK(est[0]["edge_indicator"]["alpha_hat"].get<double>() == doctest::Approx(0.5).epsilon(0.1));
  CHECK(est[1]["edge_indicator"]["alpha_hat"].get<double>() == doctest::Approx(0.25).epsilon(0.2));
  CHECK(est[0]["beta_sweep_nondecreasing"] == true);
  CHECK(est[0]["composed"]["value"].get<double>() <= est[0]["composed"]["alpha_T"].get<double>());
  CHECK(est[0]["edge_indicator"]["seed"] == c.seed);
}

TEST_CASE("outputs are deterministic") {
  const auto dir = std::filesystem::temp_directory_path() / "hnngeo_commands_test";
  std::filesystem::remove_all(dir);
  RunConfig c = small_config();
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / std::to_string(run);
    write_outputs(cmd_verify_lemma(c), out.string(), "verify-lemma");
    write_outputs(cmd_probe(c), out.string(), "probe");
    write_outputs(cmd_estimate_compression([&] {
                    RunConfig e = c;
                    e.tree_radius = 4;
                    return e;
                  }()),
                  out.string(), "estimate-compression");
  }
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "0")) {
    const auto other = dir / "1" / entry.path().filename();
    REQUIRE(std::filesystem::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared == 6);
  std::filesystem::remove_all(dir);
}
