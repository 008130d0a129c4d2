#include "hnngeo/config.hpp"

#include <cmath>
#include <fstream>

#include "hnngeo/error.hpp"

namespace hnngeo {

namespace {

Rational read_rational(const nlohmann::json& x) {
  if (x.is_string()) return parse_rational(x.get<std::string>());
  if (x.is_number_integer()) return Rational(x.get<std::int64_t>());
  throw Error(ErrorKind::ConfigError, "rational entries must be \"a/b\" strings or integers");
}

}  // namespace

void RunConfig::validate() const {
  if (tree_radius < 0) throw Error(ErrorKind::ConfigError, "tree_radius must be >= 0");
  if (!(grid_step > 0.0)) throw Error(ErrorKind::ConfigError, "grid_step must be positive");
  if (window.s_max <= 0 || !(window.x_max > 0.0)) {
    throw Error(ErrorKind::ConfigError, "window bounds must be positive");
  }
  if (sample_budget == 0) throw Error(ErrorKind::ConfigError, "sample_budget must be positive");
  if (p_values.empty()) throw Error(ErrorKind::ConfigError, "p_values must not be empty");
  for (double p : p_values) {
    if (!(p > 1.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::ConfigError, "every p must be > 1");
    }
  }
}

Presentation RunConfig::presentation() const {
  if (presentation_json) return presentation_from_json(*presentation_json);
  return presentation_from_preset(preset);
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  RunConfig c;
  try {
    if (!doc.is_object()) throw Error(ErrorKind::ConfigError, "config must be a JSON object");
    if (doc.contains("preset")) c.preset = doc.at("preset").get<std::string>();
    if (doc.contains("presentation")) c.presentation_json = doc.at("presentation");
    if (doc.contains("tree_radius")) c.tree_radius = doc.at("tree_radius").get<int>();
    if (doc.contains("y_model")) {
      const auto& y = doc.at("y_model");
      if (y.contains("grid_step")) c.grid_step = y.at("grid_step").get<double>();
      if (y.contains("window")) {
        const auto& w = y.at("window");
        if (w.contains("s_max")) c.window.s_max = w.at("s_max").get<int>();
        if (w.contains("x_max")) c.window.x_max = w.at("x_max").get<double>();
      }
      if (y.contains("base_metric") && !y.at("base_metric").is_null()) {
        const auto& rows = y.at("base_metric");
        const std::size_t n = rows.size();
        std::vector<Rational> entries;
        for (const auto& row : rows) {
          if (row.size() != n) throw Error(ErrorKind::ConfigError, "base_metric must be square");
          for (const auto& x : row) entries.push_back(read_rational(x));
        }
        c.base_metric = RatMatrix(n, std::move(entries));
      }
    }
    if (doc.contains("sample_budget")) c.sample_budget = doc.at("sample_budget").get<std::size_t>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("p_values")) c.p_values = doc.at("p_values").get<std::vector<double>>();
    if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file " + path);
  try {
    return run_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json doc;
  if (c.presentation_json) {
    doc["presentation"] = *c.presentation_json;
  } else {
    doc["preset"] = c.preset;
  }
  doc["tree_radius"] = c.tree_radius;
  nlohmann::json y;
  y["grid_step"] = c.grid_step;
  y["window"] = {{"s_max", c.window.s_max}, {"x_max", c.window.x_max}};
  if (c.base_metric) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < c.base_metric->dim(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < c.base_metric->dim(); ++j) {
        row.push_back(to_string((*c.base_metric)(i, j)));
      }
      rows.push_back(row);
    }
    y["base_metric"] = rows;
  }
  doc["y_model"] = y;
  doc["sample_budget"] = c.sample_budget;
  doc["seed"] = c.seed;
  doc["p_values"] = c.p_values;
  doc["output_dir"] = c.output_dir;
  return doc;
}

}  // namespace hnngeo
