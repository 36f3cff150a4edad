#include "pprep/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pprep/app/records.hpp"

namespace pprep::app {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "prior_x",   "prior_y",     "kappa2",      "bf_y",          "allow_uniform_y",
      "gamma",     "target_power", "rel_min",    "rel_max",       "rel_points",
      "grid_points", "alpha_start", "theta_sd_span", "theta_min", "theta_max",
      "level",     "quadrature",  "format",      "theta_true",    "ig"};
  return keys;
}

double number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ValidationError("config '" + key + "' must be a number", 0, key);
  return j.get<double>();
}

int integer(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer()) {
    throw ValidationError("config '" + key + "' must be an integer", 0, key);
  }
  return j.get<int>();
}

void require_positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string("config '") + key + "' must be positive", 0, key);
  }
}

}  // namespace

OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  throw ValidationError("format must be json or csv, got '" + s + "'", 0, "format");
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }

power_prior::GridSpec AnalysisConfig::grid() const {
  return {grid_points, alpha_start, theta_sd_span, theta_min, theta_max};
}

void AnalysisConfig::validate() const {
  require_positive(prior_x, "prior_x");
  require_positive(prior_y, "prior_y");
  require_positive(kappa2, "kappa2");
  require_positive(gamma, "gamma");
  require_positive(alpha_start, "alpha_start");
  require_positive(theta_sd_span, "theta_sd_span");
  require_positive(rel_min, "rel_min");
  if (bf_y < 1.0 || (bf_y == 1.0 && !allow_uniform_y)) {
    throw ValidationError("config 'bf_y' must exceed 1 (set allow_uniform_y for y = 1)", 0,
                          "bf_y");
  }
  if (!(target_power > 0.0 && target_power < 1.0)) {
    throw ValidationError("config 'target_power' must lie in (0, 1)", 0, "target_power");
  }
  if (!(rel_max > rel_min)) throw ValidationError("config 'rel_max' must exceed rel_min", 0, "rel_max");
  if (rel_points < 2) throw ValidationError("config 'rel_points' must be at least 2", 0, "rel_points");
  if (grid_points < 3) throw ValidationError("config 'grid_points' must be at least 3", 0, "grid_points");
  if (!(alpha_start < 1.0)) throw ValidationError("config 'alpha_start' must be below 1", 0, "alpha_start");
  if (theta_min && theta_max && !(*theta_min < *theta_max)) {
    throw ValidationError("config 'theta_min' must be below theta_max", 0, "theta_min");
  }
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("config 'level' must lie in (0, 1)", 0, "level");
  require_positive(quadrature.rel_tol, "quadrature.rel_tol");
  require_positive(quadrature.abs_tol, "quadrature.abs_tol");
  if (quadrature.max_subdivisions < 1) {
    throw ValidationError("config 'quadrature.max_subdivisions' must be at least 1", 0,
                          "quadrature.max_subdivisions");
  }
  if (ig) {
    require_positive(ig->q, "ig.q");
    require_positive(ig->r, "ig.r");
  }
}

AnalysisConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!known_keys().contains(key)) throw ValidationError("unknown config key '" + key + "'", 0, key);
  }
  AnalysisConfig c;
  auto num = [&](const char* key, double& out) {
    if (doc.contains(key)) out = number(doc.at(key), key);
  };
  auto opt = [&](const char* key, std::optional<double>& out) {
    if (doc.contains(key) && !doc.at(key).is_null()) out = number(doc.at(key), key);
  };
  num("prior_x", c.prior_x);
  num("prior_y", c.prior_y);
  num("kappa2", c.kappa2);
  num("bf_y", c.bf_y);
  num("gamma", c.gamma);
  num("target_power", c.target_power);
  num("rel_min", c.rel_min);
  num("rel_max", c.rel_max);
  num("alpha_start", c.alpha_start);
  num("theta_sd_span", c.theta_sd_span);
  num("level", c.level);
  opt("theta_min", c.theta_min);
  opt("theta_max", c.theta_max);
  opt("theta_true", c.theta_true);
  if (doc.contains("rel_points")) c.rel_points = integer(doc.at("rel_points"), "rel_points");
  if (doc.contains("grid_points")) c.grid_points = integer(doc.at("grid_points"), "grid_points");
  if (doc.contains("allow_uniform_y")) {
    if (!doc.at("allow_uniform_y").is_boolean()) {
      throw ValidationError("config 'allow_uniform_y' must be a boolean", 0, "allow_uniform_y");
    }
    c.allow_uniform_y = doc.at("allow_uniform_y").get<bool>();
  }
  if (doc.contains("format")) {
    if (!doc.at("format").is_string()) throw ValidationError("config 'format' must be a string", 0, "format");
    c.format = parse_format(doc.at("format").get<std::string>());
  }
  if (doc.contains("quadrature")) {
    const auto& q = doc.at("quadrature");
    if (!q.is_object()) throw ValidationError("config 'quadrature' must be an object", 0, "quadrature");
    for (const auto& [key, val] : q.items()) {
      const std::string full = "quadrature." + key;
      if (key == "rel_tol") c.quadrature.rel_tol = number(val, full);
      else if (key == "abs_tol") c.quadrature.abs_tol = number(val, full);
      else if (key == "max_subdivisions") c.quadrature.max_subdivisions = integer(val, full);
      else throw ValidationError("unknown config key '" + full + "'", 0, full);
    }
  }
  if (doc.contains("ig") && !doc.at("ig").is_null()) {
    const auto& g = doc.at("ig");
    if (!g.is_object() || !g.contains("q") || !g.contains("r") || g.size() != 2) {
      throw ValidationError("config 'ig' must be an object with keys q and r", 0, "ig");
    }
    c.ig = special::InvGammaParams{number(g.at("q"), "ig.q"), number(g.at("r"), "ig.r")};
  }
  c.validate();
  return c;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return config_from_json(nlohmann::json::parse(buf.str()));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config JSON parse error: ") + e.what());
  }
}

nlohmann::json to_json(const AnalysisConfig& c) {
  nlohmann::json j{{"prior_x", c.prior_x},
                   {"prior_y", c.prior_y},
                   {"kappa2", c.kappa2},
                   {"bf_y", c.bf_y},
                   {"allow_uniform_y", c.allow_uniform_y},
                   {"gamma", c.gamma},
                   {"target_power", c.target_power},
                   {"rel_min", c.rel_min},
                   {"rel_max", c.rel_max},
                   {"rel_points", c.rel_points},
                   {"grid_points", c.grid_points},
                   {"alpha_start", c.alpha_start},
                   {"theta_sd_span", c.theta_sd_span},
                   {"level", c.level},
                   {"format", to_string(c.format)},
                   {"quadrature",
                    {{"rel_tol", c.quadrature.rel_tol},
                     {"abs_tol", c.quadrature.abs_tol},
                     {"max_subdivisions", c.quadrature.max_subdivisions}}}};
  if (c.theta_min) j["theta_min"] = *c.theta_min;
  if (c.theta_max) j["theta_max"] = *c.theta_max;
  if (c.theta_true) j["theta_true"] = *c.theta_true;
  if (c.ig) j["ig"] = {{"q", c.ig->q}, {"r", c.ig->r}};
  return j;
}

}  // namespace pprep::app
