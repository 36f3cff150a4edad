#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "pprep/power_prior.hpp"
#include "pprep/quadrature.hpp"
#include "pprep/special_math.hpp"

namespace pprep::app {

enum class OutputFormat { json, csv };

/// Every tunable of the four subcommands. Unknown keys in a config file are
/// rejected so that typos do not silently fall back to defaults.
struct AnalysisConfig {
  double prior_x = 1.0;
  double prior_y = 1.0;
  double kappa2 = 2.0;
  double bf_y = 2.0;
  bool allow_uniform_y = false;

  // Design: strong evidence means BF_dc <= gamma for H_c and >= 1/gamma
  // for H_d.
  double gamma = 0.1;
  double target_power = 0.8;
  double rel_min = 0.2;
  double rel_max = 20.0;
  int rel_points = 60;

  int grid_points = 401;
  double alpha_start = power_prior::kAlphaGridStart;
  double theta_sd_span = 6.0;
  std::optional<double> theta_min;
  std::optional<double> theta_max;

  double level = 0.95;
  quadrature::QuadratureSpec quadrature;
  OutputFormat format = OutputFormat::json;

  // Optional extras for `test`.
  std::optional<double> theta_true;
  std::optional<special::InvGammaParams> ig;

  BetaParams beta_prior() const { return {prior_x, prior_y}; }
  power_prior::GridSpec grid() const;

  /// Throws ValidationError naming the offending key.
  void validate() const;
};

AnalysisConfig config_from_json(const nlohmann::json& doc);
AnalysisConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const AnalysisConfig& c);

OutputFormat parse_format(const std::string& s);
std::string_view to_string(OutputFormat f);

}  // namespace pprep::app
