// pprep: power-prior analyses of an original study and its replications.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pprep/app/commands.hpp"
#include "pprep/app/config.hpp"
#include "pprep/app/records.hpp"
#include "pprep/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int report_error(const std::string& kind, const std::string& message, int line = 0,
                 const std::string& field = {}) {
  nlohmann::json err{{"kind", kind}, {"message", message}};
  err["line"] = line > 0 ? nlohmann::json(line) : nlohmann::json(nullptr);
  err["field"] = field.empty() ? nlohmann::json(nullptr) : nlohmann::json(field);
  std::cerr << nlohmann::json{{"error", err}}.dump() << '\n';
  if (kind == "validation" || kind == "domain") return kExitValidation;
  if (kind == "convergence" || kind == "unsupported_domain") return kExitNumerical;
  return kExitInternal;
}

struct Options {
  std::string input;
  std::string config;
  std::string grid_out;
  std::string format;
};

int run(const std::string& command, const Options& opt) {
  namespace app = pprep::app;
  app::AnalysisConfig config;
  if (!opt.config.empty()) config = app::load_config(opt.config);
  if (!opt.format.empty()) config.format = app::parse_format(opt.format);

  const auto records = app::load_records(opt.input);
  const app::CommandOptions copts{!opt.grid_out.empty()};

  app::CommandOutput out;
  if (command == "estimate") out = app::cmd_estimate(records, config, copts);
  else if (command == "test") out = app::cmd_test(records, config, copts);
  else if (command == "design") out = app::cmd_design(records, config, copts);
  else out = app::cmd_bridge(records, config, copts);

  if (!opt.grid_out.empty()) {
    const std::filesystem::path dir(opt.grid_out);
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : out.files) {
      std::ofstream f(dir / name, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
      f << content;
    }
  }

  if (config.format == app::OutputFormat::csv) std::cout << out.csv;
  else std::cout << out.report.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Power-prior analysis of replication studies"};
  cli.require_subcommand(1);
  Options opt;
  const char* descriptions[][2] = {
      {"estimate", "Posterior of the effect and of the power parameter"},
      {"test", "Bayes factors for effect and compatibility tests"},
      {"design", "Probability of replication success by replication size"},
      {"bridge", "Correspondence with the hierarchical model"},
  };
  for (const auto& [name, desc] : descriptions) {
    CLI::App* sub = cli.add_subcommand(name, desc);
    sub->add_option("--input", opt.input, "Study records, CSV or JSON")->required();
    sub->add_option("--config", opt.config, "Analysis configuration (JSON)");
    sub->add_option("--grid-out", opt.grid_out, "Directory for density grid CSV files");
    sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  }
  cli.footer(
      "Design: strong evidence means BF_dc <= gamma (for H_c) or >= 1/gamma (for H_d).\n"
      "gamma defaults to 1/10 by convention; set it in the config to match a reference.");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::string command = cli.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const pprep::app::ValidationError& e) {
    return report_error("validation", e.what(), e.line(), e.field());
  } catch (const pprep::UnsupportedDomainError& e) {
    return report_error("unsupported_domain", e.what());
  } catch (const pprep::DomainError& e) {
    return report_error("domain", e.what());
  } catch (const pprep::ConvergenceError& e) {
    return report_error("convergence", e.what());
  } catch (const std::invalid_argument& e) {
    return report_error("validation", e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
}
