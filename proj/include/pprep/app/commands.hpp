#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pprep/app/config.hpp"
#include "pprep/app/records.hpp"
#include "pprep/density_grid.hpp"

namespace pprep::app {

/// What a subcommand produced. `report` is the canonical result; `csv` is
/// the same content flattened into one table; `files` are density grids and
/// curves, written only when the caller asks for them.
struct CommandOutput {
  nlohmann::json report;
  std::string csv;
  std::vector<std::pair<std::string, std::string>> files;
};

struct CommandOptions {
  bool emit_grids = false;
};

/// Posterior summaries for theta and alpha, one entry per replication.
CommandOutput cmd_estimate(const std::vector<StudyRecord>& records, const AnalysisConfig& config,
                           const CommandOptions& opts = {});

/// The four tests: BF01 under the power prior, BF01 with alpha = 1, BF_dc
/// under the unit-information prior and BF_dc with Be(1, y) on alpha.
CommandOutput cmd_test(const std::vector<StudyRecord>& records, const AnalysisConfig& config,
                       const CommandOptions& opts = {});

/// Probability of replication success over a grid of replication sizes.
/// Only the original record is used.
CommandOutput cmd_design(const std::vector<StudyRecord>& records, const AnalysisConfig& config,
                         const CommandOptions& opts = {});

/// alpha / tau^2 / I^2 correspondence with a numerical check of matching
/// posteriors and Bayes factors.
CommandOutput cmd_bridge(const std::vector<StudyRecord>& records, const AnalysisConfig& config,
                         const CommandOptions& opts = {});

/// Axis columns followed by logdens, 17 significant digits.
std::string grid_to_csv(const DensityGrid& grid, const std::string& axis1_name,
                        const std::string& axis2_name = {});

/// Shortest round-trip representation used for every number in CSV output.
std::string format_number(double v);

}  // namespace pprep::app
