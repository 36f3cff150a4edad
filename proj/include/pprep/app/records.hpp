#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pprep/power_prior.hpp"

namespace pprep::app {

/// Malformed or inconsistent user input. `line` is 1-based (0 when unknown).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, int line = 0, std::string field = {})
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}

  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class EffectType { smd, logor, other };
enum class Role { original, replication };

std::string_view to_string(EffectType t);
std::string_view to_string(Role r);

struct StudyRecord {
  std::string id;
  Role role = Role::replication;
  EffectType effect_type = EffectType::other;
  double estimate = 0.0;
  std::optional<double> se;
  std::optional<long> n;

  /// Standard error as given, or sqrt(4 / n) for standardized mean
  /// differences given by sample size.
  double standard_error() const;
  Study to_study() const;
  /// Throws ValidationError; `line` is used for error reporting only.
  void validate(int line = 0) const;
};

nlohmann::json to_json(const StudyRecord& r);

/// CSV with a header naming the columns id, role, effect_type, estimate,
/// se, n (any order; se and n may be empty).
std::vector<StudyRecord> parse_records_csv(std::string_view text);

/// Array of record objects, or an object whose "studies" member is such an
/// array (which is what every JSON report echoes).
std::vector<StudyRecord> parse_records_json(const nlohmann::json& doc);

/// Dispatches on content: JSON if the first non-blank character is '[' or
/// '{', CSV otherwise.
std::vector<StudyRecord> parse_records(std::string_view text);
std::vector<StudyRecord> load_records(const std::filesystem::path& path);

struct Dataset {
  StudyRecord original;
  std::vector<StudyRecord> replications;
};

/// Exactly one original is required; `min_replications` replications at
/// least.
Dataset split_roles(const std::vector<StudyRecord>& records, std::size_t min_replications = 1);

}  // namespace pprep::app
