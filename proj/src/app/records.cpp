#include "pprep/app/records.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace pprep::app {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, int line, const std::string& field) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ValidationError("cannot parse '" + s + "' as a number", line, field);
  }
  return v;
}

long parse_long(const std::string& s, int line, const std::string& field) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ValidationError("cannot parse '" + s + "' as an integer", line, field);
  }
  return v;
}

Role parse_role(const std::string& s, int line) {
  if (s == "original") return Role::original;
  if (s == "replication") return Role::replication;
  throw ValidationError("role must be 'original' or 'replication', got '" + s + "'", line, "role");
}

EffectType parse_effect_type(const std::string& s, int line) {
  if (s == "smd") return EffectType::smd;
  if (s == "logor") return EffectType::logor;
  if (s == "other") return EffectType::other;
  throw ValidationError("effect_type must be smd, logor or other, got '" + s + "'", line,
                        "effect_type");
}

}  // namespace

std::string_view to_string(EffectType t) {
  switch (t) {
    case EffectType::smd: return "smd";
    case EffectType::logor: return "logor";
    case EffectType::other: return "other";
  }
  return "other";
}

std::string_view to_string(Role r) { return r == Role::original ? "original" : "replication"; }

double StudyRecord::standard_error() const {
  if (se) return *se;
  if (n && effect_type == EffectType::smd) return std::sqrt(4.0 / static_cast<double>(*n));
  throw ValidationError("study '" + id + "' has no standard error", 0, "se");
}

Study StudyRecord::to_study() const { return {estimate, standard_error()}; }

void StudyRecord::validate(int line) const {
  if (id.empty()) throw ValidationError("study id must not be empty", line, "id");
  if (!std::isfinite(estimate)) throw ValidationError("estimate must be finite", line, "estimate");
  if (se && n) {
    throw ValidationError("give either se or n, not both", line, se ? "n" : "se");
  }
  if (effect_type == EffectType::smd) {
    if (!se && !n) throw ValidationError("smd studies need se or n", line, "se");
  } else if (!se) {
    throw ValidationError("se is required unless effect_type is smd", line, "se");
  }
  if (se && !(*se > 0.0 && std::isfinite(*se))) {
    throw ValidationError("se must be positive", line, "se");
  }
  if (n && *n < 2) throw ValidationError("n must be at least 2", line, "n");
}

nlohmann::json to_json(const StudyRecord& r) {
  nlohmann::json j{{"id", r.id},
                   {"role", to_string(r.role)},
                   {"effect_type", to_string(r.effect_type)},
                   {"estimate", r.estimate}};
  if (r.se) j["se"] = *r.se;
  if (r.n) j["n"] = *r.n;
  return j;
}

std::vector<StudyRecord> parse_records_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  std::map<std::string, std::size_t> col;
  std::size_t width = 0;
  std::vector<StudyRecord> out;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    std::vector<std::string> cells = split(raw, ',');
    if (col.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = i;
      for (const char* required : {"id", "role", "effect_type", "estimate"}) {
        if (!col.contains(required)) {
          throw ValidationError(std::string("CSV header lacks column '") + required + "'",
                                line_no, required);
        }
      }
      if (!col.contains("se") && !col.contains("n")) {
        throw ValidationError("CSV header needs an 'se' or 'n' column", line_no, "se");
      }
      width = cells.size();
      continue;
    }
    if (cells.size() != width) {
      throw ValidationError("expected " + std::to_string(width) + " fields, found " +
                                std::to_string(cells.size()),
                            line_no);
    }
    auto cell = [&](const char* name) -> std::string {
      const auto it = col.find(name);
      return it == col.end() ? std::string{} : cells[it->second];
    };
    StudyRecord r;
    r.id = cell("id");
    r.role = parse_role(cell("role"), line_no);
    r.effect_type = parse_effect_type(cell("effect_type"), line_no);
    r.estimate = parse_double(cell("estimate"), line_no, "estimate");
    if (const std::string s = cell("se"); !s.empty()) r.se = parse_double(s, line_no, "se");
    if (const std::string s = cell("n"); !s.empty()) r.n = parse_long(s, line_no, "n");
    r.validate(line_no);
    out.push_back(std::move(r));
  }
  if (col.empty()) throw ValidationError("input is empty");
  return out;
}

std::vector<StudyRecord> parse_records_json(const nlohmann::json& doc) {
  const nlohmann::json* arr = &doc;
  if (doc.is_object()) {
    if (!doc.contains("studies")) throw ValidationError("JSON object input needs a 'studies' array");
    arr = &doc.at("studies");
  }
  if (!arr->is_array()) throw ValidationError("JSON input must be an array of study records");
  std::vector<StudyRecord> out;
  int index = 0;
  for (const auto& item : *arr) {
    ++index;
    if (!item.is_object()) throw ValidationError("study record must be an object", index);
    for (const auto& [key, _] : item.items()) {
      if (key != "id" && key != "role" && key != "effect_type" && key != "estimate" &&
          key != "se" && key != "n") {
        throw ValidationError("unknown field '" + key + "'", index, key);
      }
    }
    auto get = [&](const char* key) -> const nlohmann::json& {
      if (!item.contains(key)) throw ValidationError(std::string("missing field '") + key + "'", index, key);
      return item.at(key);
    };
    StudyRecord r;
    try {
      r.id = get("id").get<std::string>();
      r.role = parse_role(get("role").get<std::string>(), index);
      r.effect_type = parse_effect_type(get("effect_type").get<std::string>(), index);
      const auto& est = get("estimate");
      if (!est.is_number()) throw ValidationError("estimate must be a number", index, "estimate");
      r.estimate = est.get<double>();
      if (item.contains("se") && !item.at("se").is_null()) {
        if (!item.at("se").is_number()) throw ValidationError("se must be a number", index, "se");
        r.se = item.at("se").get<double>();
      }
      if (item.contains("n") && !item.at("n").is_null()) {
        if (!item.at("n").is_number_integer()) throw ValidationError("n must be an integer", index, "n");
        r.n = item.at("n").get<long>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad study record: ") + e.what(), index);
    }
    r.validate(index);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StudyRecord> parse_records(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && (text[first] == '[' || text[first] == '{')) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("JSON parse error: ") + e.what());
    }
    return parse_records_json(doc);
  }
  return parse_records_csv(text);
}

std::vector<StudyRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_records(buf.str());
}

Dataset split_roles(const std::vector<StudyRecord>& records, std::size_t min_replications) {
  Dataset d;
  int originals = 0;
  for (const auto& r : records) {
    if (r.role == Role::original) {
      ++originals;
      d.original = r;
    } else {
      d.replications.push_back(r);
    }
  }
  if (originals != 1) {
    throw ValidationError("exactly one original study is required, found " +
                              std::to_string(originals),
                          0, "role");
  }
  if (d.replications.size() < min_replications) {
    throw ValidationError("at least " + std::to_string(min_replications) +
                              " replication study is required",
                          0, "role");
  }
  return d;
}

}  // namespace pprep::app
