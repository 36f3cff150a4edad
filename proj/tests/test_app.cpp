#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "pprep/app/commands.hpp"
#include "pprep/app/config.hpp"
#include "pprep/app/records.hpp"
#include "pprep/hierarchical.hpp"
#include "pprep/hypothesis_tests.hpp"

using namespace pprep;
using namespace pprep::app;
using nlohmann::json;

namespace {

const char* kLabelsCsv =
    "id,role,effect_type,estimate,se,n\n"
    "original,original,smd,0.21,0.05,\n"
    "rep1,replication,smd,0.09,0.05,\n"
    "rep2,replication,smd,0.21,0.06,\n"
    "rep3,replication,smd,0.44,0.04,\n";

// Runs `f` and returns the ValidationError it throws.
template <class F>
ValidationError validation_error(F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e;
  }
  FAIL("expected a ValidationError");
  return ValidationError("unreachable");
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("CSV records") {
  const auto recs = parse_records_csv(kLabelsCsv);
  REQUIRE(recs.size() == 4);
  CHECK(recs[0].role == Role::original);
  CHECK(recs[3].id == "rep3");
  CHECK(recs[3].standard_error() == 0.04);
  CHECK(recs[1].effect_type == EffectType::smd);

  // Column order is free and sample size stands in for se on smd rows.
  const auto shuffled = parse_records_csv(
      "estimate, n ,id,role,effect_type,se\n"
      "0.21,1600,o,original,smd,\n"
      " 0.3 ,,r,replication,logor,0.2\n");
  REQUIRE(shuffled.size() == 2);
  CHECK(shuffled[0].standard_error() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(shuffled[0].n == 1600);
  CHECK(shuffled[1].estimate == 0.3);
  CHECK(shuffled[1].effect_type == EffectType::logor);
}

TEST_CASE("CSV errors carry line and field") {
  const std::string header = "id,role,effect_type,estimate,se,n\n";
  auto e = validation_error([&] { parse_records_csv(header + "o,original,smd,abc,0.05,\n"); });
  CHECK(e.line() == 2);
  CHECK(e.field() == "estimate");

  e = validation_error([&] { parse_records_csv(header + "o,original,smd,0.2,0.05,\nr,replication,logor,0.1,,\n"); });
  CHECK(e.line() == 3);
  CHECK(e.field() == "se");

  e = validation_error([&] { parse_records_csv(header + "o,original,smd,0.2,0.05,100\n"); });
  CHECK(e.line() == 2);

  e = validation_error([&] { parse_records_csv(header + "o,boss,smd,0.2,0.05,\n"); });
  CHECK(e.field() == "role");

  e = validation_error([&] { parse_records_csv(header + "o,original,smd,0.2,-0.05,\n"); });
  CHECK(e.field() == "se");

  e = validation_error([&] { parse_records_csv(header + "o,original,smd,0.2\n"); });
  CHECK(e.line() == 2);

  e = validation_error([] { parse_records_csv("id,role,estimate,se\no,original,0.2,0.1\n"); });
  CHECK(e.field() == "effect_type");

  CHECK_THROWS_AS(parse_records_csv(""), ValidationError);
  CHECK_THROWS_AS(parse_records_csv(header + "o,original,smd,0.2,,1\n"), ValidationError);
}

TEST_CASE("JSON records") {
  const json doc = json::parse(R"([{"id": "o", "role": "original", "effect_type": "smd", "estimate": 0.2, "n": 400},
                                   {"id": "r", "role": "replication", "effect_type": "other", "estimate": 0.1, "se": 0.3}])");
  const auto recs = parse_records_json(doc);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].standard_error() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(parse_records_json(json{{"studies", doc}}).size() == 2);

  auto e = validation_error([] {
    parse_records_json(json::parse(R"([{"id": "o", "role": "original", "effect_type": "smd", "estimate": 0.2, "se": 0.1, "colour": 1}])"));
  });
  CHECK(e.field() == "colour");
  CHECK(e.line() == 1);

  e = validation_error([] {
    parse_records_json(json::parse(R"([{"id": "o", "role": "original", "effect_type": "smd", "estimate": 0.2, "se": 0.1},
                                       {"id": "r", "role": "replication", "effect_type": "smd", "se": 0.1}])"));
  });
  CHECK(e.field() == "estimate");
  CHECK(e.line() == 2);

  e = validation_error([] {
    parse_records_json(json::parse(R"([{"id": "o", "role": "original", "effect_type": "smd", "estimate": 0.2, "n": 10.5}])"));
  });
  CHECK(e.field() == "n");

  CHECK(parse_records(" [" + doc.dump().substr(1)).size() == 2);
  CHECK(parse_records(kLabelsCsv).size() == 4);
  CHECK_THROWS_AS(parse_records("{not json"), ValidationError);
}

TEST_CASE("roles") {
  const auto recs = parse_records_csv(kLabelsCsv);
  const Dataset d = split_roles(recs);
  CHECK(d.original.id == "original");
  CHECK(d.replications.size() == 3);
  auto two = recs;
  two[1].role = Role::original;
  CHECK_THROWS_AS(split_roles(two), ValidationError);
  CHECK_THROWS_AS(split_roles({recs[0]}), ValidationError);
  CHECK_NOTHROW(split_roles({recs[0]}, 0));
}

TEST_CASE("configuration") {
  const AnalysisConfig def = config_from_json(json::object());
  CHECK(def.prior_x == 1.0);
  CHECK(def.kappa2 == 2.0);
  CHECK(def.bf_y == 2.0);
  CHECK(def.gamma == 0.1);
  CHECK(def.grid_points == 401);
  CHECK(def.format == OutputFormat::json);
  CHECK_FALSE(def.ig.has_value());

  const AnalysisConfig c = config_from_json(json::parse(
      R"({"prior_x": 2, "kappa2": 0.5, "quadrature": {"rel_tol": 1e-8}, "ig": {"q": 2, "r": 0.001},
          "theta_true": 0.21, "format": "csv"})"));
  CHECK(c.prior_x == 2.0);
  CHECK(c.quadrature.rel_tol == 1e-8);
  CHECK(c.quadrature.max_subdivisions == 200);
  REQUIRE(c.ig.has_value());
  CHECK(c.ig->r == 0.001);
  CHECK(c.format == OutputFormat::csv);

  // to_json is a fixed point of config_from_json.
  const json once = to_json(c);
  CHECK(to_json(config_from_json(once)) == once);

  CHECK(validation_error([] { config_from_json(json{{"kapa2", 2}}); }).field() == "kapa2");
  CHECK(validation_error([] { config_from_json(json{{"quadrature", {{"tol", 1}}}}); }).field() == "quadrature.tol");
  CHECK(validation_error([] { config_from_json(json{{"bf_y", 1}}); }).field() == "bf_y");
  CHECK_NOTHROW(config_from_json(json{{"bf_y", 1}, {"allow_uniform_y", true}}));
  CHECK(validation_error([] { config_from_json(json{{"kappa2", -1}}); }).field() == "kappa2");
  CHECK(validation_error([] { config_from_json(json{{"grid_points", "many"}}); }).field() == "grid_points");
  CHECK_THROWS_AS(parse_format("xml"), ValidationError);
  CHECK(to_string(parse_format("csv")) == "csv");
}

TEST_CASE("format_number round-trips") {
  std::mt19937_64 rng(oracle::seed() + 70);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = (i % 2 ? -1 : 1) * std::pow(10.0, u(rng));
    const std::string s = format_number(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_number(0.25) == "0.25");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("test command") {
  const auto recs = parse_records_csv(kLabelsCsv);
  const AnalysisConfig cfg;
  const CommandOutput out = cmd_test(recs, cfg);
  CHECK(out.report["command"] == "test");
  REQUIRE(out.report["results"].size() == 3);

  const json& rep2 = out.report["results"][1];
  CHECK(rep2["id"] == "rep2");
  const StudyPair pair{{0.21, 0.05}, {0.21, 0.06}};
  for (const json& t : rep2["tests"]) {
    double want = 0;
    if (t["test"] == "power_prior") want = bf::bf01_power_prior(pair, {1, 1}).log_bf;
    if (t["test"] == "replication") want = bf::bf01_replication(pair).log_bf;
    if (t["test"] == "unit_information") want = bf::bf_dc_point(pair, {2.0}).log_bf;
    if (t["test"] == "beta_alpha") want = bf::bf_dc_beta(pair, 2.0).log_bf;
    CHECK(t["log_bf"].get<double>() == want);
    CHECK(t["display"] == format_bf(std::exp(want)));
  }

  // The report echoes its inputs and can be fed back in.
  const auto again = parse_records_json(out.report);
  REQUIRE(again.size() == recs.size());
  CHECK(cmd_test(again, cfg).report["results"] == out.report["results"]);
  CHECK(out.report["reproducibility"]["tool"] == "pprep");
  CHECK(out.report["reproducibility"]["max_err_estimate"].get<double>() < 1e-8);

  const auto rows = lines_of(out.csv);
  CHECK(rows.front() == "id,test,orientation,value,log_bf,display");
  CHECK(rows.size() == 1 + 3 * 4);

  AnalysisConfig with_ig;
  with_ig.ig = special::InvGammaParams{2, 0.001};
  with_ig.theta_true = 0.21;
  const json rep = cmd_test(recs, with_ig).report;
  const json& ig = rep["results"][2]["inverse_gamma"];
  CHECK(ig["log_bf"].get<double>() == bf::bf_dc_invgamma({{0.21, 0.05}, {0.44, 0.04}}, {2, 0.001}).log_bf);
  CHECK(ig["limit"]["kind"] == "plus_infinity");
  CHECK(rep.contains("limits"));
}

TEST_CASE("estimate command") {
  const auto recs = parse_records_csv(kLabelsCsv);
  AnalysisConfig cfg;
  cfg.grid_points = 101;
  const CommandOutput out = cmd_estimate(recs, cfg, {true});
  REQUIRE(out.report["results"].size() == 3);
  CHECK(out.report["results"][1]["alpha"]["shape"] == "monotonically increasing");
  CHECK(out.report["results"][0]["alpha"]["shape"] == "unimodal");
  CHECK(std::abs(out.report["results"][0]["alpha"]["mode"].get<double>() - 0.2) < 0.05);
  CHECK(out.report["results"][2]["theta_replication_only"]["mean"] == 0.44);

  bool joint = false;
  for (const auto& [name, body] : out.files) {
    if (name == "rep1_joint.csv") {
      joint = true;
      const auto rows = lines_of(body);
      CHECK(rows.front() == "theta,alpha,logdens");
      CHECK(rows.size() == 1 + 101 * 101);
    }
  }
  CHECK(joint);
  CHECK(out.files.size() == 3 * 4 + 1);
  CHECK(lines_of(out.csv).front() == "id,parameter,mean,sd,median,ci_lower,ci_upper,level,mode");
  CHECK(cmd_estimate(recs, cfg).files.empty());
}

TEST_CASE("design command") {
  const auto recs = parse_records_csv(kLabelsCsv);
  const CommandOutput out = cmd_design({recs[0]}, AnalysisConfig{});
  REQUIRE(out.report["designs"].size() == 2);
  const json& hc = out.report["designs"][0];
  CHECK(hc["target"] == "Hc");
  CHECK(hc["attained"] == true);
  CHECK(hc["prs_under_Hc"].get<double>() >= 0.8);
  CHECK(hc["asymptote"]["prs"].get<double>() < 1.0);
  CHECK(out.report["curve"].size() == 60);
  CHECK(lines_of(out.csv).size() == 61);
}

TEST_CASE("bridge command") {
  const auto recs = parse_records_csv(kLabelsCsv);
  AnalysisConfig cfg;
  cfg.grid_points = 101;
  const CommandOutput out = cmd_bridge(recs, cfg);
  CHECK(out.report["tau2_prior"]["family"] == "GF");
  CHECK(out.report["tau2_prior"]["lambda"].get<double>() == doctest::Approx(800.0));
  CHECK(out.report["I2_prior"]["lambda"] == 2.0);
  for (const json& r : out.report["results"]) {
    CHECK(r["overlay_max_abs_logdiff"].get<double>() < 1e-6);
    REQUIRE(r["bayes_factors"].size() == 3);
    for (const json& b : r["bayes_factors"]) CHECK(b["rel_diff"].get<double>() < 1e-6);
  }
  CHECK(lines_of(out.csv).front() == "alpha,tau2,I2");
}

TEST_CASE("grid_to_csv") {
  DensityGrid g;
  g.axis1 = {0.0, 0.5, 1.0};
  g.logdens = {-1.0, 0.0, -1.0};
  const auto rows = lines_of(grid_to_csv(g, "x"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "x,logdens");
  CHECK(rows[2] == "0.5,0");
}
