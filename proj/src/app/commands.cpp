#include "pprep/app/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "pprep/design.hpp"
#include "pprep/hierarchical.hpp"
#include "pprep/hypothesis_tests.hpp"
#include "pprep/power_prior.hpp"
#include "pprep/special_math.hpp"

#ifndef PPREP_VERSION
#define PPREP_VERSION "unknown"
#endif

namespace pprep::app {

namespace {

using nlohmann::json;

// Largest relative quadrature error seen while building one report.
class ErrorTracker {
 public:
  void add(double e) {
    if (std::isfinite(e)) max_ = std::max(max_, std::abs(e));
  }
  double max() const { return max_; }

 private:
  double max_ = 0.0;
};

json reproducibility(const AnalysisConfig& config, const ErrorTracker& errors) {
  return {{"tool", "pprep"},
          {"version", PPREP_VERSION},
          {"config", to_json(config)},
          {"quadrature",
           {{"rel_tol", config.quadrature.rel_tol},
            {"abs_tol", config.quadrature.abs_tol},
            {"max_subdivisions", config.quadrature.max_subdivisions}}},
          {"max_err_estimate", errors.max()}};
}

json studies_echo(const std::vector<StudyRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr;
}

json to_json(const PosteriorSummary& s) {
  return {{"mean", s.mean},         {"sd", s.sd},
          {"median", s.median},     {"ci_lower", s.ci_lower},
          {"ci_upper", s.ci_upper}, {"level", s.level},
          {"mode", s.mode}};
}

json to_json(const BayesFactorResult& r, const std::string& orientation) {
  return {{"orientation", orientation},
          {"numerator", hypothesis_label(r.numerator)},
          {"denominator", hypothesis_label(r.denominator)},
          {"log_bf", r.log_bf},
          {"value", r.value()},
          {"display", format_bf(r.value())},
          {"quadrature_err", r.quadrature_err}};
}

json to_json(const LimitClassification& l) {
  json j{{"kind", limit_kind_label(l.kind)}, {"diagnostic", l.diagnostic}};
  j["value"] = l.value ? json(*l.value) : json(nullptr);
  return j;
}

// File names are built from study ids; keep them to a portable alphabet.
std::string file_stem(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return out.empty() ? "study" : out;
}

StudyPair make_pair(const Dataset& d, const StudyRecord& rep) {
  return {d.original.to_study(), rep.to_study()};
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string line;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) line += ',';
    line += c;
    first = false;
  }
  return line + '\n';
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string grid_to_csv(const DensityGrid& grid, const std::string& axis1_name,
                        const std::string& axis2_name) {
  std::ostringstream out;
  if (grid.is_2d()) {
    out << axis1_name << ',' << axis2_name << ",logdens\n";
    const std::size_t m = grid.axis2.size();
    for (std::size_t i = 0; i < grid.axis1.size(); ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        out << format_number(grid.axis1[i]) << ',' << format_number(grid.axis2[j]) << ','
            << format_number(grid.logdens[i * m + j]) << '\n';
      }
    }
  } else {
    out << axis1_name << ",logdens\n";
    for (std::size_t i = 0; i < grid.axis1.size(); ++i) {
      out << format_number(grid.axis1[i]) << ',' << format_number(grid.logdens[i]) << '\n';
    }
  }
  return out.str();
}

CommandOutput cmd_estimate(const std::vector<StudyRecord>& records, const AnalysisConfig& config,
                           const CommandOptions& opts) {
  config.validate();
  const Dataset data = split_roles(records);
  const BetaParams prior = config.beta_prior();
  const power_prior::GridSpec grid = config.grid();
  ErrorTracker errors;
  CommandOutput out;
  json results = json::array();
  out.csv = "id,parameter,mean,sd,median,ci_lower,ci_upper,level,mode\n";

  for (const auto& rep : data.replications) {
    const StudyPair pair = make_pair(data, rep);
    const LogEvidence ev = power_prior::evidence(pair, prior, config.quadrature);
    errors.add(ev.rel_err);

    const DensityGrid alpha = power_prior::alpha_marginal_grid(pair, prior, grid, config.quadrature);
    const DensityGrid theta = power_prior::theta_marginal_grid(pair, prior, grid, config.quadrature);
    const PosteriorSummary a_sum = summarize(alpha, config.level);
    const PosteriorSummary t_sum = summarize(theta, config.level);

    auto alpha_logf = [&](double a) { return power_prior::marginal_posterior_alpha(a, pair, prior, ev); };
    const double a_mode = power_prior::find_mode(alpha_logf, grid.alpha_start, 1.0);

    // Shape of the alpha marginal on a coarse fixed lattice.
    const std::vector<double> coarse = linspace(grid.alpha_start, 1.0, 200);
    bool increasing = true;
    bool decreasing = true;
    double prev = alpha_logf(coarse.front());
    for (std::size_t i = 1; i < coarse.size(); ++i) {
      const double cur = alpha_logf(coarse[i]);
      increasing = increasing && cur >= prev;
      decreasing = decreasing && cur <= prev;
      prev = cur;
    }
    std::string shape = "unimodal";
    if (increasing) shape = "monotonically increasing";
    else if (decreasing) shape = "monotonically decreasing";

    json alpha_json = to_json(a_sum);
    alpha_json["mode"] = a_mode;
    alpha_json["shape"] = shape;
    alpha_json["monotone_increasing"] = increasing;
    alpha_json["empirical_bayes"] = power_prior::alpha_empirical_bayes(pair);

    const NormalParams pooled = power_prior::posterior_theta_fixed_alpha(pair, 1.0);
    results.push_back({{"id", rep.id},
                       {"log_evidence", ev.value},
                       {"theta", to_json(t_sum)},
                       {"alpha", alpha_json},
                       {"theta_pooled", {{"mean", pooled.mean}, {"variance", pooled.variance}}},
                       {"theta_replication_only",
                        {{"mean", pair.replication.estimate}, {"variance", pair.replication.variance()}}}});

    auto summary_row = [&](const char* name, const PosteriorSummary& s, double mode) {
      out.csv += csv_row({rep.id, name, format_number(s.mean), format_number(s.sd),
                          format_number(s.median), format_number(s.ci_lower),
                          format_number(s.ci_upper), format_number(s.level), format_number(mode)});
    };
    summary_row("theta", t_sum, t_sum.mode);
    summary_row("alpha", a_sum, a_mode);

    if (opts.emit_grids) {
      const std::string stem = file_stem(rep.id);
      out.files.emplace_back(stem + "_joint.csv",
                             grid_to_csv(power_prior::joint_grid(pair, prior, grid, config.quadrature),
                                         "theta", "alpha"));
      out.files.emplace_back(stem + "_alpha.csv", grid_to_csv(alpha, "alpha"));
      out.files.emplace_back(stem + "_theta.csv", grid_to_csv(theta, "theta"));
      out.files.emplace_back(stem + "_theta_replication_only.csv",
                             grid_to_csv(power_prior::replication_only_theta_grid(pair, grid), "theta"));
    }
  }
  if (opts.emit_grids) {
    out.files.emplace_back("limiting_alpha.csv", grid_to_csv(power_prior::limiting_alpha_grid(grid), "alpha"));
  }

  out.report = {{"command", "estimate"},
                {"studies", studies_echo(records)},
                {"prior", {{"x", prior.x}, {"y", prior.y}}},
                {"results", results},
                {"reproducibility", reproducibility(config, errors)}};
  return out;
}

CommandOutput cmd_test(const std::vector<StudyRecord>& records, const AnalysisConfig& config,
                       const CommandOptions&) {
  config.validate();
  const Dataset data = split_roles(records);
  const BetaParams prior = config.beta_prior();
  const UnitInformation ui{config.kappa2};
  const Study original = data.original.to_study();
  ErrorTracker errors;
  CommandOutput out;
  json results = json::array();
  out.csv = "id,test,orientation,value,log_bf,display\n";

  for (const auto& rep : data.replications) {
    const StudyPair pair = make_pair(data, rep);
    const auto pp = bf::bf01_power_prior(pair, prior, config.quadrature);
    const auto repl = bf::bf01_replication(pair);
    const auto point = bf::bf_dc_point(pair, ui);
    const auto beta = bf::bf_dc_beta(pair, config.bf_y, config.allow_uniform_y, config.quadrature);
    for (const auto* r : {&pp, &repl, &point, &beta}) errors.add(r->quadrature_err);

    json tests = json::array();
    auto add = [&](const char* name, const BayesFactorResult& r, const char* orientation) {
      json j = to_json(r, orientation);
      j["test"] = name;
      tests.push_back(j);
      out.csv += csv_row({rep.id, name, orientation, format_number(r.value()),
                          format_number(r.log_bf), format_bf(r.value())});
    };
    add("power_prior", pp, "BF01");
    add("replication", repl, "BF01");
    add("unit_information", point, "BF_dc");
    add("beta_alpha", beta, "BF_dc");

    json entry{{"id", rep.id}, {"tests", tests}};
    if (config.ig) {
      const auto ig = bf::bf_dc_invgamma(pair, *config.ig, config.quadrature);
      errors.add(ig.quadrature_err);
      entry["inverse_gamma"] = to_json(ig, "BF_dc");
      entry["inverse_gamma"]["limit"] =
          to_json(bf::bf_dc_invgamma_limit(pair.replication.estimate, original.estimate, *config.ig));
    }
    results.push_back(entry);
  }

  out.report = {{"command", "test"},
                {"studies", studies_echo(records)},
                {"parameters",
                 {{"prior_x", prior.x}, {"prior_y", prior.y}, {"kappa2", ui.kappa2}, {"bf_y", config.bf_y}}},
                {"results", results}};
  if (config.theta_true) {
    const double t = *config.theta_true;
    out.report["limits"] = {
        {"theta_true", t},
        {"power_prior", to_json(bf::bf01_power_prior_limit(t, original, prior))},
        {"unit_information", bf::bf_dc_point_limit(t, original, ui)},
        {"beta_alpha", bf::bf_dc_beta_limit(t, original, config.bf_y)},
    };
  }
  out.report["reproducibility"] = reproducibility(config, errors);
  return out;
}

CommandOutput cmd_design(const std::vector<StudyRecord>& records, const AnalysisConfig& config,
                         const CommandOptions& opts) {
  config.validate();
  const Dataset data = split_roles(records, 0);
  const Study original = data.original.to_study();
  const UnitInformation ui{config.kappa2};
  const std::vector<double> sigmas =
      design::sigma_grid_from_relative(original, config.rel_min, config.rel_max, config.rel_points);

  design::DesignSpec for_c{original, ui, config.gamma, config.target_power, Hypothesis::Hc};
  design::DesignSpec for_d = for_c;
  for_d.hypothesis = Hypothesis::Hd;

  auto design_json = [&](const design::DesignSpec& spec) {
    const design::DesignResult r = design::find_design(spec, sigmas);
    // Very large replication relative to the original: where the curve levels off.
    const double tiny_sigma = original.se / std::sqrt(1e8);
    return json{{"target", hypothesis_label(spec.hypothesis)},
                {"target_power", spec.target_power},
                {"attained", r.attained},
                {"sigma_r", r.sigma_r},
                {"n_r", r.n_r},
                {"relative_size", r.relative_size},
                {"relative_n", r.relative_n},
                {"prs_under_Hc", r.prs_under_Hc},
                {"prs_under_Hd", r.prs_under_Hd},
                {"asymptote",
                 {{"relative_size", 1e8},
                  {"prs", design::prob_replication_success(tiny_sigma, spec)}}}};
  };

  const auto curve_c = design::prs_curve(for_c, sigmas);
  const auto curve_d = design::prs_curve(for_d, sigmas);
  CommandOutput out;
  out.csv = "relative_size,sigma_r,n_r,c_under_Hc,c_under_Hd,d_under_Hc,d_under_Hd\n";
  json curve = json::array();
  for (std::size_t i = 0; i < curve_c.size(); ++i) {
    const auto& c = curve_c[i];
    const auto& d = curve_d[i];
    out.csv += csv_row({format_number(c.relative_size), format_number(c.sigma_r),
                        std::to_string(design::sigma_to_n(c.sigma_r)), format_number(c.prs_under_Hc),
                        format_number(c.prs_under_Hd), format_number(d.prs_under_Hc),
                        format_number(d.prs_under_Hd)});
    curve.push_back({{"relative_size", c.relative_size},
                     {"sigma_r", c.sigma_r},
                     {"evidence_for_Hc", {{"under_Hc", c.prs_under_Hc}, {"under_Hd", c.prs_under_Hd}}},
                     {"evidence_for_Hd", {{"under_Hc", d.prs_under_Hc}, {"under_Hd", d.prs_under_Hd}}}});
  }
  if (opts.emit_grids) out.files.emplace_back("prs_curve.csv", out.csv);

  ErrorTracker errors;
  out.report = {{"command", "design"},
                {"studies", studies_echo(records)},
                {"parameters",
                 {{"kappa2", ui.kappa2}, {"gamma", config.gamma}, {"target_power", config.target_power}}},
                {"designs", json::array({design_json(for_c), design_json(for_d)})},
                {"curve", curve},
                {"notes",
                 json::array({"Strong evidence for H_c means BF_dc <= gamma and for H_d means "
                              "BF_dc >= 1/gamma. The default gamma = 1/10 is a convention, not "
                              "a value taken from any published figure; set it explicitly when "
                              "comparing."})},
                {"reproducibility", reproducibility(config, errors)}};
  return out;
}

CommandOutput cmd_bridge(const std::vector<StudyRecord>& records, const AnalysisConfig& config,
                         const CommandOptions& opts) {
  config.validate();
  const Dataset data = split_roles(records);
  const BetaParams prior = config.beta_prior();
  const Study original = data.original.to_study();
  const double var_o = original.variance();
  const power_prior::GridSpec grid = config.grid();
  ErrorTracker errors;
  CommandOutput out;

  json mapping = json::array();
  out.csv = "alpha,tau2,I2\n";
  for (int k = 1; k <= 10; ++k) {
    const double a = k / 10.0;
    const double tau2 = hierarchical::alpha_to_tau2(a, var_o);
    const double i2 = hierarchical::alpha_to_I2(a);
    mapping.push_back({{"alpha", a}, {"tau2", tau2}, {"I2", i2}});
    out.csv += csv_row({format_number(a), format_number(tau2), format_number(i2)});
  }

  const auto gf = std::get<special::GFParams>(hierarchical::tau2_prior_from_alpha_prior(prior, var_o));
  const special::GBetaParams gbe = hierarchical::I2_prior_from_alpha_prior(prior);

  // The GF closed form against the beta density pushed through the map.
  const hierarchical::TransformedFromAlpha pushed{prior, var_o};
  DensityGrid tau2_grid;
  tau2_grid.axis1 = linspace(0.0, 50.0 * var_o, grid.points);
  double prior_check = 0.0;
  for (double t : tau2_grid.axis1) {
    const double lg = special::gf_logpdf(t, gf);
    tau2_grid.logdens.push_back(lg);
    const double lt = hierarchical::heterogeneity_logpdf(t, pushed);
    if (std::isfinite(lg) && std::isfinite(lt)) prior_check = std::max(prior_check, std::abs(lg - lt));
  }
  DensityGrid i2_grid;
  i2_grid.axis1 = linspace(0.0, 1.0, grid.points);
  for (double v : i2_grid.axis1) i2_grid.logdens.push_back(special::gbeta_logpdf(v, gbe));

  const UnitInformation ui{config.kappa2};
  json results = json::array();
  for (const auto& rep : data.replications) {
    const StudyPair pair = make_pair(data, rep);
    const LogEvidence ev_pp = power_prior::evidence(pair, prior, config.quadrature);
    const hierarchical::HeterogeneityPrior het = gf;
    const LogEvidence ev_h = hierarchical::hier_marginal_evidence(pair, het, config.quadrature);
    errors.add(ev_pp.rel_err);
    errors.add(ev_h.rel_err);

    const auto [lo, hi] = power_prior::theta_range(pair, grid);
    DensityGrid overlay;
    overlay.axis1 = linspace(lo, hi, grid.points);
    overlay.axis2 = {0.0, 1.0};  // column 0: power prior, column 1: hierarchical
    double max_diff = 0.0;
    for (double t : overlay.axis1) {
      const double lp = power_prior::marginal_posterior_theta(t, pair, prior, ev_pp);
      const double lh = hierarchical::hier_marginal_posterior_theta_r(t, pair, het, ev_h, config.quadrature);
      overlay.logdens.push_back(lp);
      overlay.logdens.push_back(lh);
      max_diff = std::max(max_diff, std::abs(lp - lh));
    }

    // The three Bayes factors rebuilt from the hierarchical side.
    using namespace hierarchical;
    const HierHypothesis h0{Hypothesis::H0, PointEffect{0.0}, FixedTau2{0.0}};
    const HierHypothesis h1{Hypothesis::H1, OriginalUpdatedEffect{}, gf};
    const double s = ui.shrinkage(var_o);
    const HierHypothesis hd_point{Hypothesis::Hd, NormalEffect{0.0, ui.kappa2}, FixedTau2{0.0}};
    const HierHypothesis hc_point{Hypothesis::Hc, NormalEffect{s * original.estimate, s * var_o},
                                  FixedTau2{0.0}};
    const HierHypothesis hd_beta{Hypothesis::Hd, OriginalUpdatedEffect{},
                                 tau2_prior_from_alpha_prior({1.0, config.bf_y}, var_o)};
    const HierHypothesis hc_beta{Hypothesis::Hc, OriginalUpdatedEffect{}, FixedTau2{0.0}};

    auto compare = [&](const char* name, const BayesFactorResult& pp, const BayesFactorResult& hr) {
      errors.add(pp.quadrature_err);
      errors.add(hr.quadrature_err);
      return json{{"test", name},
                  {"power_prior", pp.value()},
                  {"hierarchical", hr.value()},
                  {"rel_diff", std::abs(std::expm1(hr.log_bf - pp.log_bf))}};
    };
    json bfs = json::array(
        {compare("power_prior", bf::bf01_power_prior(pair, prior, config.quadrature),
                 hier_bayes_factor(pair, h0, h1, config.quadrature)),
         compare("unit_information", bf::bf_dc_point(pair, ui),
                 hier_bayes_factor(pair, hd_point, hc_point, config.quadrature)),
         compare("beta_alpha",
                 bf::bf_dc_beta(pair, config.bf_y, config.allow_uniform_y, config.quadrature),
                 hier_bayes_factor(pair, hd_beta, hc_beta, config.quadrature))});

    results.push_back({{"id", rep.id},
                       {"overlay_max_abs_logdiff", max_diff},
                       {"bayes_factors", bfs}});
    if (opts.emit_grids) {
      out.files.emplace_back(file_stem(rep.id) + "_overlay.csv", [&] {
        std::ostringstream o;
        o << "theta,logdens_power_prior,logdens_hierarchical\n";
        for (std::size_t i = 0; i < overlay.axis1.size(); ++i) {
          o << format_number(overlay.axis1[i]) << ',' << format_number(overlay.logdens[2 * i]) << ','
            << format_number(overlay.logdens[2 * i + 1]) << '\n';
        }
        return o.str();
      }());
    }
  }
  if (opts.emit_grids) {
    out.files.emplace_back("tau2_prior.csv", grid_to_csv(tau2_grid, "tau2"));
    out.files.emplace_back("I2_prior.csv", grid_to_csv(i2_grid, "I2"));
    out.files.emplace_back("alpha_tau2_I2.csv", out.csv);
  }

  out.report = {{"command", "bridge"},
                {"studies", studies_echo(records)},
                {"alpha_prior", {{"x", prior.x}, {"y", prior.y}}},
                {"tau2_prior", {{"family", "GF"}, {"a", gf.a}, {"b", gf.b}, {"lambda", gf.lambda}}},
                {"I2_prior", {{"family", "GBe"}, {"a", gbe.a}, {"b", gbe.b}, {"lambda", gbe.lambda}}},
                {"tau2_prior_max_abs_logdiff", prior_check},
                {"mapping", mapping},
                {"results", results},
                {"reproducibility", reproducibility(config, errors)}};
  return out;
}

}  // namespace pprep::app
