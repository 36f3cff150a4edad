#pragma once

#include <span>
#include <vector>

#include "pprep/hypothesis_tests.hpp"
#include "pprep/power_prior.hpp"

namespace pprep::design {

/// Planning inputs for the point-hypothesis compatibility test BF_dc.
/// `hypothesis` names the hypothesis we want strong evidence for: Hc means
/// success is BF_dc <= gamma, Hd means BF_dc >= 1/gamma. find_design also
/// assumes that hypothesis is true.
struct DesignSpec {
  Study original;
  UnitInformation ui;
  double gamma = 0.1;
  double target_power = 0.8;
  Hypothesis hypothesis = Hypothesis::Hc;

  void validate() const;
};

struct DesignResult {
  double sigma_r;
  int n_r;
  double relative_size;  // sigma_o^2 / sigma_r^2
  double relative_n;     // n_r / n_o under n = 4 / sigma^2
  double prs_under_Hc;
  double prs_under_Hd;
  bool attained;
};

struct CurvePoint {
  double relative_size;
  double sigma_r;
  double prs_under_Hc;
  double prs_under_Hd;
};

/// Right-hand side X of the success condition
///   {theta_r - theta_o (sigma_r^2 + kappa^2) / kappa^2}^2 <= X
/// equivalent to BF_dc <= gamma. Negative X means the region is empty.
double success_threshold_X(double sigma_r, const Study& original, const UnitInformation& ui,
                           double gamma);
/// X for the event that favours spec.hypothesis (gamma or 1/gamma).
double success_threshold_X(double sigma_r, const DesignSpec& spec);

/// Centre of the success interval, theta_o (sigma_r^2 + kappa^2) / kappa^2.
double success_center(double sigma_r, const Study& original, const UnitInformation& ui);

/// Mean and variance of the replication estimate under H_c or H_d.
NormalParams predictive(double sigma_r, const Study& original, const UnitInformation& ui,
                        Hypothesis truth);

/// P((T - center)^2 <= X) for T ~ N(mean, variance), i.e.
/// P(chi^2_{1,lambda} <= X / variance) with lambda = (mean - center)^2 / variance.
double quadratic_region_probability(double X, double center, double mean, double variance);

/// Probability that BF_dc gives strong evidence for spec.hypothesis when
/// `truth` holds.
double prob_replication_success(double sigma_r, const DesignSpec& spec, Hypothesis truth);
/// Shorthand with truth = spec.hypothesis.
double prob_replication_success(double sigma_r, const DesignSpec& spec);

std::vector<CurvePoint> prs_curve(const DesignSpec& spec, std::span<const double> sigma_grid);

/// Smallest relative size on the grid whose PRS under spec.hypothesis
/// reaches target_power. If none does, attained = false and the point with
/// the largest relative size is reported.
DesignResult find_design(const DesignSpec& spec, std::span<const double> sigma_grid);

/// Replication standard errors for `points` log-spaced relative sizes
/// sigma_o^2 / sigma_r^2 in [lo, hi].
std::vector<double> sigma_grid_from_relative(const Study& original, double lo = 0.2,
                                             double hi = 20.0, int points = 60);

/// n = ceil(4 / sigma^2), at least 2.
int sigma_to_n(double sigma);
/// sigma = sqrt(4 / n).
double n_to_sigma(int n);

}  // namespace pprep::design
