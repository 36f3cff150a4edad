#include "pprep/power_prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pprep/error.hpp"
#include "pprep/special_math.hpp"

namespace pprep {

void Study::validate() const {
  if (!std::isfinite(estimate)) throw DomainError("study estimate must be finite");
  if (!(se > 0.0) || !std::isfinite(se)) throw DomainError("study standard error must be positive");
}

void StudyPair::validate() const {
  original.validate();
  replication.validate();
}

void BetaParams::validate() const {
  if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
    throw DomainError("beta prior shapes must be positive and finite");
  }
}

namespace power_prior {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0)) {
    throw DomainError("power parameter must lie in (0, 1], got " + std::to_string(alpha));
  }
}

// Seeds for the adaptive rule: where the beta prior and the likelihood put
// their mass. Without them a very concentrated prior (x = 1e4) could be
// missed by the first 15-point panel.
std::vector<double> evidence_breakpoints(const StudyPair& pair, const BetaParams& prior) {
  std::vector<double> cuts;
  const double s = prior.x + prior.y;
  const double mean = prior.x / s;
  const double sd = std::sqrt(prior.x * prior.y / (s * s * (s + 1.0)));
  for (double k : {-10.0, -3.0, 0.0, 3.0, 10.0}) cuts.push_back(mean + k * sd);
  if (prior.x > 1.0 && prior.y > 1.0) cuts.push_back((prior.x - 1.0) / (s - 2.0));
  const double eb = alpha_empirical_bayes(pair);
  for (double k : {0.25, 1.0, 4.0}) cuts.push_back(eb * k);
  std::erase_if(cuts, [](double c) { return !(c > 0.0 && c < 1.0); });
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

}  // namespace

double power_prior_density(double theta, const Study& original, double alpha) {
  require_alpha(alpha);
  return special::normal_logpdf(theta, original.estimate, original.variance() / alpha);
}

double evidence_integrand_log(double alpha, const StudyPair& pair, const BetaParams& prior) {
  const double var = pair.replication.variance() + pair.original.variance() / alpha;
  return special::normal_logpdf(pair.replication.estimate, pair.original.estimate, var) +
         special::beta_logpdf(alpha, prior.x, prior.y);
}

LogEvidence evidence(const StudyPair& pair, const BetaParams& prior,
                     const quadrature::QuadratureSpec& spec) {
  pair.validate();
  prior.validate();
  const std::vector<double> cuts = evidence_breakpoints(pair, prior);
  auto logf = [&](double alpha) { return evidence_integrand_log(alpha, pair, prior); };
  if (prior.y >= 1.0) {
    const auto r = quadrature::log_integrate_unit(logf, spec, cuts);
    return {r.value, r.err_estimate};
  }

  // For y < 1 the beta factor is unbounded at alpha = 1, closer than double
  // precision can resolve by bisection. Split at 1/2: the left half is
  // rescaled to [0, 1]; on the right, 1 - alpha = u^(1/y) / 2 absorbs the
  // singular factor into the Jacobian exactly.
  std::vector<double> left_cuts;
  for (double c : cuts) {
    if (c < 0.5) left_cuts.push_back(2.0 * c);
  }
  const auto left = quadrature::log_integrate_unit(
      [&](double u) { return logf(0.5 * u) + std::log(0.5); }, spec, left_cuts);

  const double var_o = pair.original.variance();
  const double var_r = pair.replication.variance();
  const double log_const = prior.y * std::log(0.5) - std::log(prior.y) -
                           special::log_beta_fn(prior.x, prior.y);
  std::vector<double> right_cuts;
  for (double c : cuts) {
    if (c > 0.5) right_cuts.push_back(std::pow(2.0 * (1.0 - c), prior.y));
  }
  const auto right = quadrature::log_integrate_unit(
      [&](double u) {
        const double alpha = 1.0 - 0.5 * std::pow(u, 1.0 / prior.y);
        return special::normal_logpdf(pair.replication.estimate, pair.original.estimate,
                                      var_r + var_o / alpha) +
               (prior.x - 1.0) * std::log(alpha) + log_const;
      },
      spec, right_cuts);

  const double hi = std::max(left.value, right.value);
  const double wl = std::exp(left.value - hi);
  const double wr = std::exp(right.value - hi);
  return {hi + std::log(wl + wr), (wl * left.err_estimate + wr * right.err_estimate) / (wl + wr)};
}

double joint_posterior_logdensity(double theta, double alpha, const StudyPair& pair,
                                  const BetaParams& prior, const LogEvidence& ev) {
  require_alpha(alpha);
  return special::normal_logpdf(pair.replication.estimate, theta, pair.replication.variance()) +
         special::normal_logpdf(theta, pair.original.estimate, pair.original.variance() / alpha) +
         special::beta_logpdf(alpha, prior.x, prior.y) - ev.value;
}

double joint_posterior_logdensity(double theta, double alpha, const StudyPair& pair,
                                  const BetaParams& prior) {
  return joint_posterior_logdensity(theta, alpha, pair, prior, evidence(pair, prior));
}

double marginal_posterior_alpha(double alpha, const StudyPair& pair, const BetaParams& prior,
                                const LogEvidence& ev) {
  require_alpha(alpha);
  return evidence_integrand_log(alpha, pair, prior) - ev.value;
}

double marginal_posterior_alpha(double alpha, const StudyPair& pair, const BetaParams& prior) {
  return marginal_posterior_alpha(alpha, pair, prior, evidence(pair, prior));
}

double marginal_posterior_theta(double theta, const StudyPair& pair, const BetaParams& prior,
                                const LogEvidence& ev) {
  const double var_o = pair.original.variance();
  const double d = pair.original.estimate - theta;
  const double a = prior.x + 0.5;
  const double b = prior.x + prior.y + 0.5;
  return special::normal_logpdf(pair.replication.estimate, theta, pair.replication.variance()) +
         special::log_beta_fn(a, prior.y) - ev.value -
         0.5 * std::log(2.0 * std::numbers::pi * var_o) - special::log_beta_fn(prior.x, prior.y) +
         special::log_kummer_m(a, b, -d * d / (2.0 * var_o));
}

double marginal_posterior_theta(double theta, const StudyPair& pair, const BetaParams& prior) {
  return marginal_posterior_theta(theta, pair, prior, evidence(pair, prior));
}

NormalParams posterior_theta_fixed_alpha(const StudyPair& pair, double alpha) {
  require_alpha(alpha);
  const double prec_r = 1.0 / pair.replication.variance();
  const double prec_o = alpha / pair.original.variance();
  const double prec = prec_r + prec_o;
  return {(pair.replication.estimate * prec_r + pair.original.estimate * prec_o) / prec,
          1.0 / prec};
}

double alpha_empirical_bayes(const StudyPair& pair) {
  const double d = pair.replication.estimate - pair.original.estimate;
  const double var_o = pair.original.variance();
  const double var_r = pair.replication.variance();
  if (d * d <= var_r + var_o) return 1.0;
  return std::clamp(var_o / (d * d - var_r), 0.0, 1.0);
}

double limiting_alpha_posterior_logdensity(double alpha) {
  require_alpha(alpha);
  return special::beta_logpdf(alpha, 1.5, 1.0);
}

double find_mode(const std::function<double(double)>& logf, double lo, double hi, int probe,
                 double tol) {
  if (!(lo < hi)) throw DomainError("find_mode needs lo < hi");
  const std::vector<double> xs = linspace(lo, hi, std::max(probe, 3));
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = logf(xs[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = xs[best == 0 ? 0 : best - 1];
  double b = xs[std::min(best + 1, xs.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = logf(c);
  double fd = logf(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = logf(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = logf(d);
    }
  }
  const double mid = 0.5 * (a + b);
  // The bracket can only end at a boundary point if that point is the argmax.
  if (logf(mid) < best_val) return xs[best];
  return mid;
}

std::pair<double, double> theta_range(const StudyPair& pair, const GridSpec& grid) {
  const NormalParams pooled = posterior_theta_fixed_alpha(pair, 1.0);
  const double span = grid.theta_sd_span;
  const double psd = std::sqrt(pooled.variance);
  double lo = std::min({pooled.mean - span * psd,
                        pair.replication.estimate - span * pair.replication.se,
                        pair.original.estimate - span * pair.original.se});
  double hi = std::max({pooled.mean + span * psd,
                        pair.replication.estimate + span * pair.replication.se,
                        pair.original.estimate + span * pair.original.se});
  if (grid.theta_min) lo = *grid.theta_min;
  if (grid.theta_max) hi = *grid.theta_max;
  if (!(lo < hi)) throw DomainError("theta grid range is empty");
  return {lo, hi};
}

namespace {

// The alpha axis ends at 1 unless the density is infinite there (y < 1).
std::vector<double> alpha_axis(const GridSpec& grid, const BetaParams& prior) {
  const double hi = prior.y < 1.0 ? 1.0 - grid.alpha_start : 1.0;
  return linspace(grid.alpha_start, hi, grid.points);
}

void check_grid_spec(const GridSpec& grid) {
  if (grid.points < 2) throw DomainError("grids need at least two points");
  if (!(grid.alpha_start > 0.0 && grid.alpha_start < 1.0)) {
    throw DomainError("alpha grid must start inside (0, 1)");
  }
}

}  // namespace

DensityGrid alpha_marginal_grid(const StudyPair& pair, const BetaParams& prior,
                                const GridSpec& grid, const quadrature::QuadratureSpec& spec) {
  check_grid_spec(grid);
  const LogEvidence ev = evidence(pair, prior, spec);
  DensityGrid out;
  out.axis1 = alpha_axis(grid, prior);
  out.logdens.reserve(out.axis1.size());
  for (double a : out.axis1) out.logdens.push_back(marginal_posterior_alpha(a, pair, prior, ev));
  out.normalize();
  return out;
}

DensityGrid theta_marginal_grid(const StudyPair& pair, const BetaParams& prior,
                                const GridSpec& grid, const quadrature::QuadratureSpec& spec) {
  check_grid_spec(grid);
  const LogEvidence ev = evidence(pair, prior, spec);
  const auto [lo, hi] = theta_range(pair, grid);
  DensityGrid out;
  out.axis1 = linspace(lo, hi, grid.points);
  out.logdens.reserve(out.axis1.size());
  for (double t : out.axis1) out.logdens.push_back(marginal_posterior_theta(t, pair, prior, ev));
  out.normalize();
  return out;
}

DensityGrid joint_grid(const StudyPair& pair, const BetaParams& prior, const GridSpec& grid,
                       const quadrature::QuadratureSpec& spec) {
  check_grid_spec(grid);
  const LogEvidence ev = evidence(pair, prior, spec);
  const auto [lo, hi] = theta_range(pair, grid);
  DensityGrid out;
  out.axis1 = linspace(lo, hi, grid.points);
  out.axis2 = alpha_axis(grid, prior);
  out.logdens.reserve(out.axis1.size() * out.axis2.size());
  for (double t : out.axis1) {
    for (double a : out.axis2) {
      out.logdens.push_back(joint_posterior_logdensity(t, a, pair, prior, ev));
    }
  }
  out.normalize();
  return out;
}

DensityGrid limiting_alpha_grid(const GridSpec& grid) {
  check_grid_spec(grid);
  DensityGrid out;
  out.axis1 = linspace(grid.alpha_start, 1.0, grid.points);
  for (double a : out.axis1) out.logdens.push_back(limiting_alpha_posterior_logdensity(a));
  out.normalize();
  return out;
}

DensityGrid replication_only_theta_grid(const StudyPair& pair, const GridSpec& grid) {
  check_grid_spec(grid);
  const auto [lo, hi] = theta_range(pair, grid);
  DensityGrid out;
  out.axis1 = linspace(lo, hi, grid.points);
  for (double t : out.axis1) {
    out.logdens.push_back(special::normal_logpdf(t, pair.replication.estimate,
                                                 pair.replication.variance()));
  }
  out.normalize();
  return out;
}

}  // namespace power_prior
}  // namespace pprep
