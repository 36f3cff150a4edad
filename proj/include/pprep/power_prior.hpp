#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pprep/density_grid.hpp"
#include "pprep/quadrature.hpp"

namespace pprep {

/// Effect estimate with its (known) standard error.
struct Study {
  double estimate;
  double se;

  double variance() const { return se * se; }
  void validate() const;
};

struct StudyPair {
  Study original;
  Study replication;

  void validate() const;
};

/// Shape pair of the Be(x, y) prior on the power parameter.
struct BetaParams {
  double x = 1.0;
  double y = 1.0;

  void validate() const;
};

struct NormalParams {
  double mean;
  double variance;
};

/// Log marginal likelihood plus the relative error estimate of the
/// quadrature that produced it.
struct LogEvidence {
  double value;
  double rel_err;
};

namespace power_prior {

/// Smallest power parameter used on default grids; alpha = 0 itself is
/// excluded because the flat-initial power prior is improper there.
inline constexpr double kAlphaGridStart = 1e-6;

/// Normalized power prior N(theta | estimate_o, se_o^2 / alpha).
double power_prior_density(double theta, const Study& original, double alpha);

/// log of N(theta_r | theta_o, sigma_r^2 + sigma_o^2 / alpha) Be(alpha | x, y),
/// the integrand of the marginal likelihood.
double evidence_integrand_log(double alpha, const StudyPair& pair, const BetaParams& prior);

/// Log marginal likelihood of the replication estimate under the power
/// prior with Be(x, y) prior on alpha. Integrated numerically over alpha.
LogEvidence evidence(const StudyPair& pair, const BetaParams& prior,
                     const quadrature::QuadratureSpec& spec = {});

double joint_posterior_logdensity(double theta, double alpha, const StudyPair& pair,
                                  const BetaParams& prior, const LogEvidence& ev);
double joint_posterior_logdensity(double theta, double alpha, const StudyPair& pair,
                                  const BetaParams& prior);

double marginal_posterior_alpha(double alpha, const StudyPair& pair, const BetaParams& prior,
                                const LogEvidence& ev);
double marginal_posterior_alpha(double alpha, const StudyPair& pair, const BetaParams& prior);

/// Closed form via the beta function and Kummer's M.
double marginal_posterior_theta(double theta, const StudyPair& pair, const BetaParams& prior,
                                const LogEvidence& ev);
double marginal_posterior_theta(double theta, const StudyPair& pair, const BetaParams& prior);

/// Normal posterior of theta for a fixed power parameter.
NormalParams posterior_theta_fixed_alpha(const StudyPair& pair, double alpha);

/// Maximizer over [0, 1] of N(theta_r | theta_o, sigma_r^2 + sigma_o^2 / alpha).
double alpha_empirical_bayes(const StudyPair& pair);

/// Be(3/2, 1): the limiting alpha posterior for perfectly agreeing studies.
double limiting_alpha_posterior_logdensity(double alpha);

/// Golden-section search for the maximum of `logf` on [lo, hi]. Starts from
/// the argmax over `probe` equally spaced points and refines the bracket
/// around it down to `tol`.
double find_mode(const std::function<double(double)>& logf, double lo, double hi,
                 int probe = 401, double tol = 1e-6);

// Grid builders. Each returns a grid rescaled so its trapezoid integral is
// exactly one; the applied correction is kept in log_norm_correction.
struct GridSpec {
  int points = 401;
  double alpha_start = kAlphaGridStart;
  double theta_sd_span = 6.0;
  std::optional<double> theta_min;
  std::optional<double> theta_max;
};

/// Default theta window: the alpha = 1 pooled posterior mean +- span pooled sd,
/// widened to cover the replication-only posterior as well.
std::pair<double, double> theta_range(const StudyPair& pair, const GridSpec& grid = {});

DensityGrid alpha_marginal_grid(const StudyPair& pair, const BetaParams& prior,
                                const GridSpec& grid = {},
                                const quadrature::QuadratureSpec& spec = {});
DensityGrid theta_marginal_grid(const StudyPair& pair, const BetaParams& prior,
                                const GridSpec& grid = {},
                                const quadrature::QuadratureSpec& spec = {});
DensityGrid joint_grid(const StudyPair& pair, const BetaParams& prior, const GridSpec& grid = {},
                       const quadrature::QuadratureSpec& spec = {});
DensityGrid limiting_alpha_grid(const GridSpec& grid = {});
/// Posterior of theta from the replication alone (flat prior).
DensityGrid replication_only_theta_grid(const StudyPair& pair, const GridSpec& grid = {});

}  // namespace power_prior
}  // namespace pprep
