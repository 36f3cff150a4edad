#pragma once

#include <variant>

#include "pprep/hypothesis_tests.hpp"
#include "pprep/power_prior.hpp"
#include "pprep/quadrature.hpp"
#include "pprep/special_math.hpp"

namespace pprep::hierarchical {

/// Two-study normal hierarchical model: theta_i ~ N(theta_*, tau^2) with a
/// flat prior f(theta_*) = k. k cancels in every posterior; it is kept at 1
/// and only ever matters in ratios of evidences.
struct HierarchicalModel {
  StudyPair pair;
  double tau2 = 0.0;
  double flat_prior_scale = 1.0;
};

// Prior kinds for the heterogeneity variance tau^2.
struct FixedTau2 {
  double tau2;
};
/// Be(x, y) prior on alpha carried over to tau^2 by change of variables,
/// evaluated through the beta density rather than the GF closed form.
struct TransformedFromAlpha {
  BetaParams prior;
  double sigma2_o;
};

using HeterogeneityPrior =
    std::variant<FixedTau2, special::GFParams, special::InvGammaParams, TransformedFromAlpha>;

void validate(const HeterogeneityPrior& prior);
bool is_point_mass(const HeterogeneityPrior& prior);

/// Log prior density of tau^2 (continuous kinds only).
double heterogeneity_logpdf(double tau2, const HeterogeneityPrior& prior);

/// Scale of tau^2 where the prior carries its mass; used to condition the
/// semi-infinite quadrature.
double heterogeneity_scale(const HeterogeneityPrior& prior);

NormalParams hier_posterior_theta_r(const HierarchicalModel& model);

/// tau^2 = (1/alpha - 1) sigma_o^2 / 2. alpha = 0 maps to +infinity.
double alpha_to_tau2(double alpha, double sigma2_o);
/// alpha = sigma_o^2 / (2 tau^2 + sigma_o^2); +infinity maps to 0.
double tau2_to_alpha(double tau2, double sigma2_o);

/// I^2 = (1 - alpha) / (1 + alpha) and its inverse, same functional form.
double alpha_to_I2(double alpha);
double I2_to_alpha(double I2);

/// I^2 = tau^2 / (tau^2 + sigma_o^2).
double tau2_to_I2(double tau2, double sigma2_o);

/// GF(y, x, 2 / sigma_o^2): the tau^2 prior matching Be(x, y) on alpha.
HeterogeneityPrior tau2_prior_from_alpha_prior(const BetaParams& prior, double sigma2_o);

/// GBe(y, x, 2): the I^2 prior matching Be(x, y) on alpha.
special::GBetaParams I2_prior_from_alpha_prior(const BetaParams& prior);

/// log N(theta_r | theta_o, sigma_o^2 + sigma_r^2 + 2 tau^2), i.e. k = 1.
double hier_evidence(const StudyPair& pair, double tau2);

/// log of int hier_evidence(tau^2) f(tau^2) dtau^2 for a continuous prior.
LogEvidence hier_marginal_evidence(const StudyPair& pair, const HeterogeneityPrior& prior,
                                   const quadrature::QuadratureSpec& spec = {});

double hier_marginal_posterior_tau2(double tau2, const StudyPair& pair,
                                    const HeterogeneityPrior& prior, const LogEvidence& ev);
double hier_marginal_posterior_tau2(double tau2, const StudyPair& pair,
                                    const HeterogeneityPrior& prior,
                                    const quadrature::QuadratureSpec& spec = {});

/// Mixture of the fixed-tau^2 posterior of theta_r over the tau^2 posterior.
/// A FixedTau2 prior returns the fixed-tau^2 normal directly.
double hier_marginal_posterior_theta_r(double theta, const StudyPair& pair,
                                       const HeterogeneityPrior& prior, const LogEvidence& ev,
                                       const quadrature::QuadratureSpec& spec = {});
double hier_marginal_posterior_theta_r(double theta, const StudyPair& pair,
                                       const HeterogeneityPrior& prior,
                                       const quadrature::QuadratureSpec& spec = {});

// Priors for the overall effect theta_* conditional on tau^2.
struct PointEffect {
  double value;
};
struct NormalEffect {
  double mean;
  double variance;
};
/// theta_* | tau^2 ~ N(theta_o, sigma_o^2 + tau^2): the flat prior updated
/// by the original study.
struct OriginalUpdatedEffect {};
/// f(theta_*) = k, not updated; improper, rejected in Bayes factors.
struct FlatEffect {};

using EffectPrior = std::variant<PointEffect, NormalEffect, OriginalUpdatedEffect, FlatEffect>;

struct HierHypothesis {
  Hypothesis label;
  EffectPrior effect;
  HeterogeneityPrior heterogeneity;
};

/// log f(theta_r | H) = log int N(theta_r | theta_*, sigma_r^2 + tau^2)
/// f(theta_*, tau^2 | H) dtheta_* dtau^2.
LogEvidence hier_log_marginal_likelihood(const StudyPair& pair, const HierHypothesis& h,
                                         const quadrature::QuadratureSpec& spec = {});

BayesFactorResult hier_bayes_factor(const StudyPair& pair, const HierHypothesis& numerator,
                                    const HierHypothesis& denominator,
                                    const quadrature::QuadratureSpec& spec = {});

}  // namespace pprep::hierarchical
