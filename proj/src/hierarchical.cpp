#include "pprep/hierarchical.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "pprep/error.hpp"

namespace pprep::hierarchical {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_variance(double sigma2_o) {
  if (!(sigma2_o > 0.0) || !std::isfinite(sigma2_o)) {
    throw DomainError("original variance must be positive and finite");
  }
}

// Where the tau^2 posterior may put mass: the prior scale and the value the
// data alone would suggest.
std::vector<double> tau2_breakpoints(const StudyPair& pair, const HeterogeneityPrior& prior) {
  std::vector<double> cuts{heterogeneity_scale(prior)};
  const double d = pair.replication.estimate - pair.original.estimate;
  const double data_tau2 =
      0.5 * (d * d - pair.original.variance() - pair.replication.variance());
  if (data_tau2 > 0.0) cuts.push_back(data_tau2);
  return cuts;
}

}  // namespace

void validate(const HeterogeneityPrior& prior) {
  std::visit(overloaded{
                 [](const FixedTau2& f) {
                   if (!(f.tau2 >= 0.0) || !std::isfinite(f.tau2)) {
                     throw DomainError("fixed tau^2 must be finite and non-negative");
                   }
                 },
                 [](const special::GFParams& p) { p.validate(); },
                 [](const special::InvGammaParams& p) { p.validate(); },
                 [](const TransformedFromAlpha& t) {
                   t.prior.validate();
                   require_variance(t.sigma2_o);
                 },
             },
             prior);
}

bool is_point_mass(const HeterogeneityPrior& prior) {
  return std::holds_alternative<FixedTau2>(prior);
}

double heterogeneity_logpdf(double tau2, const HeterogeneityPrior& prior) {
  validate(prior);
  if (std::isnan(tau2)) throw DomainError("tau^2 is NaN");
  if (tau2 < 0.0) return -kInf;
  return std::visit(
      overloaded{
          [](const FixedTau2&) -> double {
            throw DomainError("a fixed tau^2 is a point mass and has no density");
          },
          [tau2](const special::GFParams& p) { return special::gf_logpdf(tau2, p); },
          [tau2](const special::InvGammaParams& p) {
            return tau2 == 0.0 ? -kInf : special::invgamma_logpdf(tau2, p);
          },
          [tau2](const TransformedFromAlpha& t) {
            const double denom = 2.0 * tau2 + t.sigma2_o;
            return special::beta_logpdf(t.sigma2_o / denom, t.prior.x, t.prior.y) +
                   std::log(2.0 * t.sigma2_o) - 2.0 * std::log(denom);
          },
      },
      prior);
}

double heterogeneity_scale(const HeterogeneityPrior& prior) {
  return std::visit(overloaded{
                        [](const FixedTau2& f) { return f.tau2; },
                        [](const special::GFParams& p) { return 1.0 / p.lambda; },
                        [](const special::InvGammaParams& p) { return p.r / (p.q + 1.0); },
                        [](const TransformedFromAlpha& t) { return 0.5 * t.sigma2_o; },
                    },
                    prior);
}

NormalParams hier_posterior_theta_r(const HierarchicalModel& model) {
  model.pair.validate();
  if (!(model.tau2 >= 0.0)) throw DomainError("tau^2 must be non-negative");
  const double prec_r = 1.0 / model.pair.replication.variance();
  const double prec_o = 1.0 / (2.0 * model.tau2 + model.pair.original.variance());
  const double prec = prec_r + prec_o;
  return {(model.pair.replication.estimate * prec_r + model.pair.original.estimate * prec_o) / prec,
          1.0 / prec};
}

double alpha_to_tau2(double alpha, double sigma2_o) {
  require_variance(sigma2_o);
  if (std::isnan(alpha) || alpha < 0.0 || alpha > 1.0) {
    throw DomainError("alpha must lie in [0, 1]");
  }
  if (alpha == 0.0) return kInf;
  return (1.0 / alpha - 1.0) * sigma2_o / 2.0;
}

double tau2_to_alpha(double tau2, double sigma2_o) {
  require_variance(sigma2_o);
  if (std::isnan(tau2) || tau2 < 0.0) throw DomainError("tau^2 must be non-negative");
  if (std::isinf(tau2)) return 0.0;
  return sigma2_o / (2.0 * tau2 + sigma2_o);
}

double alpha_to_I2(double alpha) {
  if (std::isnan(alpha) || alpha < 0.0 || alpha > 1.0) {
    throw DomainError("alpha must lie in [0, 1]");
  }
  return (1.0 - alpha) / (1.0 + alpha);
}

double I2_to_alpha(double I2) {
  if (std::isnan(I2) || I2 < 0.0 || I2 > 1.0) throw DomainError("I^2 must lie in [0, 1]");
  return (1.0 - I2) / (1.0 + I2);
}

double tau2_to_I2(double tau2, double sigma2_o) {
  require_variance(sigma2_o);
  if (std::isnan(tau2) || tau2 < 0.0) throw DomainError("tau^2 must be non-negative");
  if (std::isinf(tau2)) return 1.0;
  return tau2 / (tau2 + sigma2_o);
}

HeterogeneityPrior tau2_prior_from_alpha_prior(const BetaParams& prior, double sigma2_o) {
  prior.validate();
  require_variance(sigma2_o);
  return special::GFParams{prior.y, prior.x, 2.0 / sigma2_o};
}

special::GBetaParams I2_prior_from_alpha_prior(const BetaParams& prior) {
  prior.validate();
  return {prior.y, prior.x, 2.0};
}

double hier_evidence(const StudyPair& pair, double tau2) {
  pair.validate();
  if (!(tau2 >= 0.0)) throw DomainError("tau^2 must be non-negative");
  return special::normal_logpdf(
      pair.replication.estimate, pair.original.estimate,
      pair.original.variance() + pair.replication.variance() + 2.0 * tau2);
}

LogEvidence hier_marginal_evidence(const StudyPair& pair, const HeterogeneityPrior& prior,
                                   const quadrature::QuadratureSpec& spec) {
  validate(prior);
  if (const auto* fixed = std::get_if<FixedTau2>(&prior)) {
    return {hier_evidence(pair, fixed->tau2), 0.0};
  }
  auto logf = [&](double tau2) {
    return hier_evidence(pair, tau2) + heterogeneity_logpdf(tau2, prior);
  };
  const auto r = quadrature::log_integrate_semiinf(logf, spec, heterogeneity_scale(prior),
                                                   tau2_breakpoints(pair, prior));
  return {r.value, r.err_estimate};
}

double hier_marginal_posterior_tau2(double tau2, const StudyPair& pair,
                                    const HeterogeneityPrior& prior, const LogEvidence& ev) {
  if (is_point_mass(prior)) throw DomainError("tau^2 posterior needs a continuous prior");
  if (tau2 < 0.0) return -kInf;
  return hier_evidence(pair, tau2) + heterogeneity_logpdf(tau2, prior) - ev.value;
}

double hier_marginal_posterior_tau2(double tau2, const StudyPair& pair,
                                    const HeterogeneityPrior& prior,
                                    const quadrature::QuadratureSpec& spec) {
  if (is_point_mass(prior)) throw DomainError("tau^2 posterior needs a continuous prior");
  return hier_marginal_posterior_tau2(tau2, pair, prior, hier_marginal_evidence(pair, prior, spec));
}

double hier_marginal_posterior_theta_r(double theta, const StudyPair& pair,
                                       const HeterogeneityPrior& prior, const LogEvidence& ev,
                                       const quadrature::QuadratureSpec& spec) {
  validate(prior);
  if (const auto* fixed = std::get_if<FixedTau2>(&prior)) {
    const NormalParams post = hier_posterior_theta_r({pair, fixed->tau2});
    return special::normal_logpdf(theta, post.mean, post.variance);
  }
  auto logf = [&](double tau2) {
    const NormalParams post = hier_posterior_theta_r({pair, tau2});
    return special::normal_logpdf(theta, post.mean, post.variance) + hier_evidence(pair, tau2) +
           heterogeneity_logpdf(tau2, prior);
  };
  const auto r = quadrature::log_integrate_semiinf(logf, spec, heterogeneity_scale(prior),
                                                   tau2_breakpoints(pair, prior));
  return r.value - ev.value;
}

double hier_marginal_posterior_theta_r(double theta, const StudyPair& pair,
                                       const HeterogeneityPrior& prior,
                                       const quadrature::QuadratureSpec& spec) {
  const LogEvidence ev = is_point_mass(prior) ? LogEvidence{0.0, 0.0}
                                              : hier_marginal_evidence(pair, prior, spec);
  return hier_marginal_posterior_theta_r(theta, pair, prior, ev, spec);
}

LogEvidence hier_log_marginal_likelihood(const StudyPair& pair, const HierHypothesis& h,
                                         const quadrature::QuadratureSpec& spec) {
  pair.validate();
  validate(h.heterogeneity);
  const double theta_r = pair.replication.estimate;
  const double var_r = pair.replication.variance();
  const double var_o = pair.original.variance();

  // log f(theta_r | tau^2, H) after integrating theta_* analytically.
  auto conditional = std::visit(
      overloaded{
          [&](const PointEffect& p) -> std::function<double(double)> {
            return [=](double tau2) {
              return special::normal_logpdf(theta_r, p.value, var_r + tau2);
            };
          },
          [&](const NormalEffect& p) -> std::function<double(double)> {
            if (!(p.variance >= 0.0)) throw DomainError("effect prior variance must be >= 0");
            return [=](double tau2) {
              return special::normal_logpdf(theta_r, p.mean, var_r + tau2 + p.variance);
            };
          },
          [&](const OriginalUpdatedEffect&) -> std::function<double(double)> {
            const double theta_o = pair.original.estimate;
            return [=](double tau2) {
              return special::normal_logpdf(theta_r, theta_o, var_r + var_o + 2.0 * tau2);
            };
          },
          [](const FlatEffect&) -> std::function<double(double)> {
            throw DomainError("flat prior on theta_* is improper; marginal likelihood undefined");
          },
      },
      h.effect);

  if (const auto* fixed = std::get_if<FixedTau2>(&h.heterogeneity)) {
    return {conditional(fixed->tau2), 0.0};
  }
  auto logf = [&](double tau2) {
    return conditional(tau2) + heterogeneity_logpdf(tau2, h.heterogeneity);
  };
  const auto r = quadrature::log_integrate_semiinf(logf, spec, heterogeneity_scale(h.heterogeneity),
                                                   tau2_breakpoints(pair, h.heterogeneity));
  return {r.value, r.err_estimate};
}

BayesFactorResult hier_bayes_factor(const StudyPair& pair, const HierHypothesis& numerator,
                                    const HierHypothesis& denominator,
                                    const quadrature::QuadratureSpec& spec) {
  const LogEvidence num = hier_log_marginal_likelihood(pair, numerator, spec);
  const LogEvidence den = hier_log_marginal_likelihood(pair, denominator, spec);
  return {num.value - den.value, numerator.label, denominator.label, num.rel_err + den.rel_err};
}

}  // namespace pprep::hierarchical
