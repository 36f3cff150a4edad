#pragma once

namespace pprep::special {

/// Generalized beta GBe(a, b, lambda) on [0, 1]:
///   lambda^a x^(a-1) (1-x)^(b-1) / (B(a,b) {1 - (1-lambda) x}^(a+b)).
struct GBetaParams {
  double a;
  double b;
  double lambda;
  void validate() const;
};

/// Generalized F GF(a, b, lambda) on [0, inf):
///   lambda^a x^(a-1) / (B(a,b) (1 + lambda x)^(a+b)).
struct GFParams {
  double a;
  double b;
  double lambda;
  void validate() const;
};

/// Inverse gamma with shape q and scale r.
struct InvGammaParams {
  double q;
  double r;
  void validate() const;
};

double log_beta_fn(double z, double w);

/// Kummer's confluent hypergeometric function M(a, b, z) for b > a > 0,
/// defined by
///   M(a,b,z) = int_0^1 exp(z t) t^(a-1) (1-t)^(b-a-1) dt / B(b-a, a).
/// Negative z is mapped through M(a,b,z) = e^z M(b-a,b,-z); the resulting
/// non-negative argument is summed as a power series up to 30 and
/// integrated adaptively above that. M is strictly positive on this
/// domain so only the logarithm is returned.
///
/// Throws UnsupportedDomainError outside b > a > 0 or for |z| > 1e5.
double log_kummer_m(double a, double b, double z);

inline constexpr double kKummerSeriesLimit = 30.0;
inline constexpr double kKummerMaxAbsZ = 1e5;

double normal_logpdf(double x, double mean, double variance);

/// Standard normal CDF.
double normal_cdf(double x);

/// P(chi^2_{1,lambda} <= x) = Phi(sqrt(x) - sqrt(lambda)) - Phi(-sqrt(x) - sqrt(lambda)).
double noncentral_chisq1_cdf(double x, double lambda);

double beta_logpdf(double x, double a, double b);
double gbeta_logpdf(double x, const GBetaParams& p);
double gf_logpdf(double x, const GFParams& p);
double invgamma_logpdf(double x, const InvGammaParams& p);

}  // namespace pprep::special
