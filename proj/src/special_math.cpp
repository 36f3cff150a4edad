#include "pprep/special_math.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pprep/error.hpp"
#include "pprep/quadrature.hpp"

namespace pprep::special {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// k * log(x) with the convention 0 * log(0) = 0.
double xlogy(double k, double x) {
  if (k == 0.0) return 0.0;
  if (x == 0.0) return k > 0.0 ? -kInf : kInf;
  return k * std::log(x);
}

// k * log1p(x) with the convention 0 * log(0) = 0.
double xlog1py(double k, double x) {
  if (k == 0.0) return 0.0;
  if (x == -1.0) return k > 0.0 ? -kInf : kInf;
  return k * std::log1p(x);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be positive and finite");
  }
}

// Positive-term power series, valid for z >= 0.
double log_kummer_series(double a, double b, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < 100000; ++n) {
    term *= (a + n) / (b + n) * z / (n + 1);
    sum += term;
    if (term < 1e-17 * sum) return std::log(sum);
  }
  throw ConvergenceError("Kummer M power series did not converge", std::log(sum), term);
}

// Integral representation for z > 0, written around t = 1 to keep exp(.)
// bounded: M = e^z int_0^1 e^{-z s} s^(c-1) (1-s)^(a-1) ds / B(c, a),
// c = b - a. The range is split at s = 1/2. Below it, c < 1 is handled by
// s = w^(1/c); above it, a < 1 by 1 - s = v^(1/a). Both substitutions turn
// an integrable endpoint singularity into a bounded integrand.
double log_kummer_integral(double a, double b, double z) {
  const double c = b - a;
  const quadrature::QuadratureSpec spec{1e-13, 1e-300, 4000};
  constexpr double split = 0.5;

  // Log of the integrand at its interior peak, if any, so that large c / z
  // cannot underflow.
  const double peak = std::clamp((c - 1.0) / z, 0.0, 1.0);
  const double shift = c > 1.0 && peak > 0.0 ? -z * peak + (c - 1.0) * std::log(peak) : 0.0;
  auto log_g = [&](double s) { return -z * s + xlogy(c - 1.0, s) + xlog1py(a - 1.0, -s) - shift; };

  std::vector<double> marks;
  for (double m : {peak, (c + 1.0) / z, 10.0 * (c + 1.0) / z, 50.0 * (c + 1.0) / z}) {
    if (m > 0.0 && m < split) marks.push_back(m);
  }

  double left;
  if (c < 1.0) {
    const double top = std::pow(split, c);
    auto f = [&](double w) {
      const double s = std::pow(w, 1.0 / c);
      return std::exp(-z * s + xlog1py(a - 1.0, -s) - shift) / c;
    };
    std::vector<double> cuts;
    for (double m : marks) cuts.push_back(std::pow(m, c));
    left = quadrature::integrate(f, 0.0, top, spec, cuts).value;
  } else {
    left = quadrature::integrate([&](double s) { return std::exp(log_g(s)); }, 0.0, split, spec,
                                 marks)
               .value;
  }

  double right;
  if (a < 1.0) {
    const double top = std::pow(1.0 - split, a);
    auto f = [&](double v) {
      const double one_minus = std::pow(v, 1.0 / a);
      return std::exp(-z * (1.0 - one_minus) + xlog1py(c - 1.0, -one_minus) - shift) / a;
    };
    right = quadrature::integrate(f, 0.0, top, spec).value;
  } else {
    std::vector<double> cuts;
    if (peak > split && peak < 1.0) cuts.push_back(peak);
    right = quadrature::integrate([&](double s) { return std::exp(log_g(s)); }, split, 1.0, spec,
                                  cuts)
                .value;
  }
  return z + shift + std::log(left + right) - log_beta_fn(c, a);
}

}  // namespace

void GBetaParams::validate() const {
  require_positive(a, "GBe shape a");
  require_positive(b, "GBe shape b");
  require_positive(lambda, "GBe scale lambda");
}

void GFParams::validate() const {
  require_positive(a, "GF shape a");
  require_positive(b, "GF shape b");
  require_positive(lambda, "GF rate lambda");
}

void InvGammaParams::validate() const {
  require_positive(q, "inverse-gamma shape q");
  require_positive(r, "inverse-gamma scale r");
}

double log_beta_fn(double z, double w) {
  if (!(z > 0.0) || !(w > 0.0)) throw DomainError("beta function needs positive arguments");
  return std::lgamma(z) + std::lgamma(w) - std::lgamma(z + w);
}

double log_kummer_m(double a, double b, double z) {
  if (!(a > 0.0) || !(b > a) || !std::isfinite(b)) {
    throw UnsupportedDomainError("Kummer M is implemented for b > a > 0 only (a = " +
                                 std::to_string(a) + ", b = " + std::to_string(b) + ")");
  }
  if (std::isnan(z) || std::abs(z) > kKummerMaxAbsZ) {
    throw UnsupportedDomainError("Kummer M argument outside |z| <= 1e5");
  }
  if (z == 0.0) return 0.0;
  if (z < 0.0) return z + log_kummer_m(b - a, b, -z);
  if (z <= kKummerSeriesLimit) return log_kummer_series(a, b, z);
  return log_kummer_integral(a, b, z);
}

double normal_logpdf(double x, double mean, double variance) {
  if (!(variance > 0.0)) throw DomainError("normal variance must be positive");
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double noncentral_chisq1_cdf(double x, double lambda) {
  if (std::isnan(x) || std::isnan(lambda) || x < 0.0 || lambda < 0.0) {
    throw DomainError("noncentral chi-squared needs x >= 0 and lambda >= 0");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double rx = std::sqrt(x);
  const double rl = std::sqrt(lambda);
  const double upper = rx - rl;
  const double lower = -rx - rl;
  double p;
  if (upper <= 0.0) {
    p = normal_cdf(upper) - normal_cdf(lower);
  } else {
    // 1 - Phi(-upper) - Phi(lower): both tails computed without cancellation.
    p = 1.0 - normal_cdf(-upper) - normal_cdf(lower);
  }
  return std::clamp(p, 0.0, 1.0);
}

double beta_logpdf(double x, double a, double b) {
  require_positive(a, "beta shape a");
  require_positive(b, "beta shape b");
  if (std::isnan(x)) throw DomainError("beta density evaluated at NaN");
  if (x < 0.0 || x > 1.0) return -kInf;
  return xlogy(a - 1.0, x) + xlog1py(b - 1.0, -x) - log_beta_fn(a, b);
}

double gbeta_logpdf(double x, const GBetaParams& p) {
  p.validate();
  if (std::isnan(x)) throw DomainError("GBe density evaluated at NaN");
  if (x < 0.0 || x > 1.0) return -kInf;
  return p.a * std::log(p.lambda) + xlogy(p.a - 1.0, x) + xlog1py(p.b - 1.0, -x) -
         log_beta_fn(p.a, p.b) - (p.a + p.b) * std::log1p(-(1.0 - p.lambda) * x);
}

double gf_logpdf(double x, const GFParams& p) {
  p.validate();
  if (std::isnan(x)) throw DomainError("GF density evaluated at NaN");
  if (x < 0.0) return -kInf;
  if (std::isinf(x)) return -kInf;
  return p.a * std::log(p.lambda) + xlogy(p.a - 1.0, x) - log_beta_fn(p.a, p.b) -
         (p.a + p.b) * std::log1p(p.lambda * x);
}

double invgamma_logpdf(double x, const InvGammaParams& p) {
  p.validate();
  if (!(x > 0.0)) throw DomainError("inverse-gamma density needs x > 0");
  if (std::isinf(x)) return -kInf;
  return p.q * std::log(p.r) - std::lgamma(p.q) - (p.q + 1.0) * std::log(x) - p.r / x;
}

}  // namespace pprep::special
