#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pprep/design.hpp"
#include "pprep/error.hpp"

using namespace pprep;
using namespace pprep::design;

namespace {

const Study kOriginal{0.21, 0.05};

long double norm_cdf(long double x) { return 0.5L * std::erfc(-x / std::sqrt(2.0L)); }

// BF_dc <= gamma rewritten by completing the square in theta_r:
// (t - c)^2 <= D C / (D - C) [log gamma^2 + log(D / C) + m^2 / (D - C)]
// with D, C the marginal variances under H_d and H_c and m = s theta_o.
long double threshold_oracle(double sigma_r, const Study& o, double kappa2, double gamma) {
  const long double vo = o.variance(), vr = (long double)sigma_r * sigma_r;
  const long double s = kappa2 / (vo + kappa2);
  const long double D = vr + kappa2, C = vr + s * vo, m = s * o.estimate;
  return D * C / (D - C) * (std::log((long double)gamma * gamma) + std::log(D / C) + m * m / (D - C));
}

// P(BF_dc favours `want` | truth) from the normal CDF of the replication
// estimate over the interval (or its complement).
long double prs_oracle(double sigma_r, const DesignSpec& spec, Hypothesis truth) {
  const Study& o = spec.original;
  const double k2 = spec.ui.kappa2;
  const long double g = spec.hypothesis == Hypothesis::Hc ? spec.gamma : 1.0 / spec.gamma;
  const long double X = threshold_oracle(sigma_r, o, k2, static_cast<double>(g));
  const long double vo = o.variance(), vr = (long double)sigma_r * sigma_r;
  const long double s = k2 / (vo + k2);
  const long double mean = truth == Hypothesis::Hc ? s * o.estimate : 0.0L;
  const long double var = truth == Hypothesis::Hc ? vr + s * vo : vr + k2;
  const long double c = o.estimate * (vr + k2) / k2;
  long double inside = 0.0L;
  if (X > 0) {
    const long double h = std::sqrt(X), sd = std::sqrt(var);
    inside = norm_cdf((c + h - mean) / sd) - norm_cdf((c - h - mean) / sd);
  }
  return spec.hypothesis == Hypothesis::Hc ? inside : 1.0L - inside;
}

// Fraction of simulated replication estimates whose Bayes factor, computed
// from the two normal marginal densities, meets the success condition.
double prs_monte_carlo(double sigma_r, const DesignSpec& spec, Hypothesis truth, long draws,
                       std::uint64_t seed) {
  const double vo = spec.original.variance(), vr = sigma_r * sigma_r, k2 = spec.ui.kappa2;
  const double s = k2 / (vo + k2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  const double mean = truth == Hypothesis::Hc ? s * spec.original.estimate : 0.0;
  const double sd = std::sqrt(truth == Hypothesis::Hc ? vr + s * vo : vr + k2);
  const double log_gamma = std::log(spec.gamma);
  long hits = 0;
  for (long i = 0; i < draws; ++i) {
    const double t = mean + sd * z(rng);
    const double log_bf = static_cast<double>(std::log(oracle::normal_pdf(t, 0, vr + k2)) -
                                              std::log(oracle::normal_pdf(t, s * spec.original.estimate, vr + s * vo)));
    hits += spec.hypothesis == Hypothesis::Hc ? log_bf <= log_gamma : log_bf >= -log_gamma;
  }
  return static_cast<double>(hits) / draws;
}

}  // namespace

TEST_CASE("success threshold") {
  const UnitInformation ui{2.0};
  CHECK(success_threshold_X(0.05, kOriginal, ui, 0.1) ==
        doctest::Approx(static_cast<double>(threshold_oracle(0.05, kOriginal, 2.0, 0.1))).epsilon(1e-12));

  // gamma = 1, centred original, sigma_r = sigma_o: only the log-ratio term survives.
  const Study centred{0.0, 0.05};
  const double v = 0.0025, s = 2.0 / (v + 2.0);
  const double D = v + 2.0, C = v + s * v;
  CHECK(success_threshold_X(0.05, centred, ui, 1.0) == doctest::Approx(D * C / (D - C) * std::log(D / C)).epsilon(1e-12));

  CHECK(success_threshold_X(0.05, kOriginal, ui, 1e-300) < 0.0);
  CHECK(success_center(0.05, kOriginal, ui) == doctest::Approx(0.21 * 2.0025 / 2.0).epsilon(1e-15));

  std::mt19937_64 rng(oracle::seed() + 50);
  std::uniform_real_distribution<double> est(-1.0, 1.0), se(0.01, 0.5), k2(0.5, 5.0), lg(-5.0, 0.0);
  for (int i = 0; i < 500; ++i) {
    const Study o{est(rng), se(rng)};
    const double sr = se(rng), kappa2 = k2(rng), g = std::exp(lg(rng));
    const double want = static_cast<double>(threshold_oracle(sr, o, kappa2, g));
    CHECK(success_threshold_X(sr, o, {kappa2}, g) == doctest::Approx(want).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("probability of replication success against the interval oracle") {
  std::mt19937_64 rng(oracle::seed() + 51);
  std::uniform_real_distribution<double> est(-1.0, 1.0), se(0.01, 0.5), k2(0.5, 5.0), lg(-4.0, -0.5);
  for (int i = 0; i < 500; ++i) {
    DesignSpec spec{{est(rng), se(rng)}, {k2(rng)}, std::exp(lg(rng)), 0.8,
                    i % 2 ? Hypothesis::Hd : Hypothesis::Hc};
    const double sr = se(rng);
    for (Hypothesis truth : {Hypothesis::Hc, Hypothesis::Hd}) {
      const double got = prob_replication_success(sr, spec, truth);
      CHECK(got >= 0.0);
      CHECK(got <= 1.0);
      CHECK(std::abs(got - static_cast<double>(prs_oracle(sr, spec, truth))) < 1e-9);
    }
  }
  // Empty region.
  const DesignSpec tiny{kOriginal, {2.0}, 1e-300};
  CHECK(prob_replication_success(0.05, tiny) == 0.0);
}

TEST_CASE("probability of replication success against Monte Carlo") {
  const DesignSpec spec{kOriginal, {2.0}, 0.1, 0.8, Hypothesis::Hc};
  const double mc = prs_monte_carlo(0.05, spec, Hypothesis::Hc, 1'000'000, oracle::seed() + 52);
  CHECK(std::abs(prob_replication_success(0.05, spec) - mc) < 3e-3);

  // Randomized specs with fewer draws; tolerance is three binomial SEs.
  std::mt19937_64 rng(oracle::seed() + 53);
  std::uniform_real_distribution<double> est(-0.6, 0.6), se(0.02, 0.3), rel(0.25, 4.0);
  for (int i = 0; i < 12; ++i) {
    const DesignSpec d{{est(rng), se(rng)}, {2.0}, 0.1, 0.8, i % 2 ? Hypothesis::Hd : Hypothesis::Hc};
    const double sr = d.original.se / std::sqrt(rel(rng));
    const Hypothesis truth = i % 4 < 2 ? Hypothesis::Hc : Hypothesis::Hd;
    const double p = prob_replication_success(sr, d, truth);
    const long draws = 200'000;
    const double got = prs_monte_carlo(sr, d, truth, draws, oracle::seed() + 100 + i);
    const double se_binom = std::sqrt(std::max(p * (1 - p), 1e-12) / draws);
    CHECK_MESSAGE(std::abs(p - got) <= 3 * se_binom + 1e-9, "spec " << i << " p " << p << " mc " << got);
  }
}

TEST_CASE("quadratic region probability is scale free") {
  std::mt19937_64 rng(oracle::seed() + 54);
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.01, 3.0), uc(0.01, 100.0);
  for (int i = 0; i < 500; ++i) {
    const double X = pos(rng), center = u(rng), mean = u(rng), var = pos(rng), c = uc(rng);
    const double base = quadratic_region_probability(X, center, mean, var);
    const double scaled = quadratic_region_probability(c * X, std::sqrt(c) * center, std::sqrt(c) * mean, c * var);
    CHECK(scaled == doctest::Approx(base).epsilon(1e-10).scale(1.0));
  }
  CHECK(quadratic_region_probability(-1.0, 0.0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(quadratic_region_probability(1.0, 0.0, 0.0, 0.0), DomainError);
}

TEST_CASE("predictive distributions") {
  const UnitInformation ui{2.0};
  const NormalParams c = predictive(0.05, kOriginal, ui, Hypothesis::Hc);
  const double s = 2.0 / 2.0025;
  CHECK(c.mean == doctest::Approx(s * 0.21).epsilon(1e-15));
  CHECK(c.variance == doctest::Approx(0.0025 + s * 0.0025).epsilon(1e-15));
  const NormalParams d = predictive(0.05, kOriginal, ui, Hypothesis::Hd);
  CHECK(d.mean == 0.0);
  CHECK(d.variance == doctest::Approx(2.0025).epsilon(1e-15));
  CHECK_THROWS_AS(predictive(0.05, kOriginal, ui, Hypothesis::H0), DomainError);
}

TEST_CASE("curves for originals taken from the Labels replications") {
  for (const Study& o : {Study{0.09, 0.05}, Study{0.21, 0.06}, Study{0.44, 0.04}}) {
    const DesignSpec c{o, {2.0}, 0.1, 0.8, Hypothesis::Hc};
    const auto grid = sigma_grid_from_relative(o);
    const auto curve = prs_curve(c, grid);
    REQUIRE(curve.size() == 60);
    CHECK(curve.front().relative_size == doctest::Approx(0.2));
    CHECK(curve.back().relative_size == doctest::Approx(20.0));
    for (std::size_t i = 0; i < curve.size(); ++i) {
      // Misleading evidence for H_c when H_d holds stays rare.
      CHECK(curve[i].prs_under_Hd < 0.05);
      if (i > 0) CHECK(curve[i].prs_under_Hc >= curve[i - 1].prs_under_Hc);
    }
  }
}

TEST_CASE("find_design") {
  // Exact crossing by bisection on the interval oracle, then the grid answer
  // must be the first grid point at or beyond it.
  const Study rep2{0.21, 0.06};
  for (Hypothesis h : {Hypothesis::Hc, Hypothesis::Hd}) {
    const DesignSpec spec{rep2, {2.0}, 0.1, 0.8, h};
    auto prs_at = [&](double rel) { return static_cast<double>(prs_oracle(rep2.se / std::sqrt(rel), spec, h)); };
    double lo = 0.01, hi = 20.0;
    REQUIRE(prs_at(hi) > 0.8);
    if (prs_at(lo) < 0.8) {
      for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (prs_at(mid) >= 0.8 ? hi : lo) = mid;
      }
    }
    const auto grid = sigma_grid_from_relative(rep2, 0.2, 20.0, 400);
    const DesignResult r = find_design(spec, grid);
    CHECK(r.attained);
    CHECK(r.relative_size >= hi * (1 - 1e-9));
    CHECK(r.relative_size <= hi * std::pow(100.0, 1.0 / 399) * (1 + 1e-9));
    CHECK(r.n_r == sigma_to_n(r.sigma_r));
    CHECK(r.relative_n == doctest::Approx(r.n_r / (4.0 / rep2.variance())).epsilon(1e-15));
  }

  // H_c curves level off below one, so a high target is out of reach.
  const DesignSpec greedy{kOriginal, {2.0}, 0.1, 0.99, Hypothesis::Hc};
  const auto grid = sigma_grid_from_relative(kOriginal);
  const DesignResult none = find_design(greedy, grid);
  CHECK_FALSE(none.attained);
  CHECK(none.relative_size == doctest::Approx(20.0));
  CHECK(prob_replication_success(kOriginal.se / 1e4, greedy) < 0.99);

  CHECK_THROWS_AS(find_design(greedy, std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(DesignSpec({kOriginal, {2.0}, 0.1, 1.0}).validate(), DomainError);
  CHECK_THROWS_AS(DesignSpec({kOriginal, {2.0}, 0.0, 0.8}).validate(), DomainError);
}

TEST_CASE("sample size conversions") {
  CHECK(sigma_to_n(0.05) == 1600);
  CHECK(n_to_sigma(4) == 1.0);
  CHECK(n_to_sigma(1577) == doctest::Approx(0.05036).epsilon(1e-4));
  CHECK(std::abs(n_to_sigma(1577) - 0.05) < 5e-4);
  for (int n = 2; n <= 200000; ++n) CHECK(sigma_to_n(n_to_sigma(n)) >= n);
  CHECK(sigma_to_n(100.0) == 2);
  CHECK_THROWS_AS(sigma_to_n(0.0), DomainError);
  CHECK_THROWS_AS(n_to_sigma(1), DomainError);
}
