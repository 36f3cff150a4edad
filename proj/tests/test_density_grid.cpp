#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pprep/density_grid.hpp"
#include "pprep/error.hpp"
#include "pprep/special_math.hpp"

using namespace pprep;

namespace {

DensityGrid normal_grid(double mean, double sd, double lo, double hi, int n) {
  DensityGrid g;
  g.axis1 = linspace(lo, hi, n);
  for (double x : g.axis1) g.logdens.push_back(special::normal_logpdf(x, mean, sd * sd));
  g.normalize();
  return g;
}

}  // namespace

TEST_CASE("summary of a standard normal grid") {
  const DensityGrid g = normal_grid(0.0, 1.0, -8.0, 8.0, 4001);
  const PosteriorSummary s = summarize(g, 0.95);
  CHECK(s.mean == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(std::abs(s.mean) < 1e-3);
  CHECK(s.sd == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(s.ci_lower == doctest::Approx(-1.959964).epsilon(1e-3));
  CHECK(s.ci_upper == doctest::Approx(1.959964).epsilon(1e-3));
  CHECK(std::abs(s.median) < 1e-3);
  CHECK(std::abs(s.mode) < 1e-6);
  CHECK(s.level == 0.95);
}

TEST_CASE("a near-delta grid collapses the interval around the atom") {
  const DensityGrid g = normal_grid(0.3, 1e-4, 0.0, 1.0, 100001);
  const PosteriorSummary s = summarize(g, 0.9);
  CHECK(s.ci_lower <= s.median);
  CHECK(s.median <= s.ci_upper);
  CHECK(s.ci_upper - s.ci_lower < 1e-3);
  CHECK(std::abs(s.mode - 0.3) < 1e-6);
}

TEST_CASE("summaries of random normal grids") {
  std::mt19937_64 rng(oracle::seed() + 20);
  std::uniform_real_distribution<double> um(-5.0, 5.0);
  std::uniform_real_distribution<double> us(0.05, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double m = um(rng), sd = us(rng);
    const DensityGrid g = normal_grid(m, sd, m - 9 * sd, m + 9 * sd, 2001);
    const PosteriorSummary s = summarize(g, 0.8);
    CHECK(std::abs(s.mean - m) < 1e-6 * sd);
    CHECK(s.sd == doctest::Approx(sd).epsilon(1e-4));
    CHECK(s.ci_lower <= s.median);
    CHECK(s.median <= s.ci_upper);
    CHECK(s.ci_upper - m == doctest::Approx(1.2815516 * sd).epsilon(1e-3));
  }
}

TEST_CASE("normalize and validate") {
  DensityGrid g;
  g.axis1 = linspace(0.0, 2.0, 201);
  g.logdens.assign(201, std::log(3.0));
  CHECK(g.integral() == doctest::Approx(6.0));
  CHECK_THROWS_AS(summarize(g), StateError);
  g.normalize();
  CHECK(g.normalized);
  CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.log_norm_correction == doctest::Approx(-std::log(6.0)));
  CHECK_NOTHROW(g.validate());

  DensityGrid bad = g;
  bad.logdens[5] += 1.0;
  CHECK_THROWS_AS(bad.validate(), StateError);

  DensityGrid unordered;
  unordered.axis1 = {0.0, 2.0, 1.0};
  unordered.logdens = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(unordered.validate(), DomainError);

  DensityGrid sized;
  sized.axis1 = {0.0, 1.0};
  sized.logdens = {0.0};
  CHECK_THROWS_AS(sized.validate(), DomainError);

  DensityGrid zero;
  zero.axis1 = {0.0, 1.0};
  zero.logdens = {-INFINITY, -INFINITY};
  CHECK_THROWS_AS(zero.normalize(), StateError);
}

TEST_CASE("two-dimensional grids") {
  DensityGrid g;
  g.axis1 = linspace(-6.0, 6.0, 301);
  g.axis2 = linspace(-6.0, 6.0, 201);
  for (double x : g.axis1) {
    for (double y : g.axis2) g.logdens.push_back(special::normal_logpdf(x, 0, 1) + special::normal_logpdf(y, 0, 1));
  }
  CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-6));
  g.normalize();
  CHECK_NOTHROW(g.validate());
  CHECK_THROWS_AS(summarize(g), StateError);
}

TEST_CASE("lattices") {
  const auto l = linspace(0.1, 0.7, 7);
  CHECK(l.front() == 0.1);
  CHECK(l.back() == 0.7);
  CHECK(l[3] == doctest::Approx(0.4));
  const auto g = logspace(0.2, 20.0, 3);
  CHECK(g.front() == 0.2);
  CHECK(g[1] == doctest::Approx(2.0));
  CHECK(g.back() == 20.0);
  CHECK_THROWS_AS(linspace(0, 1, 1), DomainError);
  CHECK_THROWS_AS(logspace(0, 1, 5), DomainError);
}

TEST_CASE("summarize rejects a bad level") {
  const DensityGrid g = normal_grid(0.0, 1.0, -5.0, 5.0, 101);
  CHECK_THROWS_AS(summarize(g, 1.0), DomainError);
  CHECK_THROWS_AS(summarize(g, 0.0), DomainError);
}
