#include "pprep/density_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pprep/error.hpp"

namespace pprep {

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.size() < 2) throw DomainError(std::string(name) + " needs at least two points");
  for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
    if (!(axis[i] < axis[i + 1])) {
      throw DomainError(std::string(name) + " must be strictly increasing");
    }
  }
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  }
  return s;
}

// Inverse of the piecewise-quadratic CDF implied by a piecewise-linear density.
double quantile(std::span<const double> x, std::span<const double> f,
                std::span<const double> cdf, double p) {
  const double total = cdf.back();
  const double target = p * total;
  auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.begin()) return x.front();
  if (it == cdf.end()) return x.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf.begin()) - 1;
  const double h = x[i + 1] - x[i];
  const double need = target - cdf[i];
  const double slope = (f[i + 1] - f[i]) / h;
  double t;
  if (std::abs(slope) * h < 1e-12 * std::max(f[i], f[i + 1])) {
    t = f[i] > 0.0 ? need / f[i] : 0.5 * h;
  } else {
    // 0.5 slope t^2 + f_i t - need = 0, root in [0, h].
    const double disc = std::max(0.0, f[i] * f[i] + 2.0 * slope * need);
    t = 2.0 * need / (f[i] + std::sqrt(disc));
  }
  return x[i] + std::clamp(t, 0.0, h);
}

}  // namespace

void DensityGrid::validate() const {
  check_axis(axis1, "axis1");
  std::size_t expected = axis1.size();
  if (is_2d()) {
    check_axis(axis2, "axis2");
    expected *= axis2.size();
  }
  if (logdens.size() != expected) throw DomainError("logdens size does not match the lattice");
  if (normalized) {
    const double total = integral();
    if (!(std::abs(total - 1.0) <= 1e-6)) {
      throw StateError("grid flagged normalized but integrates to " + std::to_string(total));
    }
  }
}

double DensityGrid::integral() const {
  if (!is_2d()) {
    std::vector<double> f(logdens.size());
    std::transform(logdens.begin(), logdens.end(), f.begin(), [](double v) { return std::exp(v); });
    return trapezoid(axis1, f);
  }
  const std::size_t n2 = axis2.size();
  std::vector<double> inner(axis1.size());
  std::vector<double> row(n2);
  for (std::size_t i = 0; i < axis1.size(); ++i) {
    for (std::size_t j = 0; j < n2; ++j) row[j] = std::exp(logdens[i * n2 + j]);
    inner[i] = trapezoid(axis2, row);
  }
  return trapezoid(axis1, inner);
}

void DensityGrid::normalize() {
  const double total = integral();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw StateError("cannot normalize a grid with integral " + std::to_string(total));
  }
  const double shift = std::log(total);
  for (double& v : logdens) v -= shift;
  log_norm_correction -= shift;
  normalized = true;
}

PosteriorSummary summarize(const DensityGrid& grid, double level) {
  if (grid.is_2d()) throw StateError("summarize needs a 1-D grid");
  if (!grid.normalized) throw StateError("summarize needs a normalized grid");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("interval level must lie in (0, 1)");
  grid.validate();

  const auto& x = grid.axis1;
  const std::size_t n = x.size();
  std::vector<double> f(n);
  std::transform(grid.logdens.begin(), grid.logdens.end(), f.begin(),
                 [](double v) { return std::exp(v); });

  std::vector<double> xf(n);
  for (std::size_t i = 0; i < n; ++i) xf[i] = x[i] * f[i];
  const double total = trapezoid(x, f);
  const double mean = trapezoid(x, xf) / total;
  for (std::size_t i = 0; i < n; ++i) xf[i] = (x[i] - mean) * (x[i] - mean) * f[i];
  const double var = std::max(0.0, trapezoid(x, xf) / total);

  std::vector<double> cdf(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f[i - 1] + f[i]);
  }

  const auto imax = static_cast<std::size_t>(
      std::max_element(grid.logdens.begin(), grid.logdens.end()) - grid.logdens.begin());
  double mode = x[imax];
  if (imax > 0 && imax + 1 < n) {
    // Vertex of the parabola through the three log-density points.
    const double x0 = x[imax - 1], x1 = x[imax], x2 = x[imax + 1];
    const double y0 = grid.logdens[imax - 1], y1 = grid.logdens[imax], y2 = grid.logdens[imax + 1];
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (den != 0.0 && std::isfinite(num / den)) mode = std::clamp(x1 - 0.5 * num / den, x0, x2);
  }

  const double tail = 0.5 * (1.0 - level);
  PosteriorSummary s{};
  s.mean = mean;
  s.sd = std::sqrt(var);
  s.median = quantile(x, f, cdf, 0.5);
  s.ci_lower = quantile(x, f, cdf, tail);
  s.ci_upper = quantile(x, f, cdf, 1.0 - tail);
  s.level = level;
  s.mode = mode;
  return s;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw DomainError("linspace needs at least two points");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > 0.0)) throw DomainError("logspace needs positive bounds");
  std::vector<double> out = linspace(std::log(lo), std::log(hi), n);
  for (double& v : out) v = std::exp(v);
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace pprep
