#include "pprep/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "pprep/error.hpp"

namespace pprep::quadrature {

namespace {

// Kronrod 15-point abscissae on [-1, 1] (positive half, descending) with the
// embedded 7-point Gauss rule living on the odd indices.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Panel {
  double a;
  double b;
  double value;
  double error;
};

struct ByError {
  bool operator()(const Panel& l, const Panel& r) const {
    return l.error < r.error;
  }
};

double checked(const Integrand& f, double x) {
  const double y = f(x);
  if (std::isnan(y) || std::isinf(y)) {
    throw DomainError("integrand is not finite at x = " + std::to_string(x));
  }
  return y;
}

Panel kronrod15(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double f_center = checked(f, center);
  double gauss = f_center * kGaussWeights[3];
  double kronrod = f_center * kKronrodWeights[7];
  double abs_kronrod = std::abs(kronrod);

  std::array<double, 7> f_left{};
  std::array<double, 7> f_right{};
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    f_left[j] = checked(f, center - dx);
    f_right[j] = checked(f, center + dx);
    const double pair = f_left[j] + f_right[j];
    kronrod += kKronrodWeights[j] * pair;
    abs_kronrod += kKronrodWeights[j] * (std::abs(f_left[j]) + std::abs(f_right[j]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }

  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::abs(f_center - mean);
  for (std::size_t j = 0; j < 7; ++j) {
    asc += kKronrodWeights[j] * (std::abs(f_left[j] - mean) + std::abs(f_right[j] - mean));
  }

  const double abs_half = std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  const double resasc = asc * abs_half;
  const double resabs = abs_kronrod * abs_half;
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  return {a, b, kronrod * half, err};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw DomainError("quadrature tolerances must be positive");
  }
  if (max_subdivisions < 1) {
    throw DomainError("max_subdivisions must be at least 1");
  }
}

QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureSpec& spec,
                           std::span<const double> breakpoints) {
  spec.validate();
  if (!(a < b)) throw DomainError("integration bounds must satisfy a < b");

  std::vector<double> cuts{a};
  for (double p : breakpoints) {
    if (p > a && p < b) cuts.push_back(p);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Panel, std::vector<Panel>, ByError> queue;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p = kronrod15(f, cuts[i], cuts[i + 1]);
    total += p.value;
    total_err += p.error;
    queue.push(p);
  }

  int subdivisions = 0;
  auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };

  while (total_err > tolerance()) {
    if (subdivisions >= spec.max_subdivisions) {
      throw ConvergenceError("adaptive quadrature did not converge within " +
                                 std::to_string(spec.max_subdivisions) + " subdivisions",
                             total, total_err);
    }
    Panel worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 100.0 * kEps * std::max(std::abs(worst.a), std::abs(worst.b))) {
      throw ConvergenceError("adaptive quadrature hit round-off limit", total, total_err);
    }
    queue.pop();
    Panel left = kronrod15(f, worst.a, mid);
    Panel right = kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++subdivisions;
  }

  // Re-sum in left-to-right order so the result does not depend on the
  // history of refinements.
  std::vector<Panel> panels;
  panels.reserve(queue.size());
  while (!queue.empty()) {
    panels.push_back(queue.top());
    queue.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
  QuadratureResult out;
  for (const Panel& p : panels) {
    out.value += p.value;
    out.err_estimate += p.error;
  }
  out.subdivisions = subdivisions;
  return out;
}

QuadratureResult integrate_unit(const Integrand& f, const QuadratureSpec& spec,
                                std::span<const double> breakpoints) {
  return integrate(f, 0.0, 1.0, spec, breakpoints);
}

namespace {

std::vector<double> to_unit_axis(std::span<const double> breakpoints, double scale) {
  std::vector<double> u;
  u.reserve(breakpoints.size());
  for (double t : breakpoints) {
    if (t > 0.0 && std::isfinite(t)) u.push_back(t / (scale + t));
  }
  return u;
}

}  // namespace

QuadratureResult integrate_semiinf(const Integrand& f, const QuadratureSpec& spec,
                                   double scale, std::span<const double> breakpoints) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("semi-infinite quadrature scale must be positive and finite");
  }
  const std::vector<double> cuts = to_unit_axis(breakpoints, scale);
  auto mapped = [&](double u) {
    const double one_minus = 1.0 - u;
    const double t = scale * u / one_minus;
    const double jac = scale / (one_minus * one_minus);
    const double y = f(t);
    // f decays at infinity; guard 0 * inf near u = 1.
    if (y == 0.0) return 0.0;
    return y * jac;
  };
  return integrate(mapped, 0.0, 1.0, spec, cuts);
}

namespace {

constexpr int kProbeCount = 33;

template <class Map>
double probe_max(const Integrand& log_f, std::span<const double> breakpoints, Map to_axis) {
  double m = -std::numeric_limits<double>::infinity();
  auto consider = [&](double x) {
    const double v = log_f(x);
    if (!std::isnan(v)) m = std::max(m, v);
  };
  for (int i = 0; i < kProbeCount; ++i) consider(to_axis((i + 0.5) / kProbeCount));
  for (double p : breakpoints) consider(p);
  return m;
}

QuadratureResult finish_log(const QuadratureResult& shifted, double shift) {
  QuadratureResult out = shifted;
  if (shifted.value <= 0.0) {
    out.value = -std::numeric_limits<double>::infinity();
    out.err_estimate = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = std::log(shifted.value) + shift;
  out.err_estimate = shifted.err_estimate / shifted.value;
  return out;
}

}  // namespace

QuadratureResult log_integrate_unit(const Integrand& log_f, const QuadratureSpec& spec,
                                    std::span<const double> breakpoints) {
  std::vector<double> inside;
  for (double p : breakpoints) {
    if (p > 0.0 && p < 1.0) inside.push_back(p);
  }
  const double shift = probe_max(log_f, inside, [](double u) { return u; });
  if (!std::isfinite(shift)) {
    if (shift > 0) throw DomainError("log-integrand is +infinity at a probe point");
    return {-std::numeric_limits<double>::infinity(), 0.0, 0};
  }
  auto f = [&](double x) { return std::exp(log_f(x) - shift); };
  return finish_log(integrate_unit(f, spec, inside), shift);
}

QuadratureResult log_integrate_semiinf(const Integrand& log_f, const QuadratureSpec& spec,
                                       double scale, std::span<const double> breakpoints) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("semi-infinite quadrature scale must be positive and finite");
  }
  std::vector<double> inside;
  for (double p : breakpoints) {
    if (p > 0.0 && std::isfinite(p)) inside.push_back(p);
  }
  const double shift =
      probe_max(log_f, inside, [scale](double u) { return scale * u / (1.0 - u); });
  if (!std::isfinite(shift)) {
    if (shift > 0) throw DomainError("log-integrand is +infinity at a probe point");
    return {-std::numeric_limits<double>::infinity(), 0.0, 0};
  }
  auto f = [&](double t) { return std::exp(log_f(t) - shift); };
  return finish_log(integrate_semiinf(f, spec, scale, inside), shift);
}

}  // namespace pprep::quadrature
