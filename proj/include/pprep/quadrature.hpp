#pragma once

#include <functional>
#include <span>

namespace pprep::quadrature {

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_subdivisions = 200;

  // Throws DomainError when a tolerance is non-positive or
  // max_subdivisions < 1.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double err_estimate = 0.0;
  int subdivisions = 0;
};

using Integrand = std::function<double(double)>;

// Globally adaptive Gauss-Kronrod (7/15) integration over [a, b].
// The rule is open, so the integrand is never evaluated at a or b;
// integrable endpoint singularities are fine. Optional interior
// breakpoints seed the initial partition (useful for narrow peaks).
// Throws ConvergenceError if max_subdivisions is exhausted.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureSpec& spec = {},
                           std::span<const double> breakpoints = {});

// Integral over [0, 1].
QuadratureResult integrate_unit(const Integrand& f,
                                const QuadratureSpec& spec = {},
                                std::span<const double> breakpoints = {});

// Integral over [0, inf) via t = scale * u / (1 - u), u in [0, 1).
// `scale` should be of the order of where f carries its mass; breakpoints
// are given on the original t axis.
QuadratureResult integrate_semiinf(const Integrand& f,
                                   const QuadratureSpec& spec = {},
                                   double scale = 1.0,
                                   std::span<const double> breakpoints = {});

// Integrates exp(log_f) over [0, 1] after shifting by the largest log value
// found at the breakpoints and a coarse probe lattice, so that densities
// far below DBL_MIN still produce a finite log-integral. Returns
// log(integral) in `value`; `err_estimate` is relative to the integral.
QuadratureResult log_integrate_unit(const Integrand& log_f,
                                    const QuadratureSpec& spec = {},
                                    std::span<const double> breakpoints = {});

// Same as log_integrate_unit, over [0, inf).
QuadratureResult log_integrate_semiinf(const Integrand& log_f,
                                       const QuadratureSpec& spec = {},
                                       double scale = 1.0,
                                       std::span<const double> breakpoints = {});

}  // namespace pprep::quadrature
