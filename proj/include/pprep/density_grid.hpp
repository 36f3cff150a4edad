#pragma once

#include <span>
#include <vector>

namespace pprep {

/// Tabulated log-density over a 1-D lattice, or a 2-D lattice stored
/// row-major (axis1 outer, axis2 inner).
struct DensityGrid {
  std::vector<double> axis1;
  std::vector<double> axis2;  // empty for 1-D grids
  std::vector<double> logdens;
  bool normalized = false;
  // Log of the factor applied by normalize(); zero if never applied.
  double log_norm_correction = 0.0;

  bool is_2d() const { return !axis2.empty(); }

  /// Checks lattice ordering and sizes; for normalized grids also that the
  /// trapezoid integral lies within 1e-6 of one.
  void validate() const;

  /// Trapezoid integral of exp(logdens) over the lattice.
  double integral() const;

  /// Rescales so that integral() == 1 and sets `normalized`.
  void normalize();
};

struct PosteriorSummary {
  double mean;
  double sd;
  double median;
  double ci_lower;
  double ci_upper;
  double level;
  double mode;
};

/// Trapezoid moments, grid mode (parabolic refinement), and equal-tailed
/// interval of a normalized 1-D grid. Throws StateError on unnormalized or
/// 2-D grids.
PosteriorSummary summarize(const DensityGrid& grid, double level = 0.95);

/// Equally spaced lattice of `n` points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);
std::vector<double> logspace(double lo, double hi, int n);

}  // namespace pprep
