#include "pprep/design.hpp"

#include <algorithm>
#include <cmath>

#include "pprep/error.hpp"
#include "pprep/special_math.hpp"

namespace pprep::design {

void DesignSpec::validate() const {
  original.validate();
  ui.validate();
  if (!(gamma > 0.0)) throw DomainError("success threshold gamma must be positive");
  if (!(target_power > 0.0 && target_power < 1.0)) {
    throw DomainError("target power must lie in (0, 1)");
  }
  if (hypothesis != Hypothesis::Hc && hypothesis != Hypothesis::Hd) {
    throw DomainError("design hypothesis must be Hc or Hd");
  }
}

double success_threshold_X(double sigma_r, const Study& original, const UnitInformation& ui,
                           double gamma) {
  if (!(sigma_r > 0.0)) throw DomainError("replication standard error must be positive");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const double var_o = original.variance();
  const double var_r = sigma_r * sigma_r;
  const double s = ui.shrinkage(var_o);
  const double under_d = var_r + ui.kappa2;
  const double under_c = var_r + s * var_o;
  const double gap = ui.kappa2 - s * var_o;
  return under_d * under_c / gap *
         (std::log(gamma * gamma) - std::log(under_c / under_d) -
          s * s * original.estimate * original.estimate / (s * var_o - ui.kappa2));
}

double success_threshold_X(double sigma_r, const DesignSpec& spec) {
  const double g = spec.hypothesis == Hypothesis::Hc ? spec.gamma : 1.0 / spec.gamma;
  return success_threshold_X(sigma_r, spec.original, spec.ui, g);
}

double success_center(double sigma_r, const Study& original, const UnitInformation& ui) {
  return original.estimate * (sigma_r * sigma_r + ui.kappa2) / ui.kappa2;
}

NormalParams predictive(double sigma_r, const Study& original, const UnitInformation& ui,
                        Hypothesis truth) {
  const double var_r = sigma_r * sigma_r;
  const double s = ui.shrinkage(original.variance());
  switch (truth) {
    case Hypothesis::Hc: return {s * original.estimate, var_r + s * original.variance()};
    case Hypothesis::Hd: return {0.0, var_r + ui.kappa2};
    default: throw DomainError("predictive distribution defined for Hc and Hd only");
  }
}

double quadratic_region_probability(double X, double center, double mean, double variance) {
  if (!(variance > 0.0)) throw DomainError("variance must be positive");
  if (!(X > 0.0)) return 0.0;
  const double shift = mean - center;
  return special::noncentral_chisq1_cdf(X / variance, shift * shift / variance);
}

double prob_replication_success(double sigma_r, const DesignSpec& spec, Hypothesis truth) {
  spec.validate();
  const double X = success_threshold_X(sigma_r, spec);
  const double center = success_center(sigma_r, spec.original, spec.ui);
  const NormalParams pred = predictive(sigma_r, spec.original, spec.ui, truth);
  const double inside = quadratic_region_probability(X, center, pred.mean, pred.variance);
  // Strong evidence for H_d is the complement of the (1/gamma) interval.
  return spec.hypothesis == Hypothesis::Hc ? inside : 1.0 - inside;
}

double prob_replication_success(double sigma_r, const DesignSpec& spec) {
  return prob_replication_success(sigma_r, spec, spec.hypothesis);
}

std::vector<CurvePoint> prs_curve(const DesignSpec& spec, std::span<const double> sigma_grid) {
  std::vector<CurvePoint> out;
  out.reserve(sigma_grid.size());
  const double var_o = spec.original.variance();
  for (double s : sigma_grid) {
    out.push_back({var_o / (s * s), s, prob_replication_success(s, spec, Hypothesis::Hc),
                   prob_replication_success(s, spec, Hypothesis::Hd)});
  }
  std::sort(out.begin(), out.end(), [](const CurvePoint& l, const CurvePoint& r) {
    return l.relative_size < r.relative_size;
  });
  return out;
}

DesignResult find_design(const DesignSpec& spec, std::span<const double> sigma_grid) {
  spec.validate();
  if (sigma_grid.empty()) throw DomainError("design search needs a nonempty sigma grid");
  for (double s : sigma_grid) {
    if (!(s > 0.0)) throw DomainError("sigma grid entries must be positive");
  }
  const std::vector<CurvePoint> curve = prs_curve(spec, sigma_grid);
  auto prs_target = [&](const CurvePoint& p) {
    return spec.hypothesis == Hypothesis::Hc ? p.prs_under_Hc : p.prs_under_Hd;
  };
  auto hit = std::find_if(curve.begin(), curve.end(),
                          [&](const CurvePoint& p) { return prs_target(p) >= spec.target_power; });
  const bool attained = hit != curve.end();
  const CurvePoint& chosen = attained ? *hit : curve.back();
  const int n_r = sigma_to_n(chosen.sigma_r);
  const double n_o = 4.0 / spec.original.variance();
  return {chosen.sigma_r,        n_r,
          chosen.relative_size,  n_r / n_o,
          chosen.prs_under_Hc,   chosen.prs_under_Hd,
          attained};
}

std::vector<double> sigma_grid_from_relative(const Study& original, double lo, double hi,
                                             int points) {
  if (!(lo > 0.0 && hi > lo)) throw DomainError("relative size range must satisfy 0 < lo < hi");
  std::vector<double> rel = logspace(lo, hi, points);
  for (double& r : rel) r = original.se / std::sqrt(r);
  return rel;
}

int sigma_to_n(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("standard error must be positive");
  // Absorb representation error so 4 / 0.05^2 maps to 1600, not 1601.
  const double raw = 4.0 / (sigma * sigma);
  const double n = std::ceil(raw * (1.0 - 1e-12));
  return std::max(2, static_cast<int>(n));
}

double n_to_sigma(int n) {
  if (n < 2) throw DomainError("sample size must be at least 2");
  return std::sqrt(4.0 / n);
}

}  // namespace pprep::design
