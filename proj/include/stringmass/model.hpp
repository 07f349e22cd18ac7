#pragma once

// Physical constants of the string / point-mass system and the calibration of
// the boundary measure mu = alpha0 delta_0 + Lebesgue + alpha1 delta_1.
//
// Units: string length, tension and density are 1, so the wave speed is 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "stringmass/error.hpp"
#include "stringmass/numerics.hpp"

namespace stringmass {

struct ModelParams {
  double mu0 = 1.0;  ///< boundary mass ratio at x = 0
  double mu1 = 1.0;  ///< boundary mass ratio at x = 1
  double w2 = 1.0;   ///< restoring constant of the string (squared mass)
  double w02 = 1.0;  ///< spring frequency squared of the particle at x = 0
  double w12 = 1.0;  ///< spring frequency squared of the particle at x = 1

  double mu(int j) const { return j == 0 ? mu0 : mu1; }
  double spring(int j) const { return j == 0 ? w02 : w12; }
  /// Detuning w_j^2 - w^2 of the boundary spring against the string.
  double delta(int j) const { return spring(j) - w2; }
  double delta0() const { return delta(0); }
  double delta1() const { return delta(1); }

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(finite(mu0) && finite(mu1) && finite(w2) && finite(w02) && finite(w12)))
      throw Error(ErrorCode::InvalidArgument, "model parameters must be finite");
    if (!(mu0 > 0.0 && mu1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu0, mu1 must be > 0");
    if (!(w2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "w2 must be > 0");
    if (!(w02 >= 0.0 && w12 >= 0.0))
      throw Error(ErrorCode::InvalidArgument, "w02, w12 must be >= 0");
  }
};

/// How the calibration root at one endpoint was chosen.
struct EndpointBranch {
  int root_index = 0;        ///< position among the ascending positive roots
  int root_count = 1;        ///< number of positive roots of the calibration cubic
  int sign = 1;              ///< sign of (1 - alpha mu delta)
  bool continued = true;     ///< true: homotopy from delta = 0; false: fallback pick
  double cubic_residual = 0.0;     ///< |alpha (1 - alpha mu delta)^2 - mu| / mu
  double coupling_residual = 0.0;  ///< |A (1 - alpha mu delta) - mu delta|
  double probe_residual = 0.0;     ///< worst boundary-row mismatch of the probe check
  std::vector<double> candidates;  ///< all positive roots at the final delta
};

struct CalibratedMeasure {
  double alpha0 = 1.0, alpha1 = 1.0;  ///< atom weights
  double a0 = 0.0, a1 = 0.0;          ///< Robin couplings A(0), A(1)
  double c0 = 0.0, c1 = 0.0;          ///< Laplacian corrections C(j) = A(j) alpha_j
  EndpointBranch branch0, branch1;

  double alpha(int j) const { return j == 0 ? alpha0 : alpha1; }
  double coupling(int j) const { return j == 0 ? a0 : a1; }
  double correction(int j) const { return j == 0 ? c0 : c1; }
  const EndpointBranch& branch(int j) const { return j == 0 ? branch0 : branch1; }
};

namespace detail {

inline long double calibration_cubic(long double alpha, long double mu, long double k) {
  const long double s = 1.0L - k * alpha;
  return alpha * s * s - mu;
}

inline long double calibration_cubic_slope(long double alpha, long double k) {
  return (1.0L - k * alpha) * (1.0L - 3.0L * k * alpha);
}

inline double refine_calibration_root(double mu, double k, double lo, double hi) {
  auto f = [&](double a) {
    return static_cast<double>(calibration_cubic(a, mu, k));
  };
  auto df = [&](double a) { return static_cast<double>(calibration_cubic_slope(a, k)); };
  const double root = bisect(f, lo, hi, 1e-15);
  return newton_polish(f, df, root, lo, hi, 4);
}

}  // namespace detail

/// All positive roots of alpha (1 - alpha mu delta)^2 = mu, ascending.
///
/// With k = mu * delta the cubic alpha (1 - k alpha)^2 is monotone on alpha > 0
/// when k < 0. For k > 0 it rises to 4/(27k) at alpha = 1/(3k), falls to 0 at
/// alpha = 1/k and then grows without bound, so one, two (tangency) or three
/// positive roots exist. Each monotone piece is bracketed and bisected.
inline std::vector<double> calibrate_alpha(double mu, double delta, double tol = 1e-12) {
  if (!(mu > 0.0) || !std::isfinite(mu) || !std::isfinite(delta))
    throw Error(ErrorCode::InvalidArgument, "calibrate_alpha: mu must be > 0 and finite");
  if (!(tol > 0.0 && tol <= 1e-6))
    throw Error(ErrorCode::InvalidArgument, "calibrate_alpha: tol must lie in (0, 1e-6]");
  if (delta == 0.0) return {mu};

  const double k = mu * delta;
  std::vector<double> roots;
  auto p = [&](double a) { return static_cast<double>(detail::calibration_cubic(a, mu, k)); };

  if (k < 0.0) {
    roots.push_back(detail::refine_calibration_root(mu, k, 0.0, mu));
  } else {
    const double peak = 1.0 / (3.0 * k);
    const double trough = 1.0 / k;
    const double top = p(peak);
    if (top > 0.0) {
      roots.push_back(detail::refine_calibration_root(mu, k, 0.0, peak));
      roots.push_back(detail::refine_calibration_root(mu, k, peak, trough));
    } else if (top == 0.0) {
      roots.push_back(peak);
    }
    double hi = 2.0 * trough;
    for (int i = 0; i < 2000 && p(hi) <= 0.0; ++i) hi *= 2.0;
    if (!(p(hi) > 0.0)) throw Error(ErrorCode::NoRealPositiveRoot, "calibration cubic unbracketed");
    roots.push_back(detail::refine_calibration_root(mu, k, trough, hi));
  }

  for (double a : roots) {
    if (!(a > 0.0) || !std::isfinite(a))
      throw Error(ErrorCode::NoRealPositiveRoot, "non-positive calibration root");
    const long double r = detail::calibration_cubic(a, mu, k);
    if (std::abs(static_cast<double>(r)) > tol * mu)
      throw Error(ErrorCode::ToleranceNotMet,
                  "calibration root residual " + std::to_string(static_cast<double>(r)));
  }
  if (roots.empty()) throw Error(ErrorCode::NoRealPositiveRoot, "no positive calibration root");
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Robin coupling A = mu delta / (1 - alpha mu delta).
inline double coupling_A(double mu, double delta, double alpha) {
  const double denom = 1.0 - alpha * mu * delta;
  if (std::abs(denom) <= 1e-12)
    throw Error(ErrorCode::DegenerateBranch, "1 - alpha mu delta vanishes; coupling diverges");
  return mu * delta / denom;
}

/// Boundary-row coefficient obtained by pushing an eigenfunction with unit trace
/// through the measure calculus: atom value from the trace relation, RN slope at
/// the atom from the Robin row, and the derivative trace solved from
/// Delta_mu Y = lambda Y at the atom. Returns gamma(Y') (for j = 0; j = 1 is the
/// mirror image with the same magnitude).
inline double transformed_boundary_row(double alpha, double coupling, double lambda) {
  const double atom = 1.0 / (1.0 + alpha * coupling);
  const double rn_slope = coupling * atom;
  return alpha * lambda * atom / (1.0 + alpha * coupling) + rn_slope;
}

/// Largest mismatch between the transformed boundary row and the physical row
/// mu (lambda + delta), over three probe eigenvalues. Also checks that the Robin
/// row and the trace relation agree at the atom.
inline double probe_boundary_rows(double mu, double delta, double alpha, double coupling) {
  constexpr std::array<double, 3> probes{-2.5, 0.75, 4.0};
  double worst = 0.0;
  for (double lambda : probes) {
    const double physical = mu * (lambda + delta);
    const double got = transformed_boundary_row(alpha, coupling, lambda);
    worst = std::max(worst, std::abs(got - physical) / std::max(1.0, std::abs(physical)));
  }
  const double atom = 1.0 / (1.0 + alpha * coupling);
  const double robin = (1.0 - atom) / alpha - coupling * atom;
  return std::max(worst, std::abs(robin));
}

namespace detail {

struct EndpointCalibration {
  double alpha = 0.0;
  double coupling = 0.0;
  EndpointBranch branch;
};

inline constexpr double kProbeTolerance = 1e-10;
inline constexpr int kHomotopySteps = 8;

inline EndpointCalibration finish_endpoint(double mu, double delta, double alpha,
                                           const std::vector<double>& roots, bool continued) {
  EndpointCalibration out;
  out.alpha = alpha;
  out.coupling = coupling_A(mu, delta, alpha);
  const double s = 1.0 - alpha * mu * delta;
  out.branch.sign = s > 0.0 ? 1 : -1;
  out.branch.continued = continued;
  out.branch.root_count = static_cast<int>(roots.size());
  out.branch.root_index =
      static_cast<int>(std::find(roots.begin(), roots.end(), alpha) - roots.begin());
  out.branch.candidates = roots;
  out.branch.cubic_residual = std::abs(alpha * s * s - mu) / mu;
  out.branch.coupling_residual = std::abs(out.coupling * s - mu * delta);
  out.branch.probe_residual = probe_boundary_rows(mu, delta, alpha, out.coupling);
  return out;
}

inline EndpointCalibration calibrate_endpoint(double mu, double delta, double tol) {
  if (delta == 0.0) {
    EndpointCalibration out;
    out.alpha = mu;
    out.coupling = 0.0;
    out.branch.candidates = {mu};
    return out;
  }

  // Follow the root that starts at alpha = mu when delta = 0.
  bool continued = true;
  double tracked = mu;
  std::vector<double> roots;
  for (int step = 1; step <= kHomotopySteps && continued; ++step) {
    const double d = delta * step / kHomotopySteps;
    roots = calibrate_alpha(mu, d, tol);
    const double k = mu * d;
    auto nearest = std::min_element(roots.begin(), roots.end(), [&](double x, double y) {
      return std::abs(x - tracked) < std::abs(y - tracked);
    });
    // For k > 0 the continued root lives left of the cubic's local maximum;
    // once that piece loses its root the branch has merged and is gone.
    if (k > 0.0 && !(*nearest < 1.0 / (3.0 * k))) {
      continued = false;
      break;
    }
    for (double r : roots)
      if (r != *nearest && std::abs(r - *nearest) <= 1e-9 * std::max(1.0, r)) continued = false;
    tracked = *nearest;
  }
  if (continued) {
    roots = calibrate_alpha(mu, delta, tol);
    auto out = finish_endpoint(mu, delta, tracked, roots, true);
    if (out.branch.probe_residual <= kProbeTolerance) return out;
  }

  // Fallback: smallest positive root that passes the probe check.
  roots = calibrate_alpha(mu, delta, tol);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (i + 1 < roots.size() &&
        std::abs(roots[i + 1] - roots[i]) <= 1e-9 * std::max(1.0, roots[i]))
      throw Error(ErrorCode::BranchAmbiguity, "calibration roots collide");
    const double denom = 1.0 - roots[i] * mu * delta;
    if (std::abs(denom) <= 1e-12) continue;
    auto out = finish_endpoint(mu, delta, roots[i], roots, false);
    if (out.branch.probe_residual <= kProbeTolerance) return out;
  }
  throw Error(ErrorCode::ValidationFailed, "no calibration root reproduces the boundary rows");
}

}  // namespace detail

/// Fixes alpha_j, A(j) and C(j) from the physical constants. The root of the
/// calibration cubic is followed from delta = 0 in eight steps; if that branch
/// disappears the smallest root passing the probe check is used instead.
inline CalibratedMeasure calibrate(const ModelParams& params, double tol = 1e-12) {
  params.validate();
  const auto e0 = detail::calibrate_endpoint(params.mu0, params.delta0(), tol);
  const auto e1 = detail::calibrate_endpoint(params.mu1, params.delta1(), tol);
  CalibratedMeasure cal;
  cal.alpha0 = e0.alpha;
  cal.alpha1 = e1.alpha;
  cal.a0 = e0.coupling;
  cal.a1 = e1.coupling;
  cal.c0 = cal.a0 * cal.alpha0;
  cal.c1 = cal.a1 * cal.alpha1;
  cal.branch0 = e0.branch;
  cal.branch1 = e1.branch;
  return cal;
}

}  // namespace stringmass
