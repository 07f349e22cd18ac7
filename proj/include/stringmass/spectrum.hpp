#pragma once

// Normal modes of the string with dynamical endpoints.
//
// Separation of variables gives X'' = lambda X with the eigenvalue inside the
// boundary rows
//   X'(0) =  mu0 (lambda + delta0) X(0),
//   X'(1) = -mu1 (lambda + delta1) X(1).
// Three families exist: lambda = -omega^2 < 0 (infinitely many, oscillatory),
// lambda = +omega^2 > 0 (finitely many, exponential) and an affine zero mode on
// a codimension-one parameter locus. Each X_n becomes an element Y_n of the
// orthonormal basis of L^2_mu once its atom values are fixed by the Robin
// relation and it is normalised.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stringmass/error.hpp"
#include "stringmass/model.hpp"
#include "stringmass/mufunc.hpp"
#include "stringmass/numerics.hpp"
#include "stringmass/parallel.hpp"

namespace stringmass {

enum class ModeClass { Positive, Zero, Negative };  // sign of lambda

inline const char* to_string(ModeClass c) {
  switch (c) {
    case ModeClass::Positive: return "+";
    case ModeClass::Zero: return "0";
    case ModeClass::Negative: return "-";
  }
  return "?";
}

/// Closed-form eigenfunction X with its coefficients as printed:
///   negative:  X = omega cos(omega x) + mu0 (delta0 - omega^2) sin(omega x)
///   positive:  X = (omega + m0) e^{omega x} + (omega - m0) e^{-omega x},  m0 = mu0 (omega^2 + delta0)
///   zero:      X = 1 + mu0 delta0 x
struct ClosedForm {
  ModeClass cls = ModeClass::Negative;
  double omega = 0.0;
  double a = 0.0;
  double b = 0.0;

  double lambda() const {
    switch (cls) {
      case ModeClass::Positive: return omega * omega;
      case ModeClass::Zero: return 0.0;
      case ModeClass::Negative: return -omega * omega;
    }
    return 0.0;
  }

  double value(double x) const {
    switch (cls) {
      case ModeClass::Negative: return a * std::cos(omega * x) + b * std::sin(omega * x);
      case ModeClass::Positive: return a * std::exp(omega * x) + b * std::exp(-omega * x);
      case ModeClass::Zero: return a + b * x;
    }
    return 0.0;
  }

  double slope(double x) const {
    switch (cls) {
      case ModeClass::Negative:
        return omega * (-a * std::sin(omega * x) + b * std::cos(omega * x));
      case ModeClass::Positive:
        return omega * (a * std::exp(omega * x) - b * std::exp(-omega * x));
      case ModeClass::Zero: return b;
    }
    return 0.0;
  }

  double curvature(double x) const { return lambda() * value(x); }

  /// int_0^1 X^2 dx in closed form.
  double square_integral() const {
    const double w = omega;
    switch (cls) {
      case ModeClass::Negative: {
        const double s2 = std::sin(2.0 * w) / (4.0 * w);
        const double s = std::sin(w);
        return a * a * (0.5 + s2) + b * b * (0.5 - s2) + a * b * s * s / w;
      }
      case ModeClass::Positive:
        return a * a * std::expm1(2.0 * w) / (2.0 * w) - b * b * std::expm1(-2.0 * w) / (2.0 * w) +
               2.0 * a * b;
      case ModeClass::Zero: return a * a + a * b + b * b / 3.0;
    }
    return 0.0;
  }
};

struct Mode {
  int index = 0;  ///< < 0: positive lambda, 0: zero mode, > 0: negative lambda
  ModeClass cls = ModeClass::Negative;
  double lambda = 0.0;
  double omega = 0.0;
  double g = 1.0;                ///< normalisation, <Y, Y>_mu = 1
  double g_printed = std::nan("");  ///< closed-form g for the oscillatory family
  int bracket = -1;              ///< floor(omega / pi) for the oscillatory family
  ClosedForm shape;

  double value(double x) const { return shape.value(x); }
  double slope(double x) const { return shape.slope(x); }
};

// -- secular functions ------------------------------------------------------

/// (omega^2 - mu0 mu1 (omega^2 - d0)(omega^2 - d1)) sin(omega)
///   + (mu0 (omega^2 - d0) + mu1 (omega^2 - d1)) omega cos(omega)
inline double secular_negative(double omega, const ModelParams& p) {
  const double w2 = omega * omega;
  const double e0 = w2 - p.delta0(), e1 = w2 - p.delta1();
  return (w2 - p.mu0 * p.mu1 * e0 * e1) * std::sin(omega) +
         (p.mu0 * e0 + p.mu1 * e1) * omega * std::cos(omega);
}

inline double secular_negative_slope(double omega, const ModelParams& p) {
  const double w2 = omega * omega;
  const double e0 = w2 - p.delta0(), e1 = w2 - p.delta1();
  const double pp = w2 - p.mu0 * p.mu1 * e0 * e1;
  const double dpp = 2.0 * omega - p.mu0 * p.mu1 * 2.0 * omega * (e0 + e1);
  const double q = p.mu0 * e0 + p.mu1 * e1;
  const double dq = 2.0 * omega * (p.mu0 + p.mu1);
  const double s = std::sin(omega), c = std::cos(omega);
  return dpp * s + pp * c + (dq * omega + q) * c - q * omega * s;
}

/// Limit of secular_negative(omega) / omega as omega -> 0:
/// -((1 + mu0 d0)(1 + mu1 d1) - 1). It vanishes exactly on the zero-mode locus.
inline double secular_negative_origin_slope(const ModelParams& p) {
  return -((1.0 + p.mu0 * p.delta0()) * (1.0 + p.mu1 * p.delta1()) - 1.0);
}

/// e^{-omega}(omega - m0)(omega - m1) - e^{omega}(omega + m0)(omega + m1),
/// m_j = mu_j (omega^2 + d_j).
inline double secular_positive(double omega, const ModelParams& p) {
  const double m0 = p.mu0 * (omega * omega + p.delta0());
  const double m1 = p.mu1 * (omega * omega + p.delta1());
  return std::exp(-omega) * (omega - m0) * (omega - m1) -
         std::exp(omega) * (omega + m0) * (omega + m1);
}

inline double secular_positive_slope(double omega, const ModelParams& p) {
  const double m0 = p.mu0 * (omega * omega + p.delta0());
  const double m1 = p.mu1 * (omega * omega + p.delta1());
  const double a = omega - m0, b = omega - m1, c = omega + m0, d = omega + m1;
  const double da = 1.0 - 2.0 * p.mu0 * omega, db = 1.0 - 2.0 * p.mu1 * omega;
  const double dc = 1.0 + 2.0 * p.mu0 * omega, dd = 1.0 + 2.0 * p.mu1 * omega;
  return std::exp(-omega) * (-a * b + da * b + a * db) -
         std::exp(omega) * (c * d + dc * d + c * dd);
}

// -- closed forms -------------------------------------------------------------

inline ClosedForm eigenfunction_closed_form(ModeClass cls, double omega, const ModelParams& p) {
  ClosedForm f;
  f.cls = cls;
  f.omega = omega;
  switch (cls) {
    case ModeClass::Negative:
      f.a = omega;
      f.b = p.mu0 * (p.delta0() - omega * omega);
      break;
    case ModeClass::Positive: {
      const double m0 = p.mu0 * (omega * omega + p.delta0());
      f.a = omega + m0;
      f.b = omega - m0;
      break;
    }
    case ModeClass::Zero:
      f.omega = 0.0;
      f.a = 1.0;
      f.b = p.mu0 * p.delta0();
      break;
  }
  return f;
}

/// Residuals of the two physical boundary rows for a closed-form eigenfunction.
inline std::pair<double, double> boundary_rows(const ClosedForm& f, const ModelParams& p) {
  const double lambda = f.lambda();
  return {f.slope(0.0) - p.mu0 * (lambda + p.delta0()) * f.value(0.0),
          f.slope(1.0) + p.mu1 * (lambda + p.delta1()) * f.value(1.0)};
}

// -- zero mode ----------------------------------------------------------------

/// Affine zero mode, present iff (1 + mu0 d0)(1 + mu1 d1) = 1 (to 1e-12).
inline std::optional<Mode> zero_mode(const ModelParams& p) {
  const double defect = (1.0 + p.mu0 * p.delta0()) * (1.0 + p.mu1 * p.delta1()) - 1.0;
  if (std::abs(defect) > 1e-12) return std::nullopt;
  Mode m;
  m.index = 0;
  m.cls = ModeClass::Zero;
  m.lambda = 0.0;
  m.omega = 0.0;
  m.shape = eigenfunction_closed_form(ModeClass::Zero, 0.0, p);
  return m;
}

// -- root finding -------------------------------------------------------------

namespace detail {

inline constexpr int kScanPerPi = 4096;
inline constexpr int kScanIntervals = 20;

/// secular_negative / omega, continuous at the origin.
inline double reduced_negative(double omega, const ModelParams& p) {
  if (omega == 0.0) return secular_negative_origin_slope(p);
  return secular_negative(omega, p) / omega;
}

inline double reduced_positive(double omega, const ModelParams& p) {
  if (omega == 0.0) return 2.0 * secular_negative_origin_slope(p);
  return secular_positive(omega, p) / omega;
}

inline double polish_negative(double lo, double hi, const ModelParams& p) {
  auto f = [&](double w) { return secular_negative(w, p); };
  auto df = [&](double w) { return secular_negative_slope(w, p); };
  const double root = bisect(f, lo, hi, 1e-14);
  const double polished = newton_polish(f, df, root, lo, hi, 3);
  const double scale = std::max(1.0, std::abs(df(polished)) * polished);
  if (std::abs(f(polished)) > 1e-12 * scale)
    throw Error(ErrorCode::ToleranceNotMet, "oscillatory root did not converge");
  return polished;
}

inline double polish_positive(double lo, double hi, const ModelParams& p) {
  auto f = [&](double w) { return secular_positive(w, p); };
  auto df = [&](double w) { return secular_positive_slope(w, p); };
  const double root = bisect(f, lo, hi, 1e-14);
  return newton_polish(f, df, root, lo, hi, 3);
}

/// Sign-change scan of g over [lo, hi] in `steps` uniform pieces; every change
/// is refined with `refine`. Roots landing exactly on a sample are kept as is.
template <class G, class Refine>
std::vector<double> scan_roots(G&& g, double lo, double hi, std::size_t steps, Refine&& refine) {
  std::vector<double> xs(steps + 1), gs(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps);
    gs[i] = g(xs[i]);
  }
  std::vector<double> roots;
  for (std::size_t i = 0; i < steps; ++i) {
    if (gs[i + 1] == 0.0) {
      if (xs[i + 1] > 0.0) roots.push_back(xs[i + 1]);
    } else if (gs[i] != 0.0 && ((gs[i] > 0.0) != (gs[i + 1] > 0.0))) {
      roots.push_back(refine(xs[i], xs[i + 1]));
    }
  }
  return roots;
}

}  // namespace detail

/// Oscillatory roots together with the bracket bookkeeping of the dense scan.
struct NegativeRootSearch {
  std::vector<double> omega;         ///< ascending, > 0
  std::vector<int> bracket_counts;   ///< roots found in (k pi, (k+1) pi) by the dense scan
  int n0 = -1;                       ///< last scanned bracket whose count differs from 1
  int scanned_brackets = 0;
};

/// Finds the first `count` roots of secular_negative. The range [0, K pi] is
/// scanned densely (K >= 20, extended while irregular brackets sit near its end);
/// beyond it every bracket (k pi, (k+1) pi) holds exactly one root, which is
/// bisected directly.
inline NegativeRootSearch search_negative_roots(const ModelParams& p, int count) {
  p.validate();
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 1");
  constexpr double pi = std::numbers::pi;
  NegativeRootSearch out;

  int brackets = detail::kScanIntervals;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 50) throw Error(ErrorCode::BracketCollision, "irregular brackets do not settle");
    out.omega = detail::scan_roots(
        [&](double w) { return detail::reduced_negative(w, p); }, 0.0, brackets * pi,
        static_cast<std::size_t>(brackets) * detail::kScanPerPi,
        [&](double lo, double hi) { return detail::polish_negative(lo, hi, p); });
    out.bracket_counts.assign(brackets, 0);
    for (double w : out.omega) {
      const int k = std::min(brackets - 1, static_cast<int>(std::floor(w / pi)));
      ++out.bracket_counts[k];
    }
    out.n0 = -1;
    for (int k = 0; k < brackets; ++k)
      if (out.bracket_counts[k] != 1) out.n0 = k;
    if (out.n0 < brackets - 3) break;
    brackets += detail::kScanIntervals;
  }
  out.scanned_brackets = brackets;

  // Parity: the number of roots in each bracket must match the sign change of
  // the secular function across it.
  for (int k = 0; k < brackets; ++k) {
    const double lo = detail::reduced_negative(k * pi, p);
    const double hi = detail::reduced_negative((k + 1) * pi, p);
    if (lo == 0.0 || hi == 0.0) continue;
    const bool changes = (lo > 0.0) != (hi > 0.0);
    if (changes != (out.bracket_counts[k] % 2 == 1))
      throw Error(ErrorCode::BracketCollision, "bracket " + std::to_string(k) + " fails parity");
  }

  const int missing = count - static_cast<int>(out.omega.size());
  if (missing > 0) {
    std::vector<double> tail(missing);
    parallel_for(tail.size(), [&](std::size_t i) {
      const int k = brackets + static_cast<int>(i);
      const double lo = k * pi, hi = (k + 1) * pi;
      const double flo = secular_negative(lo, p), fhi = secular_negative(hi, p);
      if (flo == 0.0 || fhi == 0.0 || (flo > 0.0) == (fhi > 0.0))
        throw Error(ErrorCode::BracketCollision,
                    "bracket " + std::to_string(k) + " has no sign change");
      tail[i] = detail::polish_negative(lo, hi, p);
    });
    out.omega.insert(out.omega.end(), tail.begin(), tail.end());
  } else {
    out.omega.resize(count);
  }

  for (std::size_t i = 1; i < out.omega.size(); ++i)
    if (out.omega[i] - out.omega[i - 1] <= 1e-9)
      throw Error(ErrorCode::BracketCollision, "two roots closer than 1e-9");
  return out;
}

/// Ascending oscillatory roots omega_1 < omega_2 < ... (k_max of them).
inline std::vector<double> find_negative_modes(const ModelParams& p, int k_max) {
  return search_negative_roots(p, k_max).omega;
}

/// Leading large-omega behaviour: omega_k ~ k pi + (1/mu0 + 1/mu1) / (k pi).
inline double negative_root_asymptote(int bracket, const ModelParams& p) {
  const double kp = bracket * std::numbers::pi;
  return kp + (1.0 / p.mu0 + 1.0 / p.mu1) / kp;
}

struct PositiveRoots {
  std::vector<double> physical;  ///< omega^2 < w2, ascending
  std::vector<double> rejected;  ///< omega^2 >= w2 (no oscillatory time factor)
};

/// Roots of secular_positive over (0, 2 sqrt(w2)], split by the physical filter.
inline PositiveRoots find_positive_modes(const ModelParams& p) {
  p.validate();
  const double top = 2.0 * std::sqrt(p.w2);
  const auto roots = detail::scan_roots(
      [&](double w) { return detail::reduced_positive(w, p); }, 0.0, top, 20000,
      [&](double lo, double hi) { return detail::polish_positive(lo, hi, p); });
  PositiveRoots out;
  for (double w : roots) (w * w < p.w2 ? out.physical : out.rejected).push_back(w);
  return out;
}

// -- normalisation and basis functions -------------------------------------------

struct Normalization {
  double g = 1.0;                   ///< from <Y, Y>_mu = 1 (exact integral)
  double g_printed = std::nan("");  ///< closed-form expression for the oscillatory family
  bool disagrees = false;           ///< |g_printed / g - 1| > 1e-6
};

/// g^2 = alpha0 Y-atom0^2 + alpha1 Y-atom1^2 + int X^2 with Y-atom_j = (1 - alpha_j mu_j d_j) X(j).
inline Normalization normalization(const Mode& mode, const ModelParams& p, const CalibratedMeasure& cal) {
  Normalization out;
  double g2 = mode.shape.square_integral();
  for (int j = 0; j < 2; ++j) {
    const double atom = (1.0 - cal.alpha(j) * p.mu(j) * p.delta(j)) * mode.value(j);
    g2 += cal.alpha(j) * atom * atom;
  }
  out.g = std::sqrt(g2);
  if (mode.cls == ModeClass::Negative) {
    const double w2 = mode.omega * mode.omega;
    const double d0 = p.delta0(), d1 = p.delta1();
    const double inner = w2 + p.mu0 * p.mu0 * (w2 - d0) * (w2 - d0);
    const double printed =
        0.5 * (p.mu0 * d0 + (1.0 + p.mu0) * w2 + p.mu0 * p.mu0 * (w2 - d0) * (w2 - d0) +
               p.mu1 * p.mu1 * (w2 + d1) * inner / (w2 + p.mu1 * p.mu1 * (w2 - d1) * (w2 - d1)));
    out.g_printed = printed > 0.0 ? std::sqrt(printed) : std::nan("");
    out.disagrees = !(std::abs(out.g_printed / out.g - 1.0) <= 1e-6);
  }
  return out;
}

/// Y_n on a grid: X_n / g_n inside (exact slope and curvature attached), atoms
/// (1 - alpha_j mu_j d_j) X_n(j) / g_n.
inline MuFunction basis_mode(const Mode& mode, const ModelParams& p, const CalibratedMeasure& cal,
                             const GridSpec& grid) {
  grid.validate();
  const std::size_t n = grid.n_grid;
  std::vector<double> v(n + 1), s(n + 1), c(n + 1);
  const double inv = 1.0 / mode.g;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = grid.x(i);
    v[i] = mode.value(x) * inv;
    s[i] = mode.slope(x) * inv;
    c[i] = mode.lambda * v[i];
  }
  MuFunction y(std::move(v), 0.0, 0.0);
  y.atom0 = (1.0 - cal.alpha0 * p.mu0 * p.delta0()) * mode.value(0.0) * inv;
  y.atom1 = (1.0 - cal.alpha1 * p.mu1 * p.delta1()) * mode.value(1.0) * inv;
  y.slope = std::move(s);
  y.curvature = std::move(c);
  const auto [r0, r1] = robin_residual(y, cal);
  const double scale = std::max({1.0, std::abs(y.atom0), std::abs(y.atom1)});
  if (std::abs(r0) > 1e-9 * scale || std::abs(r1) > 1e-9 * scale)
    throw Error(ErrorCode::RobinViolation, "basis function misses the Robin domain");
  return y;
}

// -- spectrum -----------------------------------------------------------------

struct OrthonormalityCertificate {
  int size = 0;                  ///< leading modes checked
  std::size_t n_grid = 0;
  double max_off_diagonal = 0.0;
  double max_diagonal_error = 0.0;
};

struct Spectrum {
  ModelParams params;
  CalibratedMeasure cal;
  std::vector<Mode> modes;  ///< ascending index: positive-lambda, zero, oscillatory
  int n_max = 0;            ///< number of oscillatory modes
  int n0 = -1;              ///< last irregular bracket of the dense scan
  std::vector<double> rejected_positive;
  std::vector<std::string> warnings;
  OrthonormalityCertificate certificate;

  std::size_t size() const { return modes.size(); }
};

inline OrthonormalityCertificate certify_orthonormality(const Spectrum& s, int count,
                                                        std::size_t n_grid) {
  OrthonormalityCertificate cert;
  cert.size = std::min<int>(count, static_cast<int>(s.modes.size()));
  cert.n_grid = n_grid;
  const GridSpec grid{n_grid};
  std::vector<MuFunction> ys(cert.size);
  parallel_for(ys.size(), [&](std::size_t i) { ys[i] = basis_mode(s.modes[i], s.params, s.cal, grid); });
  for (int i = 0; i < cert.size; ++i)
    for (int j = i; j < cert.size; ++j) {
      const double gram = inner_mu(ys[i], ys[j], s.cal);
      if (i == j)
        cert.max_diagonal_error = std::max(cert.max_diagonal_error, std::abs(gram - 1.0));
      else
        cert.max_off_diagonal = std::max(cert.max_off_diagonal, std::abs(gram));
    }
  return cert;
}

/// Full spectrum with n_max oscillatory modes, every physical positive mode and
/// the zero mode when present; each mode is normalised and an orthonormality
/// certificate over the leading 30 modes (n_grid = 4096) is attached.
inline Spectrum build_spectrum(const ModelParams& p, const CalibratedMeasure& cal, int n_max,
                               int certify_count = 30, std::size_t certify_grid = 4096) {
  Spectrum s;
  s.params = p;
  s.cal = cal;
  s.n_max = n_max;

  const PositiveRoots pos = find_positive_modes(p);
  s.rejected_positive = pos.rejected;
  const int n_pos = static_cast<int>(pos.physical.size());
  for (int i = n_pos - 1; i >= 0; --i) {
    Mode m;
    m.index = -(i + 1);
    m.cls = ModeClass::Positive;
    m.omega = pos.physical[i];
    m.lambda = m.omega * m.omega;
    m.shape = eigenfunction_closed_form(ModeClass::Positive, m.omega, p);
    s.modes.push_back(m);
  }
  if (auto z = zero_mode(p)) s.modes.push_back(*z);

  const NegativeRootSearch neg = search_negative_roots(p, n_max);
  s.n0 = neg.n0;
  for (int i = 0; i < n_max; ++i) {
    Mode m;
    m.index = i + 1;
    m.cls = ModeClass::Negative;
    m.omega = neg.omega[i];
    m.lambda = -m.omega * m.omega;
    m.bracket = static_cast<int>(std::floor(m.omega / std::numbers::pi));
    m.shape = eigenfunction_closed_form(ModeClass::Negative, m.omega, p);
    s.modes.push_back(m);
  }

  int disagreements = 0;
  double worst = 0.0;
  for (Mode& m : s.modes) {
    if (!(m.lambda < p.w2))
      throw Error(ErrorCode::FrequencyDomainError, "mode with lambda >= w2 in the basis");
    const Normalization nrm = normalization(m, p, cal);
    m.g = nrm.g;
    m.g_printed = nrm.g_printed;
    if (nrm.disagrees) {
      ++disagreements;
      worst = std::max(worst, std::abs(nrm.g_printed / nrm.g - 1.0));
    }
  }
  if (disagreements > 0)
    s.warnings.push_back("closed-form normalisation differs from quadrature for " +
                         std::to_string(disagreements) + " modes (max relative " +
                         std::to_string(worst) + ")");
  if (!s.rejected_positive.empty())
    s.warnings.push_back(std::to_string(s.rejected_positive.size()) +
                         " positive roots with omega^2 >= w2 excluded");
  if (certify_count > 0) s.certificate = certify_orthonormality(s, certify_count, certify_grid);
  return s;
}

}  // namespace stringmass
