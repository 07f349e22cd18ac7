#pragma once

// One-particle structure of the quantised field.
//
// With nu_n = sqrt(w2 - lambda_n), a complex solution is of positive frequency
// when every modal coefficient oscillates as e^{+i nu_n t}, i.e.
// P_n = i nu_n Q_n. On such data
//   <Q1, Q2>_+ = 2 sum_n nu_n conj(Q1_n) Q2_n,
// so Z_n = Y_n / (sqrt(2) nu_n^{1/2}) is orthonormal and a vector is stored as
// its coordinates psi_n in the Z_n basis.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "stringmass/dynamics.hpp"
#include "stringmass/error.hpp"
#include "stringmass/model.hpp"
#include "stringmass/mufunc.hpp"
#include "stringmass/numerics.hpp"
#include "stringmass/parallel.hpp"
#include "stringmass/spectrum.hpp"

namespace stringmass {

struct OneParticleVector {
  std::vector<std::complex<double>> coeffs;  ///< psi_n in the Z_n basis
  double tail_estimate = 0.0;  ///< bound on sum_{n > n_max} |psi_n|^2 when known

  std::size_t n_max() const { return coeffs.size(); }

  double norm2() const {
    double s = 0.0;
    for (const auto& c : coeffs) s += std::norm(c);
    return s;
  }
};

/// nu_n for the first n modes of the spectrum (storage order).
inline std::vector<double> quantum_frequencies(const Spectrum& s, std::size_t n) {
  if (n > s.modes.size()) throw Error(ErrorCode::InvalidArgument, "more frequencies than modes");
  std::vector<double> nu(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = s.params.w2 - s.modes[i].lambda;
    if (!(gap > 0.0)) throw Error(ErrorCode::FrequencyDomainError, "lambda_n >= w2");
    nu[i] = std::sqrt(gap);
  }
  return nu;
}

namespace detail {

inline void check_frequencies(std::span<const double> nu, std::size_t n) {
  if (nu.size() != n) throw Error(ErrorCode::BasisMismatch, "coefficient count differs from frequency count");
  for (double v : nu)
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::FrequencyDomainError, "non-positive quantum frequency");
}

}  // namespace detail

struct FrequencySplit {
  OneParticleVector positive;  ///< from (Q_n - i P_n / nu_n) / 2
  OneParticleVector negative;  ///< from (Q_n + i P_n / nu_n) / 2, same scaling
};

/// Splits modal data into the e^{+i nu t} and e^{-i nu t} parts and rescales
/// each to Z_n coordinates: psi_n = sqrt(2) nu_n^{1/2} (Q_n -+ i P_n / nu_n) / 2.
inline FrequencySplit split_frequencies(const ComplexModeCoefficients& c, std::span<const double> nu) {
  if (c.q.size() != c.p.size()) throw Error(ErrorCode::BasisMismatch, "q and p lengths differ");
  detail::check_frequencies(nu, c.q.size());
  using namespace std::complex_literals;
  FrequencySplit out;
  out.positive.coeffs.resize(nu.size());
  out.negative.coeffs.resize(nu.size());
  for (std::size_t n = 0; n < nu.size(); ++n) {
    const double scale = std::numbers::sqrt2 * std::sqrt(nu[n]);
    out.positive.coeffs[n] = scale * 0.5 * (c.q[n] - 1i * c.p[n] / nu[n]);
    out.negative.coeffs[n] = scale * 0.5 * (c.q[n] + 1i * c.p[n] / nu[n]);
  }
  return out;
}

inline OneParticleVector positive_frequency(const ComplexModeCoefficients& c, std::span<const double> nu) {
  return split_frequencies(c, nu).positive;
}

inline OneParticleVector positive_frequency(const ModeCoefficients& c, std::span<const double> nu) {
  ComplexModeCoefficients z;
  z.q.assign(c.q.begin(), c.q.end());
  z.p.assign(c.p.begin(), c.p.end());
  return positive_frequency(z, nu);
}

/// Positive-frequency Cauchy data of a one-particle vector:
/// Q_n = psi_n / (sqrt(2) nu_n^{1/2}), P_n = i nu_n Q_n.
inline ComplexModeCoefficients reconstruct(const OneParticleVector& psi, std::span<const double> nu) {
  detail::check_frequencies(nu, psi.coeffs.size());
  using namespace std::complex_literals;
  ComplexModeCoefficients c;
  c.q.resize(nu.size());
  c.p.resize(nu.size());
  for (std::size_t n = 0; n < nu.size(); ++n) {
    c.q[n] = psi.coeffs[n] / (std::numbers::sqrt2 * std::sqrt(nu[n]));
    c.p[n] = 1i * nu[n] * c.q[n];
  }
  return c;
}

/// Fourier form: 2 sum_n nu_n conj(Q1_n) Q2_n on modal configuration coefficients.
inline std::complex<double> inner_plus(std::span<const std::complex<double>> q1,
                                       std::span<const std::complex<double>> q2,
                                       std::span<const double> nu) {
  if (q1.size() != q2.size()) throw Error(ErrorCode::BasisMismatch, "vectors use different truncations");
  detail::check_frequencies(nu, q1.size());
  std::complex<double> s = 0.0;
  for (std::size_t n = 0; n < nu.size(); ++n) s += nu[n] * std::conj(q1[n]) * q2[n];
  return 2.0 * s;
}

/// Same product in Z_n coordinates: sum_n conj(psi1_n) psi2_n.
inline std::complex<double> inner_plus(const OneParticleVector& a, const OneParticleVector& b) {
  if (a.coeffs.size() != b.coeffs.size())
    throw Error(ErrorCode::BasisMismatch, "vectors use different truncations");
  std::complex<double> s = 0.0;
  for (std::size_t n = 0; n < a.coeffs.size(); ++n) s += std::conj(a.coeffs[n]) * b.coeffs[n];
  return s;
}

/// Integral form 2 <Q1, sqrt(w2 - Delta_mu) Q2>_mu for real configurations, the
/// operator root acting modewise on the projection of Q2 onto the basis.
inline double inner_plus_integral(const MuFunction& q1, const MuFunction& q2, const ModeBasis& b) {
  std::vector<double> c(b.size());
  parallel_for(b.size(), [&](std::size_t n) { c[n] = b.frequencies[n] * inner_mu(b.functions[n], q2, b.cal); });
  const MuFunction root_q2 = detail::synthesize(b, c);
  return 2.0 * inner_mu(q1, root_q2, b.cal);
}

/// Fourier form of the same product for real configurations.
inline double inner_plus_fourier(const MuFunction& q1, const MuFunction& q2, const ModeBasis& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < b.size(); ++n)
    s += b.frequencies[n] * inner_mu(b.functions[n], q1, b.cal) * inner_mu(b.functions[n], q2, b.cal);
  return 2.0 * s;
}

// -- boundary indicator ------------------------------------------------------------

namespace detail {

inline double indicator_coefficient(const Mode& m, const ModelParams& p, const CalibratedMeasure& cal) {
  const double atom = (1.0 - cal.alpha0 * p.mu0 * p.delta0()) * m.value(0.0) / m.g;
  const double nu = std::sqrt(p.w2 - m.lambda);
  return std::numbers::sqrt2 * std::sqrt(nu) * cal.alpha0 * atom;
}

}  // namespace detail

/// <F, Z_n>_+ for the indicator of the left atom over the first n_max
/// oscillatory modes. <Y_n, F>_mu = alpha0 Y_n(0) uses the atom value directly.
inline std::vector<double> boundary_indicator_coefficients(const Spectrum& s, const CalibratedMeasure& cal,
                                                           std::size_t n_max) {
  std::vector<double> out;
  out.reserve(n_max);
  for (const Mode& m : s.modes) {
    if (out.size() == n_max) break;
    if (m.cls == ModeClass::Negative) out.push_back(detail::indicator_coefficient(m, s.params, cal));
  }
  if (out.size() < n_max) throw Error(ErrorCode::InsufficientModes, "spectrum holds fewer oscillatory modes");
  return out;
}

/// Leading constant of |<F, Z_n>_+| ~ prefactor / sqrt(n).
inline double boundary_indicator_prefactor(const ModelParams& p, const CalibratedMeasure& cal) {
  return 2.0 * std::sqrt(cal.alpha0) / std::sqrt(p.mu0 * std::numbers::pi);
}

/// Expected growth rate of the partial sums against ln N.
inline double boundary_indicator_log_slope(const ModelParams& p, const CalibratedMeasure& cal) {
  return 4.0 * cal.alpha0 / (p.mu0 * std::numbers::pi);
}

/// Power-law fit of |<F, Z_n>_+| against the bracket index k = floor(omega / pi)
/// for oscillatory modes with k in [k_lo, k_hi].
inline PowerLaw boundary_indicator_law(const Spectrum& s, const CalibratedMeasure& cal, int k_lo, int k_hi) {
  std::vector<double> k, c;
  for (const Mode& m : s.modes) {
    if (m.cls != ModeClass::Negative || m.bracket < k_lo || m.bracket > k_hi) continue;
    k.push_back(m.bracket);
    c.push_back(detail::indicator_coefficient(m, s.params, cal));
  }
  if (k.size() < 2) throw Error(ErrorCode::InsufficientModes, "too few modes in the fit window");
  return fit_power_law(k, c);
}

enum class SummabilityVerdict { Divergent, Convergent };

inline const char* to_string(SummabilityVerdict v) {
  return v == SummabilityVerdict::Divergent ? "DIVERGENT" : "CONVERGENT";
}

struct FactorizationReport {
  std::vector<double> coefficients;
  std::vector<double> partial_sums;  ///< S_N = sum_{n <= N} |c_n|^2, N = 1..n_max
  double log_slope = 0.0;            ///< fit of S_N against ln N for N in [n_max/10, n_max]
  double expected_slope = std::nan("");
  double octave_slope_lower = 0.0;   ///< (S_{N/2} - S_{N/4}) / ln 2
  double octave_slope_upper = 0.0;   ///< (S_N - S_{N/2}) / ln 2
  SummabilityVerdict verdict = SummabilityVerdict::Convergent;
};

/// Partial sums of |c_n|^2 with a log-growth fit. Divergent means both of the
/// last two octaves add a positive amount and the two amounts agree to 20%;
/// a square-summable tail shrinks by roughly half per octave or faster.
inline FactorizationReport partial_sum_diagnostic(std::vector<double> coefficients) {
  const std::size_t n = coefficients.size();
  if (n < 100) throw Error(ErrorCode::InsufficientModes, "diagnostic needs at least 100 coefficients");
  FactorizationReport r;
  r.coefficients = std::move(coefficients);
  r.partial_sums.resize(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += r.coefficients[i] * r.coefficients[i];
    r.partial_sums[i] = s;
  }
  std::vector<double> x, y;
  for (std::size_t big_n = std::max<std::size_t>(1, n / 10); big_n <= n; ++big_n) {
    x.push_back(std::log(static_cast<double>(big_n)));
    y.push_back(r.partial_sums[big_n - 1]);
  }
  r.log_slope = fit_line(x, y).slope;
  const double ln2 = std::numbers::ln2;
  r.octave_slope_lower = (r.partial_sums[n / 2 - 1] - r.partial_sums[n / 4 - 1]) / ln2;
  r.octave_slope_upper = (r.partial_sums[n - 1] - r.partial_sums[n / 2 - 1]) / ln2;
  const bool both_positive = r.octave_slope_lower > 0.0 && r.octave_slope_upper > 0.0;
  const bool stable =
      both_positive && std::abs(r.octave_slope_upper / r.octave_slope_lower - 1.0) <= 0.2;
  r.verdict = stable ? SummabilityVerdict::Divergent : SummabilityVerdict::Convergent;
  return r;
}

/// Non-factorisation diagnostic for the boundary indicator F.
inline FactorizationReport factorization_diagnostic(const Spectrum& s, const CalibratedMeasure& cal,
                                                    std::size_t n_max) {
  if (n_max < 100) throw Error(ErrorCode::InsufficientModes, "n_max must be >= 100");
  FactorizationReport r = partial_sum_diagnostic(boundary_indicator_coefficients(s, cal, n_max));
  r.expected_slope = boundary_indicator_log_slope(s.params, cal);
  return r;
}

}  // namespace stringmass
