#pragma once

// Time evolution of Cauchy data (Q, P) = (u(., t), du/dt(., t)).
//
// Two independent routes: an exact expansion in the normal modes Y_n, each
// oscillating at sqrt(w2 - lambda_n), and an explicit leapfrog integration of
// the original Newtonian system (Klein-Gordon string, boundary particles as
// ODEs driven by the string slope). The second one is the cross-check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "stringmass/error.hpp"
#include "stringmass/model.hpp"
#include "stringmass/mufunc.hpp"
#include "stringmass/parallel.hpp"
#include "stringmass/spectrum.hpp"

namespace stringmass {

struct CauchyData {
  MuFunction q;  ///< configuration, in the Robin domain for mode evolution
  MuFunction p;  ///< velocity
  double time = 0.0;
};

/// Leading modes of a spectrum sampled on a fixed grid.
struct ModeBasis {
  ModelParams params;
  CalibratedMeasure cal;
  GridSpec grid;
  std::vector<Mode> modes;
  std::vector<MuFunction> functions;  ///< Y_n with exact slope / curvature channels
  std::vector<double> frequencies;    ///< sqrt(w2 - lambda_n)

  std::size_t size() const { return modes.size(); }
};

inline ModeBasis make_basis(const Spectrum& s, const GridSpec& grid, std::size_t n_modes) {
  grid.validate();
  if (n_modes == 0 || n_modes > s.modes.size())
    throw Error(ErrorCode::InvalidArgument, "basis size must lie in [1, spectrum size]");
  ModeBasis b;
  b.params = s.params;
  b.cal = s.cal;
  b.grid = grid;
  b.modes.assign(s.modes.begin(), s.modes.begin() + static_cast<std::ptrdiff_t>(n_modes));
  b.functions.resize(n_modes);
  b.frequencies.resize(n_modes);
  for (std::size_t i = 0; i < n_modes; ++i) {
    const double gap = s.params.w2 - b.modes[i].lambda;
    if (!(gap > 0.0)) throw Error(ErrorCode::FrequencyDomainError, "lambda_n >= w2");
    b.frequencies[i] = std::sqrt(gap);
  }
  parallel_for(n_modes, [&](std::size_t i) {
    b.functions[i] = basis_mode(b.modes[i], s.params, s.cal, grid);
  });
  return b;
}

struct ModeCoefficients {
  std::vector<double> q;  ///< <Y_n, Q>_mu
  std::vector<double> p;  ///< <Y_n, P>_mu
  double residual_q = 0.0;  ///< ||Q - sum q_n Y_n||_mu
  double residual_p = 0.0;
};

struct ComplexModeCoefficients {
  std::vector<std::complex<double>> q;
  std::vector<std::complex<double>> p;
};

namespace detail {

/// sum_n c_n Y_n including atoms and exact derivative channels.
inline MuFunction synthesize(const ModeBasis& b, const std::vector<double>& c) {
  const std::size_t n_pts = b.grid.n_grid + 1;
  MuFunction out;
  out.values.assign(n_pts, 0.0);
  std::vector<double> slope(n_pts, 0.0), curv(n_pts, 0.0);
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double cn = c[n];
    if (cn == 0.0) continue;
    const MuFunction& y = b.functions[n];
    const auto& ys = *y.slope;
    const auto& yc = *y.curvature;
    for (std::size_t i = 0; i < n_pts; ++i) {
      out.values[i] += cn * y.values[i];
      slope[i] += cn * ys[i];
      curv[i] += cn * yc[i];
    }
    out.atom0 += cn * y.atom0;
    out.atom1 += cn * y.atom1;
  }
  out.slope = std::move(slope);
  out.curvature = std::move(curv);
  return out;
}

inline MuFunction subtract(MuFunction a, const MuFunction& b) {
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] -= b.values[i];
  a.atom0 -= b.atom0;
  a.atom1 -= b.atom1;
  a.slope.reset();
  a.curvature.reset();
  return a;
}

}  // namespace detail

/// Q_n = <Y_n, Q>_mu, P_n = <Y_n, P>_mu, with the truncation residual.
inline ModeCoefficients project(const CauchyData& data, const ModeBasis& b) {
  if (data.q.values.size() != b.grid.n_grid + 1 || data.p.values.size() != b.grid.n_grid + 1)
    throw Error(ErrorCode::GridMismatch, "Cauchy data and basis use different grids");
  ModeCoefficients c;
  c.q.resize(b.size());
  c.p.resize(b.size());
  parallel_for(b.size(), [&](std::size_t n) {
    c.q[n] = inner_mu(b.functions[n], data.q, b.cal);
    c.p[n] = inner_mu(b.functions[n], data.p, b.cal);
  });
  const MuFunction rq = detail::subtract(data.q, detail::synthesize(b, c.q));
  const MuFunction rp = detail::subtract(data.p, detail::synthesize(b, c.p));
  c.residual_q = std::sqrt(std::max(0.0, inner_mu(rq, rq, b.cal)));
  c.residual_p = std::sqrt(std::max(0.0, inner_mu(rp, rp, b.cal)));
  return c;
}

/// Modewise propagation through time t:
///   q_n(t) = e^{i nu t} c+ + e^{-i nu t} c-,   c+- = (Q_n -+ i P_n / nu) / 2,
///   p_n(t) = i nu (e^{i nu t} c+ - e^{-i nu t} c-).
inline ComplexModeCoefficients advance(const ComplexModeCoefficients& c, const ModeBasis& b, double t) {
  if (c.q.size() != b.size() || c.p.size() != b.size())
    throw Error(ErrorCode::BasisMismatch, "coefficient count differs from basis size");
  using namespace std::complex_literals;
  ComplexModeCoefficients out;
  out.q.resize(b.size());
  out.p.resize(b.size());
  for (std::size_t n = 0; n < b.size(); ++n) {
    const double nu = b.frequencies[n];
    const std::complex<double> plus = 0.5 * (c.q[n] - 1i * c.p[n] / nu);
    const std::complex<double> minus = 0.5 * (c.q[n] + 1i * c.p[n] / nu);
    const std::complex<double> ep = std::polar(1.0, nu * t), em = std::conj(ep);
    out.q[n] = ep * plus + em * minus;
    out.p[n] = 1i * nu * (ep * plus - em * minus);
  }
  return out;
}

/// Real version of advance(); the imaginary residue of the modal sum is checked
/// (<= 1e-12 relative) and dropped.
inline ModeCoefficients advance(const ModeCoefficients& c, const ModeBasis& b, double t) {
  ComplexModeCoefficients z;
  z.q.assign(c.q.begin(), c.q.end());
  z.p.assign(c.p.begin(), c.p.end());
  const ComplexModeCoefficients moved = advance(z, b, t);
  ModeCoefficients out;
  out.q.resize(b.size());
  out.p.resize(b.size());
  for (std::size_t n = 0; n < b.size(); ++n) {
    const double scale = 1.0 + std::abs(c.q[n]) + std::abs(c.p[n]) / b.frequencies[n];
    if (std::abs(moved.q[n].imag()) > 1e-12 * scale ||
        std::abs(moved.p[n].imag()) > 1e-12 * scale * b.frequencies[n])
      throw Error(ErrorCode::FrequencyDomainError, "real data picked up an imaginary part");
    out.q[n] = moved.q[n].real();
    out.p[n] = moved.p[n].real();
  }
  return out;
}

/// Cauchy data at time t from modal coefficients given at time 0.
inline CauchyData evolve_modes(const ModeCoefficients& c, const ModeBasis& b, double t) {
  for (std::size_t n = 0; n < b.size(); ++n)
    if (!(b.modes[n].lambda < b.params.w2))
      throw Error(ErrorCode::FrequencyDomainError, "lambda_n >= w2");
  const ModeCoefficients moved = advance(c, b, t);
  CauchyData out;
  out.q = detail::synthesize(b, moved.q);
  out.p = detail::synthesize(b, moved.p);
  out.time = t;
  return out;
}

/// Energy
///   H = <P,P>/2 + <dQ,dQ>/2 + w2 <Q,Q>/2
///       + sum_j alpha_j^2 ((-1)^j dQ(j) - A(j) Q(j)) d^2Q(j) + sum_j A(j) Q(j)^2 / 2,
/// all products in L^2_mu, d = d/dmu. On the Robin domain the constraint term is
/// zero. Off that domain its value depends on how d^2Q at the atoms is
/// discretised (same RN stack as laplacian_mu).
inline double hamiltonian(const CauchyData& data, const ModelParams& params, const CalibratedMeasure& cal) {
  const MuFunction& q = data.q;
  const MuFunction dq = rn_derivative(q, cal);
  const MuFunction d2q = rn_derivative(dq, cal);
  double h = 0.5 * inner_mu(data.p, data.p, cal) + 0.5 * inner_mu(dq, dq, cal) +
             0.5 * params.w2 * inner_mu(q, q, cal);
  for (int j = 0; j < 2; ++j) {
    const double sign = j == 0 ? 1.0 : -1.0;
    const double alpha = cal.alpha(j);
    h += alpha * alpha * (sign * dq.atom(j) - cal.coupling(j) * q.atom(j)) * d2q.atom(j);
    h += 0.5 * cal.coupling(j) * q.atom(j) * q.atom(j);
  }
  return h;
}

/// Modal energy sum_n (P_n^2 + nu_n^2 Q_n^2) / 2.
inline double modal_energy(const ModeCoefficients& c, const ModeBasis& b) {
  double e = 0.0;
  for (std::size_t n = 0; n < b.size(); ++n)
    e += 0.5 * (c.p[n] * c.p[n] + b.frequencies[n] * b.frequencies[n] * c.q[n] * c.q[n]);
  return e;
}

// -- finite-difference oracle ----------------------------------------------------

struct FdOptions {
  std::size_t energy_every = 0;  ///< sample the discrete energy every k steps (0: start and end)
};

struct FdResult {
  CauchyData state;
  std::vector<double> times;
  std::vector<double> energies;
  double energy_drift = 0.0;  ///< max |E(t) - E(0)| / E(0) over the samples
  std::size_t steps = 0;
  double dt = 0.0;
};

/// Mechanical energy of a grid state: string kinetic, elastic and restoring
/// terms plus both particles (kinetic and spring).
inline double fd_energy(const std::vector<double>& u, const std::vector<double>& v, const ModelParams& p) {
  const std::size_t n = u.size() - 1;
  const double dx = 1.0 / static_cast<double>(n);
  double kin = 0.0, pot = 0.0, grad = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    kin += w * v[i] * v[i];
    pot += w * u[i] * u[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = u[i + 1] - u[i];
    grad += d * d;
  }
  double e = 0.5 * (kin * dx + grad / dx + p.w2 * pot * dx);
  e += 0.5 * p.mu0 * (v[0] * v[0] + p.w02 * u[0] * u[0]);
  e += 0.5 * p.mu1 * (v[n] * v[n] + p.w12 * u[n] * u[n]);
  return e;
}

/// Explicit leapfrog for
///   u_tt - u_xx + w2 u = 0 on (0, 1),
///   mu0 u_tt(0) - u_x(0) + mu0 w02 u(0) = 0,
///   mu1 u_tt(1) + u_x(1) + mu1 w12 u(1) = 0,
/// with the wall slope from 3-point one-sided differences. The initial traces
/// are the particle positions. dt is shrunk slightly so that t_end is hit exactly.
inline FdResult fd_evolve(const CauchyData& data, const ModelParams& params, double dt, double t_end,
                          const FdOptions& opts = {}) {
  params.validate();
  const std::size_t n = data.q.n_grid();
  data.q.grid().validate();
  if (data.p.values.size() != n + 1) throw Error(ErrorCode::GridMismatch, "Q and P grids differ");
  const double dx = 1.0 / static_cast<double>(n);
  if (!(dt > 0.0) || dt > 0.9 * dx)
    throw Error(ErrorCode::CFLViolation, "dt must be positive and <= 0.9 dx");
  if (!(t_end >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be >= 0");

  FdResult res;
  res.steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  res.dt = res.steps > 0 ? t_end / static_cast<double>(res.steps) : dt;
  const double h = res.dt;
  const double inv_dx2 = 1.0 / (dx * dx);
  const double inv_2dx = 0.5 / dx;

  auto accel = [&](const std::vector<double>& u, std::vector<double>& a) {
    const double* uu = u.data();
    double* aa = a.data();
    for (std::size_t i = 1; i < n; ++i)
      aa[i] = (uu[i + 1] - 2.0 * uu[i] + uu[i - 1]) * inv_dx2 - params.w2 * uu[i];
    const double slope0 = (-3.0 * uu[0] + 4.0 * uu[1] - uu[2]) * inv_2dx;
    const double slope1 = (3.0 * uu[n] - 4.0 * uu[n - 1] + uu[n - 2]) * inv_2dx;
    aa[0] = slope0 / params.mu0 - params.w02 * uu[0];
    aa[n] = -slope1 / params.mu1 - params.w12 * uu[n];
  };

  std::vector<double> prev = data.q.values, cur(n + 1), next(n + 1), acc(n + 1), vel(n + 1);
  double sup0 = 0.0;
  for (double v : prev) sup0 = std::max(sup0, std::abs(v));
  sup0 = std::max(sup0, 1e-300);

  const double e0 = fd_energy(prev, data.p.values, params);
  res.times.push_back(0.0);
  res.energies.push_back(e0);

  // Taylor start: u^1 = u^0 + h v^0 + h^2/2 a(u^0).
  accel(prev, acc);
  for (std::size_t i = 0; i <= n; ++i) cur[i] = prev[i] + h * data.p.values[i] + 0.5 * h * h * acc[i];

  std::vector<double> final_u = data.q.values, final_v = data.p.values;
  const double h2 = h * h;
  for (std::size_t step = 1; step <= res.steps; ++step) {
    accel(cur, acc);
    for (std::size_t i = 0; i <= n; ++i) next[i] = 2.0 * cur[i] - prev[i] + h2 * acc[i];
    // cur now sits at t = step * h with a centred velocity available.
    const bool last = step == res.steps;
    const bool sample = last || (opts.energy_every > 0 && step % opts.energy_every == 0);
    if (sample) {
      for (std::size_t i = 0; i <= n; ++i) vel[i] = (next[i] - prev[i]) / (2.0 * h);
      res.times.push_back(static_cast<double>(step) * h);
      res.energies.push_back(fd_energy(cur, vel, params));
      if (last) {
        final_u = cur;
        final_v = vel;
      }
    }
    if (step % 1024 == 0 || last) {
      double sup = 0.0;
      for (double v : cur) sup = std::isfinite(v) ? std::max(sup, std::abs(v)) : INFINITY;
      if (!(sup <= 1e6 * sup0)) throw Error(ErrorCode::BlowUp, "finite-difference solution diverged");
    }
    std::swap(prev, cur);
    std::swap(cur, next);
  }

  for (double e : res.energies) {
    const double drift = std::abs(e - e0) / std::max(e0, 1e-300);
    res.energy_drift = std::isfinite(drift) ? std::max(res.energy_drift, drift) : INFINITY;
  }

  const CalibratedMeasure cal = calibrate(params);
  res.state.q = with_robin_atoms(MuFunction(std::move(final_u), 0.0, 0.0), cal);
  res.state.p = with_robin_atoms(MuFunction(std::move(final_v), 0.0, 0.0), cal);
  res.state.time = t_end;
  return res;
}

}  // namespace stringmass
