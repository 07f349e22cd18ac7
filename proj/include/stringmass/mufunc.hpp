#pragma once

// Functions on [0, 1] under mu = alpha0 delta_0 + Lebesgue + alpha1 delta_1.
//
// A MuFunction stores the interior on a uniform grid; the first and last grid
// samples are the traces f(0+), f(1-). The atom values f(0), f(1) are separate
// numbers and in general differ from the traces.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "stringmass/error.hpp"
#include "stringmass/model.hpp"
#include "stringmass/numerics.hpp"

namespace stringmass {

enum class Quadrature { Simpson };

struct GridSpec {
  std::size_t n_grid = 2048;
  Quadrature quadrature = Quadrature::Simpson;

  void validate() const {
    if (n_grid < 16 || n_grid % 2 != 0)
      throw Error(ErrorCode::InvalidArgument, "n_grid must be even and >= 16");
  }
  double dx() const { return 1.0 / static_cast<double>(n_grid); }
  double x(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(n_grid); }
};

struct MuFunction {
  std::vector<double> values;  ///< n_grid + 1 samples; the ends are the traces
  double atom0 = 0.0;
  double atom1 = 0.0;
  /// Optional exact samples of f' and f'' on the grid. When present the RN
  /// derivative uses them instead of finite differences.
  std::optional<std::vector<double>> slope;
  std::optional<std::vector<double>> curvature;

  MuFunction() = default;
  MuFunction(std::vector<double> v, double a0, double a1) : values(std::move(v)), atom0(a0), atom1(a1) {
    grid().validate();
  }

  std::size_t n_grid() const { return values.empty() ? 0 : values.size() - 1; }
  GridSpec grid() const { return GridSpec{n_grid()}; }
  double trace0() const { return values.front(); }
  double trace1() const { return values.back(); }
  double trace(int j) const { return j == 0 ? trace0() : trace1(); }
  double atom(int j) const { return j == 0 ? atom0 : atom1; }
  double& atom(int j) { return j == 0 ? atom0 : atom1; }

  /// Samples f on the grid. Atom values default to the traces.
  static MuFunction sample(const GridSpec& grid, const std::function<double(double)>& f) {
    grid.validate();
    std::vector<double> v(grid.n_grid + 1);
    for (std::size_t i = 0; i <= grid.n_grid; ++i) v[i] = f(grid.x(i));
    MuFunction out(std::move(v), 0.0, 0.0);
    out.atom0 = out.trace0();
    out.atom1 = out.trace1();
    return out;
  }

  static MuFunction constant(const GridSpec& grid, double c) {
    return sample(grid, [c](double) { return c; });
  }

  /// Boundary indicator: 1 at the atom x = 0, zero on (0, 1] (traces are 0).
  static MuFunction indicator0(const GridSpec& grid) {
    MuFunction f = constant(grid, 0.0);
    f.atom0 = 1.0;
    return f;
  }
};

namespace detail {

inline void require_same_grid(const MuFunction& u, const MuFunction& v) {
  if (u.values.size() != v.values.size())
    throw Error(ErrorCode::GridMismatch, "functions live on different grids");
}

/// Second-order finite differences: centred inside, one-sided at both ends.
inline std::vector<double> grid_derivative(const std::vector<double>& f) {
  const std::size_t n = f.size() - 1;
  const double inv2h = 0.5 * static_cast<double>(n);
  std::vector<double> d(f.size());
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
  d[n] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) * inv2h;
  for (std::size_t i = 1; i < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * inv2h;
  return d;
}

/// Second differences: 3-point inside, 4-point one-sided (still second order) at the ends.
inline std::vector<double> grid_second_derivative(const std::vector<double>& f) {
  const std::size_t n = f.size() - 1;
  const double inv_h2 = static_cast<double>(n) * static_cast<double>(n);
  std::vector<double> d(f.size());
  d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv_h2;
  d[n] = (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) * inv_h2;
  for (std::size_t i = 1; i < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv_h2;
  return d;
}

}  // namespace detail

/// <u, v>_mu = alpha0 u(0) v(0) + alpha1 u(1) v(1) + int_0^1 u v.
inline double inner_mu(const MuFunction& u, const MuFunction& v, const CalibratedMeasure& cal) {
  detail::require_same_grid(u, v);
  std::vector<double> prod(u.values.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = u.values[i] * v.values[i];
  return cal.alpha0 * u.atom0 * v.atom0 + cal.alpha1 * u.atom1 * v.atom1 + simpson(prod);
}

/// Modified product with the boundary masses acting on the traces.
inline double inner_modified(const MuFunction& u, const MuFunction& v, const ModelParams& params) {
  detail::require_same_grid(u, v);
  std::vector<double> prod(u.values.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = u.values[i] * v.values[i];
  return params.mu0 * u.trace0() * v.trace0() + params.mu1 * u.trace1() * v.trace1() +
         simpson(prod);
}

/// RN derivative of a single atom: ((-1)^j / alpha_j)(gamma_j(F) - F(j)).
inline double rn_atom_derivative(const MuFunction& f, const CalibratedMeasure& cal, int j) {
  const double sign = j == 0 ? 1.0 : -1.0;
  return sign / cal.alpha(j) * (f.trace(j) - f.atom(j));
}

/// dF/dmu: F' inside (0, 1), jump over atom weight at the atoms.
inline MuFunction rn_derivative(const MuFunction& f, const CalibratedMeasure& cal) {
  f.grid().validate();
  MuFunction d;
  d.values = f.slope ? *f.slope : detail::grid_derivative(f.values);
  d.slope = f.curvature;
  d.atom0 = rn_atom_derivative(f, cal, 0);
  d.atom1 = rn_atom_derivative(f, cal, 1);
  return d;
}

/// Pointwise product. Exact derivative channels propagate by the product rule.
inline MuFunction multiply(const MuFunction& f, const MuFunction& g) {
  detail::require_same_grid(f, g);
  MuFunction p;
  p.values.resize(f.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = f.values[i] * g.values[i];
  p.atom0 = f.atom0 * g.atom0;
  p.atom1 = f.atom1 * g.atom1;
  if (f.slope && g.slope) {
    std::vector<double> s(p.values.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      s[i] = (*f.slope)[i] * g.values[i] + f.values[i] * (*g.slope)[i];
    p.slope = std::move(s);
  }
  return p;
}

/// Largest deviation from the modified Leibniz rule
///   d(FG)/dmu = F' G + F G' + K F' G',  K(j) = (-1)^j alpha_j, K = 0 inside,
/// over grid points and atoms.
inline double leibniz_residual(const MuFunction& f, const MuFunction& g, const CalibratedMeasure& cal) {
  detail::require_same_grid(f, g);
  const MuFunction lhs = rn_derivative(multiply(f, g), cal);
  const MuFunction df = rn_derivative(f, cal);
  const MuFunction dg = rn_derivative(g, cal);
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.values.size(); ++i) {
    const double rhs = df.values[i] * g.values[i] + f.values[i] * dg.values[i];
    worst = std::max(worst, std::abs(lhs.values[i] - rhs));
  }
  for (int j = 0; j < 2; ++j) {
    const double k = (j == 0 ? 1.0 : -1.0) * cal.alpha(j);
    const double rhs =
        df.atom(j) * g.atom(j) + f.atom(j) * dg.atom(j) + k * df.atom(j) * dg.atom(j);
    worst = std::max(worst, std::abs(lhs.atom(j) - rhs));
  }
  return worst;
}

/// Delta_mu F = (1 + C) d^2F/dmu^2 with C = 0 inside and C(j) = A(j) alpha_j.
inline MuFunction laplacian_mu(const MuFunction& f, const CalibratedMeasure& cal) {
  MuFunction second = rn_derivative(rn_derivative(f, cal), cal);
  second.slope.reset();
  if (!f.curvature && !f.slope) second.values = detail::grid_second_derivative(f.values);
  second.atom0 *= 1.0 + cal.c0;
  second.atom1 *= 1.0 + cal.c1;
  return second;
}

/// ((-1)^j dF/dmu(j) - A(j) F(j)) for j = 0, 1. Both vanish exactly on the
/// Robin domain, equivalently gamma_j(F) = (1 + alpha_j A(j)) F(j). When
/// 1 + alpha_j A(j) = 0 membership forces a zero trace.
inline std::pair<double, double> robin_residual(const MuFunction& f, const CalibratedMeasure& cal) {
  auto row = [&](int j) {
    const double sign = j == 0 ? 1.0 : -1.0;
    return sign * rn_atom_derivative(f, cal, j) - cal.coupling(j) * f.atom(j);
  };
  return {row(0), row(1)};
}

/// Resets the atoms so that F lies in the Robin domain: F(j) = gamma_j / (1 + alpha_j A(j)).
inline MuFunction with_robin_atoms(MuFunction f, const CalibratedMeasure& cal) {
  for (int j = 0; j < 2; ++j) f.atom(j) = f.trace(j) / (1.0 + cal.alpha(j) * cal.coupling(j));
  return f;
}

}  // namespace stringmass
