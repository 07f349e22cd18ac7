#pragma once

// Small numerical kernels shared by the modules: composite Simpson,
// bracketed root refinement and ordinary least-squares line fits.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "stringmass/error.hpp"

namespace stringmass {

/// Composite Simpson rule over uniformly spaced samples on [0, 1].
/// samples.size() - 1 must be even.
inline double simpson(std::span<const double> samples) {
  const std::size_t n = samples.size() - 1;
  if (samples.size() < 3 || n % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "simpson needs an even number of intervals");
  const double h = 1.0 / static_cast<double>(n);
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i < n; i += 2) odd += samples[i];
  for (std::size_t i = 2; i < n; i += 2) even += samples[i];
  return h / 3.0 * (samples.front() + samples.back() + 4.0 * odd + 2.0 * even);
}

/// Bisection on a sign-changing bracket [lo, hi], stopping at rel_tol * max(1, |x|).
template <class F>
double bisect(F&& f, double lo, double hi, double rel_tol = 1e-12) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw Error(ErrorCode::InvalidArgument, "bisect: bracket has no sign change");
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_tol * std::max(1.0, std::abs(mid)) || mid == lo || mid == hi) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Newton polish of a bracketed root. Steps that leave [lo, hi] or do not reduce
/// |f| are rejected, so the bisection answer is never made worse.
template <class F, class DF>
double newton_polish(F&& f, DF&& df, double x, double lo, double hi, int steps = 3) {
  double fx = f(x);
  for (int s = 0; s < steps && fx != 0.0; ++s) {
    const double d = df(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double next = x - fx / d;
    if (!(next >= lo && next <= hi)) break;
    const double fn = f(next);
    if (!(std::abs(fn) < std::abs(fx))) break;
    x = next;
    fx = fn;
  }
  return x;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "fit_line needs two or more paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

/// Power law y ~ prefactor * x^exponent fitted in log-log space (|y| is used).
struct PowerLaw {
  double exponent = 0.0;
  double prefactor = 0.0;
};

inline PowerLaw fit_power_law(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] <= 0.0 || y[i] == 0.0) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  const LineFit f = fit_line(lx, ly);
  return {f.slope, std::exp(f.intercept)};
}

}  // namespace stringmass
