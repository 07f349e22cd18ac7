#pragma once

// Reference computations that share no code with the library: brute-force sign
// scans, an Eigen-based discretisation of the Newtonian system in frequency
// space, and closed-form integrals.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// Bisection on a sign change, carried to the bracket's floating-point width.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// All sign changes of f on [lo, hi] sampled at `steps` points, each bisected.
inline std::vector<double> scan(const std::function<double(double)>& f, double lo, double hi, int steps) {
  std::vector<double> roots;
  double x0 = lo, f0 = f(lo);
  for (int i = 1; i <= steps; ++i) {
    const double x1 = lo + (hi - lo) * i / steps;
    const double f1 = f(x1);
    if (f1 == 0.0) {
      roots.push_back(x1);
    } else if (f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0)) {
      roots.push_back(bisect(f, x0, x1));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

/// Positive roots of a (1 - mu delta a)^2 = mu from a sign scan of
/// (0, 10 mu (1 + |delta|)], widened for k = mu delta > 0 so that the root
/// beyond 1/k (near 1/k + (mu/k^2)^(1/3)) is inside.
inline std::vector<double> calibration_roots(double mu, double delta) {
  const double k = mu * delta;
  double hi = 10.0 * mu * (1.0 + std::abs(delta));
  if (k > 0.0) hi = std::max(hi, 4.0 / k + 4.0 * std::cbrt(mu / (k * k)));
  auto f = [&](double a) {
    const long double s = 1.0L - static_cast<long double>(mu) * delta * a;
    return static_cast<double>(a * s * s - mu);
  };
  return scan(f, 1e-14, hi, 400000);
}

struct Params {
  double mu0, mu1, w2, w02, w12;
  double d0() const { return w02 - w2; }
  double d1() const { return w12 - w2; }
};

/// Oscillatory secular function, written from the frequency-space boundary
/// rows: X = cos(wx) + c sin(wx) with X'(0) = mu0 (d0 - w^2) X(0) gives
/// c = mu0 (d0 - w^2) / w; the row at x = 1 is X'(1) + mu1 (d1 - w^2) X(1).
/// Multiplying by w makes it the printed combination.
inline double secular_negative(double w, const Params& p) {
  const double c = p.mu0 * (p.d0() - w * w) / w;
  const double x1 = std::cos(w) + c * std::sin(w);
  const double dx1 = w * (-std::sin(w) + c * std::cos(w));
  return -w * (dx1 + p.mu1 * (p.d1() - w * w) * x1);
}

/// First `count` oscillatory roots from a uniform scan at `per_pi` points per pi.
inline std::vector<double> negative_roots(const Params& p, int count, int per_pi = 2048) {
  std::vector<double> roots;
  auto f = [&](double w) { return secular_negative(w, p) / w; };
  double lo = 1e-9;
  while (static_cast<int>(roots.size()) < count) {
    const double hi = lo + std::numbers::pi;
    for (double r : scan(f, lo, hi, per_pi)) roots.push_back(r);
    lo = hi;
  }
  roots.resize(static_cast<std::size_t>(count));
  return roots;
}

/// Exponential-family roots on (0, hi) by a scan with `steps` subdivisions.
inline std::vector<double> positive_roots(const Params& p, double hi, int steps = 10000) {
  auto f = [&](double w) {
    const double m0 = p.mu0 * (w * w + p.d0()), m1 = p.mu1 * (w * w + p.d1());
    return (std::exp(-w) * (w - m0) * (w - m1) - std::exp(w) * (w + m0) * (w + m1)) / w;
  };
  return scan(f, 1e-9, hi, steps);
}

/// Eigenvalues lambda (descending) of the lumped P1 discretisation of
///   X'' = lambda X,  X'(0) = mu0 (lambda + d0) X(0),  X'(1) = -mu1 (lambda + d1) X(1).
/// Weak form: -K x - diag(mu0 d0, 0, .., mu1 d1) x = lambda (M + diag(mu0, 0, .., mu1)) x.
/// The mass matrix is diagonal, so the pencil reduces to a symmetric tridiagonal problem.
inline std::vector<double> matrix_eigenvalues(const Params& p, int n, int count) {
  const double h = 1.0 / n;
  Eigen::VectorXd a_diag(n + 1), a_sub(n), b(n + 1);
  for (int i = 0; i <= n; ++i) {
    const bool end = i == 0 || i == n;
    a_diag(i) = -(end ? 1.0 : 2.0) / h;
    b(i) = end ? 0.5 * h : h;
  }
  for (int i = 0; i < n; ++i) a_sub(i) = 1.0 / h;
  a_diag(0) -= p.mu0 * p.d0();
  a_diag(n) -= p.mu1 * p.d1();
  b(0) += p.mu0;
  b(n) += p.mu1;
  const Eigen::VectorXd s = b.cwiseSqrt().cwiseInverse();
  Eigen::VectorXd diag(n + 1), sub(n);
  for (int i = 0; i <= n; ++i) diag(i) = a_diag(i) * s(i) * s(i);
  for (int i = 0; i < n; ++i) sub(i) = a_sub(i) * s(i) * s(i + 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), std::greater<>());
  ev.resize(static_cast<std::size_t>(count));
  return ev;
}

/// int_0^1 (a cos wx + b sin wx)(c cos vx + d sin vx) dx in closed form.
inline double trig_product_integral(double a, double b, double w, double c, double d, double v) {
  auto cc = [](double p, double q) {  // int cos(px) cos(qx)
    auto term = [](double s) { return std::abs(s) < 1e-12 ? 1.0 : std::sin(s) / s; };
    return 0.5 * (term(p - q) + term(p + q));
  };
  auto ss = [](double p, double q) {
    auto term = [](double s) { return std::abs(s) < 1e-12 ? 1.0 : std::sin(s) / s; };
    return 0.5 * (term(p - q) - term(p + q));
  };
  auto sc = [](double p, double q) {  // int sin(px) cos(qx)
    auto term = [](double s) { return std::abs(s) < 1e-12 ? 0.0 : (1.0 - std::cos(s)) / s; };
    return 0.5 * (term(p + q) + term(p - q));
  };
  return a * c * cc(w, v) + a * d * sc(v, w) + b * c * sc(w, v) + b * d * ss(w, v);
}

}  // namespace oracle
