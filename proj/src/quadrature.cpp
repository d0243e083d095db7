#include "detfield/quadrature.hpp"

#include <algorithm>

namespace detfield {

GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[n - 1 - i] = x;
    r.nodes[i] = -x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  return r;
}

const GaussRule& gl20() {
  static const GaussRule rule = gauss_legendre(20);
  return rule;
}

namespace {

template <class T, class F>
T panel(const F& f, double a, double b) {
  const auto& g = gl20();
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T s{};
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(c + h * g.nodes[i]);
  return s * h;
}

template <class T, class F>
T adapt(const F& f, double a, double b, T whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  T left = panel<T>(f, a, m), right = panel<T>(f, m, b);
  T both = left + right;
  if (depth <= 0 || std::abs(both - whole) <= tol || m <= a || m >= b) return both;
  return adapt<T>(f, a, m, left, tol, depth - 1) + adapt<T>(f, m, b, right, tol, depth - 1);
}

// Absolute panel tolerance from a coarse 8-panel pass: rel_tol times the integral, but
// never below what rounding in the integrand (1e-15 of int |f|) allows.
template <class T, class F>
T run(const F& f, double a, double b, double rel_tol, double abs_tol, int max_depth) {
  if (a == b) return T{};
  T coarse{};
  double mag = 0.0;
  const auto& g = gl20();
  for (int p = 0; p < 8; ++p) {
    double lo = a + (b - a) * p / 8.0, hi = a + (b - a) * (p + 1) / 8.0;
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      T v = f(c + h * g.nodes[i]);
      coarse += g.weights[i] * h * v;
      mag += g.weights[i] * std::abs(h) * std::abs(v);
    }
  }
  double tol = std::max({abs_tol, rel_tol * std::abs(coarse), 1e-15 * mag});
  return adapt<T>(f, a, b, panel<T>(f, a, b), tol, max_depth);
}

}  // namespace

cplx integrate_adaptive(const std::function<cplx(double)>& f, double a, double b, double rel_tol,
                        double abs_tol, int max_depth) {
  return run<cplx>(f, a, b, rel_tol, abs_tol, max_depth);
}

double integrate_adaptive_real(const std::function<double(double)>& f, double a, double b,
                               double rel_tol, double abs_tol, int max_depth) {
  return run<double>(f, a, b, rel_tol, abs_tol, max_depth);
}

cplx integrate_with_breaks(const std::function<cplx(double)>& f, double a, double b,
                           std::vector<double> breaks, double rel_tol) {
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [&](double x) { return !(x > a && x < b); }),
               breaks.end());
  std::sort(breaks.begin(), breaks.end());
  cplx total{};
  double lo = a;
  for (double x : breaks) {
    total += integrate_adaptive(f, lo, x, rel_tol);
    lo = x;
  }
  total += integrate_adaptive(f, lo, b, rel_tol);
  return total;
}

}  // namespace detfield
