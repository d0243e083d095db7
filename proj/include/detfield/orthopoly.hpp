#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "detfield/ensemble.hpp"
#include "detfield/logcomplex.hpp"

namespace detfield {

// Three-term recurrence data for the monic OPs of e^{-N V(x)} dx on R:
//   pi_{n+1} = (x - beta[n]) pi_n - a2[n] pi_{n-1},  a2[n] = (gamma_{n-1}/gamma_n)^2.
// a2[0] is unused and stored as 0.
struct OPTable {
  int N = 0;
  int n_max = 0;
  std::vector<double> beta;
  std::vector<double> a2;
  double gamma0 = 0.0;
  double log_gamma0 = 0.0;
  std::string model;
  bool gaussian = false;  // V = 2x^2: coefficients known in closed form for every n
  double orth_residual = 0.0;
  std::shared_ptr<const EquilibriumModel> weight;

  double beta_at(int n) const;
  double a2_at(int n) const;
  bool has(int n) const { return gaussian || n <= n_max; }
  // log gamma_n^2
  double log_gamma_sq(int n) const;
};

OPTable recurrence_table(const EquilibriumModel& model, int N, int n_max);
double gamma0(const EquilibriumModel& model, int N);
double log_gamma0(const EquilibriumModel& model, int N);
double gamma0_quadrature(const EquilibriumModel& model, int N);

// JSON cache {model, N, n_max, beta[], a2[], gamma0}.
void save_table(const OPTable& t, const std::filesystem::path& path);
OPTable load_table(const std::filesystem::path& path);
// Loads <dir>/<model>_N<N>_n<n_max>.json if present, otherwise builds and stores it.
OPTable cached_table(const EquilibriumModel& model, int N, int n_max, const std::filesystem::path& dir);

// Interval outside of which x^k e^{-N V(x)} is negligible for k <= n_max.
Interval weight_range(const OPTable& t);

LogComplex eval_pi(const OPTable& t, int n, cplx x);
// (pi_{n-1}, pi_n); pi_{-1} = 0
std::pair<LogComplex, LogComplex> eval_pi_pair(const OPTable& t, int n, cplx x);

// Faddeeva function w(z) = e^{-z^2} erfc(-iz), Im z >= 0.
cplx faddeeva_w(cplx z);

// h_n(q) = (2 pi i)^{-1} int pi_n(x) e^{-N V(x)} / (x - q) dx
cplx h0_gaussian(const OPTable& t, cplx q);
cplx h_quadrature(const OPTable& t, int n, cplx q);
LogComplex eval_h(const OPTable& t, int n, cplx q);
std::pair<LogComplex, LogComplex> eval_h_pair(const OPTable& t, int n, cplx q);  // (h_{n-1}, h_n)

enum class RHKind { Y, M, M_infinity };

// 2x2 matrix with entries kept as LogComplex; e = {11, 12, 21, 22}.
struct RHMatrix {
  std::array<LogComplex, 4> e;
  RHKind kind = RHKind::Y;
  cplx q;

  cplx operator()(int i, int j) const { return e[2 * i + j].value(); }
  LogComplex det() const { return lc_sub(e[0] * e[3], e[1] * e[2]); }
  double log_scale() const;  // max entry log-magnitude
  double norm() const;       // Frobenius norm
};

RHMatrix y_matrix(const OPTable& t, cplx q);
RHMatrix m_matrix(const OPTable& t, const EquilibriumModel& model, cplx q);

// gamma(q) = ((q+1)/(q-1))^{1/4}, principal roots, analytic off [-1, 1], -> 1 at infinity.
cplx gamma_onecut(cplx q);
RHMatrix global_parametrix_onecut(cplx q);
// Boundary value from the upper (side = +1) or lower (side = -1) half-plane, x in (-1, 1).
RHMatrix global_parametrix_boundary(double x, int side);

double r_weight(const EquilibriumModel& model, cplx q);

}  // namespace detfield
