#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "detfield/common.hpp"

namespace detfield {

struct Interval {
  double lo;
  double hi;
};

// Potential V with its equilibrium density rho for the weight e^{-N V}. The density is
// supplied by the constructor, not solved for; ell_v is computed at construction and
// the Euler-Lagrange residual is exposed through ell_v_residual.
struct EquilibriumModel {
  std::string name;
  std::function<double(double)> V;
  std::function<double(double)> rho;
  std::vector<Interval> support;
  double rho_max = 0.0;
  double ell_v = 0.0;
  // Optional closed forms; when absent everything goes through quadrature.
  std::function<cplx(cplx)> g_closed;
  std::function<cplx(cplx)> stieltjes_closed;
  std::function<double(double)> log_potential_closed;  // x -> int log|x-u| rho(du), x real
  bool gaussian_weight = false;  // V = 2x^2 exactly
};

EquilibriumModel gue_model();
// V(x) = (2 - 3b/2) x^2 + b x^4, one-cut on [-1, 1] for -4/3 < b < 4.
EquilibriumModel quartic_model(double b);
// "gue", "quartic" (b = 1) or "quartic:<b>".
EquilibriumModel model_by_name(const std::string& name);

cplx stieltjes(const EquilibriumModel& m, cplx q);
cplx stieltjes_quadrature(const EquilibriumModel& m, cplx q);

// g(q) = int log(q - u) rho(du), principal branch, analytic off (-inf, right edge].
cplx g_eval(const EquilibriumModel& m, cplx q);
cplx g_quadrature(const EquilibriumModel& m, cplx q);

// Re g(q) = int log|q - u| rho(du); valid for all q including the support.
double log_potential(const EquilibriumModel& m, cplx q);
double log_potential_quadrature(const EquilibriumModel& m, double x);
inline double g_tilde(const EquilibriumModel& m, double x) { return -log_potential(m, x); }

// 2 int log|x-u| rho(du) - V(x), by quadrature.
double ell_v_residual(const EquilibriumModel& m, double x);

double support_left(const EquilibriumModel& m);
double support_right(const EquilibriumModel& m);

enum class SamplerKind { tridiagonal, mcmc };

struct Spectrum {
  int N = 0;
  std::vector<double> eigenvalues;  // ascending
  std::string model;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  SamplerKind sampler = SamplerKind::tridiagonal;
  double acceptance_rate = 1.0;
  bool acceptance_flagged = false;
  std::vector<double> energy_trace;
};

// Eigenvalues of the symmetric tridiagonal matrix (diag, off) by implicit QL; ascending.
std::vector<double> tridiag_eigenvalues(std::vector<double> diag, std::vector<double> off);

Spectrum sample_spectrum_gue(int N, std::uint64_t seed, std::uint64_t stream = 0);
Spectrum sample_spectrum_mcmc(const EquilibriumModel& m, int N, int sweeps, double step,
                              std::uint64_t seed, std::uint64_t stream = 0);

void write_spectrum(const Spectrum& s, const std::filesystem::path& csv_path);
Spectrum read_spectrum(const std::filesystem::path& csv_path);

}  // namespace detfield
