#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "detfield/ensemble.hpp"

namespace detfield {

enum class Centering { g_centering, empirical_centering };

struct MaxRecord {
  int N = 0;
  std::uint64_t seed = 0;
  long seed_index = 0;
  double m_star = 0.0;        // max of Q_N over cheb_grid(N)
  double m_star_dense = 0.0;  // 8N+1 grid plus golden-section polish
  double m_star_reg = 0.0;    // max over the shifted grid x_k - i y/N
  double y = 0.0;
  Centering center = Centering::g_centering;
  bool ordering_ok = true;    // m_star <= m_star_reg + C_V y
};

// Q_N(q) = sum log|q - lambda_i| - N int log|q - u| rho(du)
double field_q(const Spectrum& s, const EquilibriumModel& m, cplx q);

// x_k = cos(pi (k-1) / 2N), k = 1..2N+1, descending from 1 to -1.
std::vector<double> cheb_grid(int N);

// out[k] = sum_i log|x_k + i*shift - lambda_i|. Products of 16 factors are formed before
// each log; this is the O(N^2) loop of the maximum experiment.
void log_abs_charpoly(const std::vector<double>& eig, const std::vector<double>& x, double shift,
                      std::vector<double>& out);

// N * int log|x + i*shift - u| rho(du) on a grid.
std::vector<double> centering_on_grid(const EquilibriumModel& m, int N, const std::vector<double>& x,
                                      double shift = 0.0);

struct Factor14 {
  double grid_max = 0.0;   // log of max |P| over cheb_grid(N)
  double dense_max = 0.0;  // log of max |P| over the dense grid after polishing
  double max_ratio = 1.0;  // exp(dense_max - grid_max)
};
// Polynomial given by its roots (monic); N = number of roots.
Factor14 factor14_roots(const std::vector<cplx>& roots);
// Polynomial sum c_k T_k(x); degree N = c.size() - 1 with c.back() != 0.
Factor14 factor14_chebyshev(const std::vector<double>& c);

// C_V = pi * max rho; bounds N (Re g(x - i y/N) - Re g(x)) <= C_V y.
double shift_constant(const EquilibriumModel& m);

MaxRecord regularized_max(const Spectrum& s, const EquilibriumModel& m, double y);

struct MaxSummary {
  int N = 0;
  long n_samples = 0;
  double median_ratio = 0.0, q1_ratio = 0.0, q3_ratio = 0.0;           // m_star / log N
  double median_centered = 0.0, q1_centered = 0.0, q3_centered = 0.0;  // m_star - (log N - 3/4 log log N)
  double upper_tail_fraction = 0.0;                                    // m_star > log N + 3 log log N
  long ordering_violations = 0;
  double max_dense_gap = 0.0;  // max (m_star_dense - m_star)
};

struct MaxExperimentConfig {
  int N = 256;
  long n_samples = 100;
  double y = 2.0;
  std::uint64_t seed = 1;
  int threads = 1;
  bool dense = true;
  int mcmc_sweeps = 200;  // used for non-Gaussian models
  double mcmc_step = 0.0;  // 0 selects 1/N
};

std::vector<MaxRecord> max_experiment(const EquilibriumModel& m, const MaxExperimentConfig& cfg);
MaxSummary summarize(const std::vector<MaxRecord>& records);
void write_max_csv(const std::vector<MaxRecord>& records, std::ostream& os);

Spectrum draw_spectrum(const EquilibriumModel& m, int N, std::uint64_t seed, std::uint64_t stream, int mcmc_sweeps,
                       double mcmc_step);

struct CenteringOffsets {
  std::vector<double> x;
  std::vector<double> offset;  // E sum log|x - lambda| - N int log|x - u| rho(du)
  std::vector<double> std_error;
};
CenteringOffsets empirical_centering(const EquilibriumModel& m, int N, long n_samples, std::uint64_t seed,
                                     int threads = 1);

double quantile(std::vector<double> v, double p);

}  // namespace detfield
