#pragma once

#include <cstdint>
#include <vector>

#include "detfield/charpoly.hpp"
#include "detfield/gaussfield.hpp"

namespace detfield {

struct BiasClassParams {
  int k = 0;
  int l = 0;
  double epsilon = 0.1;  // hyperbolic separation
  double delta = 0.25;
  double N = 64;
  double omega_arg = pi / 2;  // anchor of the comparison domain
};

// Membership in the separated class: all points in the comparison domain, |plus| = |minus| = k,
// disjoint, pairwise hyperbolic distance >= epsilon.
bool validate_separated_bias(const BiasSpec& bias, const BiasClassParams& params);

// Pairing check for extra (z, w) pairs on top of base: d_H(z, w) is at most the distance from
// z to every other point of Z and from w to every other point of W. Extra points must also
// lie in the comparison domain.
bool validate_paired_bias(const BiasSpec& base, const std::vector<std::pair<DiskPoint, DiskPoint>>& extra,
                          const BiasClassParams& params);

// E e^{B(Z_N)} / E e^{B(G)}
double mem_ratio(const OPTable& t, const EquilibriumModel& m, const BiasSpec& bias);

// Singleton pair near e^{i omega_arg}: plus at angle omega_arg + 0.5 e^{-d}, minus at
// omega_arg - 0.5 e^{-d}, both at hyperbolic depth d = log(N)/2.
BiasSpec singleton_pair_bias(int N, double omega_arg = pi / 2);

struct MemRow {
  int N = 0;
  int bias_id = 0;
  double ratio = 1.0;
  double abs_error = 0.0;
  double imag_residue = 0.0;
};
// Bias suite: id 0 is the singleton pair at omega = i, ids 1..translates are its rotations by
// multiples of 0.25 rad.
std::vector<MemRow> mem_suite(const EquilibriumModel& m, const std::vector<int>& Ns, int translates = 2,
                              int threads = 1);

// L_d(T, S) with d the pseudohyperbolic metric; T, S given as index masks into Z, W.
double matching_ratio(const std::vector<DiskPoint>& Z, const std::vector<DiskPoint>& W,
                      const std::vector<bool>& in_T, const std::vector<bool>& in_S);
// sup over all 2^{|Z|+|W|} subset choices.
double matching_sup(const std::vector<DiskPoint>& Z, const std::vector<DiskPoint>& W);

struct PairConfiguration {
  std::vector<DiskPoint> z;
  std::vector<DiskPoint> w;
  int l_paired = 0;  // first l_paired pairs are the tight ones
  double epsilon = 0.3;
};
bool pair_config_validate(const PairConfiguration& c);
// Random valid configuration with k + l pairs; rejection sampling from stream (seed, index).
PairConfiguration random_pair_configuration(int k, int l, double epsilon, std::uint64_t seed, std::uint64_t index);

struct MatchingSummary {
  long trials = 0;
  double sup_first_half = 0.0;
  double sup_all = 0.0;
  bool finite = true;
  std::vector<double> per_trial;
};
MatchingSummary matching_experiment(long trials, double epsilon, int max_pairs, std::uint64_t seed,
                                    int threads = 1);

struct LowerBoundParams {
  int n = 10;
  double delta = 0.2;
  int eta = 3;
  int stride = 1;  // Omega decimation

  int n0() const;
  int step() const;
  int b(int k) const { return k * step(); }
  int r() const;  // smallest k with b_k >= 2 atanh(1 - e^{-2 delta n})
  void validate() const;
};

// e^{i(pi/2 + h e^{-n0})}, |h| < e^{-delta n} e^{n0}, h a multiple of stride; returned as angles.
std::vector<double> omega_grid(const LowerBoundParams& p);

// Closest integer to -log|w1 - w2|, capped at n0.
int midpoint(double theta1, double theta2, int n0);

// F values along one ray: ray[k] = F(omega zeta_{b_k}) for k = r+1..eta (index k - r - 1),
// anchor = F(i zeta_{b_r}).
bool barrier_indicator(const std::vector<double>& ray, double anchor, const LowerBoundParams& p);

struct TwoPointBin {
  int m = 0;
  long pairs = 0;
  double mc_ratio = 0.0;     // sum E[Y1 Y2] / sum E Y1 E Y2, empirical with indicators
  double exact_ratio = 0.0;  // same with indicators dropped, from the kernel
  double exact_min = 0.0, exact_max = 0.0;  // per-pair exp Cov(B1, B2)
  double ray_anchor_min = 0.0, ray_anchor_max = 0.0;  // same with anchor omega zeta_{b_r}
};

struct LowerBoundResult {
  LowerBoundParams params;
  long n_samples = 0;
  std::size_t omega_count = 0;
  std::size_t point_count = 0;
  double p_z_positive = 0.0;
  double p_z_se = 0.0;
  double cs_ratio = 0.0;
  double one_point_min = 0.0, one_point_max = 0.0;  // mean Y(omega) / E e^{B_omega}
  double barrier_pass_biased = 0.0;                  // under the e^{B_omega}-tilted law
  double recentered_max_median = 0.0;
  double recentered_max_fraction = 0.0;  // fraction of runs above (1 - 2 delta) n
  std::vector<TwoPointBin> bins;
  Factorization factorization = Factorization::cholesky;
};

LowerBoundResult lower_bound_mc(const LowerBoundParams& p, long n_samples, std::uint64_t seed, int threads = 1);

}  // namespace detfield
