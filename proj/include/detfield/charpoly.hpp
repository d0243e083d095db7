#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "detfield/gaussfield.hpp"
#include "detfield/orthopoly.hpp"

namespace detfield {

// prod_{i<j} (x_j - x_i); 1 for fewer than two points.
cplx vandermonde_det(const std::vector<cplx>& x);

// Determinant of a matrix whose entries are given as LogComplex. Each row and then each
// column is divided by its largest entry before partial-pivot LU; scales are added back.
LogComplex log_scaled_det(const std::vector<std::vector<LogComplex>>& rows);

// E[ prod det(p_i - A) / prod det(q_j - A) ] for equal-length tuples, through the
// 2l x 2l determinant in (pi_N, h_N, pi~_N, h~_N).
cplx fs_balanced(const OPTable& t, const std::vector<cplx>& p, const std::vector<cplx>& q);

// Same expectation for l = |p|, k = |q| <= 4, from the (k+l)x(k+l) determinant in
// h_{N-k..N+l-1}(q_j), pi_{N-k..N+l-1}(p_i). Row i of the p block is multiplied by
// p_row_factor[i] and row j of the q block by q_row_factor[j] when those are given,
// which lets callers fold e^{-N g} normalizations in before the determinant.
LogComplex fs_general_log(const OPTable& t, const std::vector<cplx>& p, const std::vector<cplx>& q,
                          const std::vector<LogComplex>& p_row_factor = {},
                          const std::vector<LogComplex>& q_row_factor = {});
cplx fs_general(const OPTable& t, const std::vector<cplx>& p, const std::vector<cplx>& q);

// |A V(q)  B V(q)|
// |C V(p)  D V(p)| for diagonal A..D given by their diagonals.
cplx block_vandermonde_det(const std::vector<cplx>& A, const std::vector<cplx>& B, const std::vector<cplx>& C,
                           const std::vector<cplx>& D, const std::vector<cplx>& p, const std::vector<cplx>& q);
// The same determinant by Laplace expansion over the row subsets S (q rows), T (p rows).
cplx laplace_split(const std::vector<cplx>& A, const std::vector<cplx>& B, const std::vector<cplx>& C,
                   const std::vector<cplx>& D, const std::vector<cplx>& p, const std::vector<cplx>& q);
// laplace_split / (Delta(q) Delta(p)), with the Vandermonde ratios formed termwise.
cplx laplace_split_normalized(const std::vector<cplx>& A, const std::vector<cplx>& B, const std::vector<cplx>& C,
                              const std::vector<cplx>& D, const std::vector<cplx>& p, const std::vector<cplx>& q);

// Images p = J(conj Z u Z), q = J(conj W u W) of a bias.
void bias_images(const BiasSpec& bias, std::vector<cplx>& p, std::vector<cplx>& q);

struct FieldMoment {
  double value = 1.0;
  double imag_residue = 0.0;  // |Im| / |Re| before discarding
};

// E[e^{B(Z_N)}], Z_N = Q_N o J, through the M_N-entry determinant (Laplace route).
FieldMoment exp_moment_field(const OPTable& t, const EquilibriumModel& m, const BiasSpec& bias);
// Same quantity through the direct log-scaled block determinant.
FieldMoment exp_moment_field_direct(const OPTable& t, const EquilibriumModel& m, const BiasSpec& bias);

// E e^{+-2 Q_N(q)}
double exp_pm2_moment(const OPTable& t, const EquilibriumModel& m, cplx q, int sign);

struct McEstimate {
  cplx mean;
  double se_re = 0.0;
  double se_im = 0.0;
  long n = 0;
};

// Mean of f(eigenvalues) over GUE spectra of size N; sample i uses stream (seed, i).
// Standard errors by batch means over 100 batches.
McEstimate mc_gue_mean(int N, long n_samples, std::uint64_t seed, int threads,
                       const std::function<cplx(const std::vector<double>&)>& f);

cplx char_ratio(const std::vector<double>& eig, const std::vector<cplx>& p, const std::vector<cplx>& q);

}  // namespace detfield
