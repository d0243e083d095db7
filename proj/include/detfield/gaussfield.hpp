#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "detfield/hyperbolic.hpp"

namespace detfield {

enum class KernelKind { G, T };

// B(F) = sum_{z in plus} 2F(z) - sum_{w in minus} 2F(w)
struct BiasSpec {
  std::vector<DiskPoint> plus;
  std::vector<DiskPoint> minus;
};

double cov_g(const DiskPoint& z, const DiskPoint& w);
double cov_t(const DiskPoint& z, const DiskPoint& w);
double kernel_cov(KernelKind kind, const DiskPoint& z, const DiskPoint& w);

// log E[e^{B(G)}] from the product formula, summed in log domain.
double log_exp_moment_g(const BiasSpec& bias);
double exp_moment_g(const BiasSpec& bias);

// Var B(W) for the given kernel, as the quadratic form v^T K v.
double bias_variance(const BiasSpec& bias, KernelKind kind);

// E[W(zeta) B(W)]: the mean shift of W(zeta) after tilting by e^{B(W)}.
double biased_mean(const BiasSpec& bias, KernelKind kind, const DiskPoint& zeta);

Eigen::MatrixXd covariance_matrix(const std::vector<DiskPoint>& points, KernelKind kind);

enum class Factorization { cholesky, eigen };

// Factorizes the covariance once; row r of any draw comes from RNG stream (seed, r).
class GaussSampler {
 public:
  GaussSampler(const std::vector<DiskPoint>& points, KernelKind kind);
  void draw(std::uint64_t seed, std::uint64_t row, double* out) const;
  Factorization factorization() const { return kind_; }
  std::size_t size() const { return static_cast<std::size_t>(factor_.rows()); }
  double clipped_mass() const { return clipped_; }

 private:
  Eigen::MatrixXd factor_;
  Factorization kind_ = Factorization::cholesky;
  double clipped_ = 0.0;
};

struct FieldSample {
  std::vector<DiskPoint> points;
  Eigen::MatrixXd values;  // n_samples x n_points
  std::uint64_t seed = 0;
  Factorization factorization = Factorization::cholesky;
};

FieldSample sample_gauss(const std::vector<DiskPoint>& points, KernelKind kind, int n_samples,
                         std::uint64_t seed, int threads = 1);

void write_field_csv(const FieldSample& sample, std::ostream& os);

struct BrwStats {
  double c_b = 0.0;
  double c_c = 0.0;
  double k_offset_min = 0.0;
  double k_offset_max = 0.0;
  int close_pairs = 0;
};
BrwStats brw_check(const std::vector<DiskPoint>& grid, KernelKind kind);

}  // namespace detfield
