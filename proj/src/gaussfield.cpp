#include "detfield/gaussfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "detfield/format.hpp"
#include "detfield/parallel.hpp"
#include "detfield/rng.hpp"

namespace detfield {

namespace {

double log_cosh(double x) {
  x = std::abs(x);
  return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
}

double log_abs_one_minus(cplx z, cplx w) {
  double a = std::abs(1.0 - z * std::conj(w));
  if (!(a > std::numeric_limits<double>::min()))
    throw NumericalError("degenerate bias: |1 - z conj(w)| underflows");
  return std::log(a);
}

}  // namespace

double cov_g(const DiskPoint& z, const DiskPoint& w) {
  // -1/2 log|1 - z conj(w)| written through hyperbolic distances, exact near the circle
  return 0.5 * (log_cosh(0.5 * z.rho) + log_cosh(0.5 * w.rho) - log_cosh(0.5 * hyp_dist(z, w)));
}

double cov_t(const DiskPoint& z, const DiskPoint& w) { return cov_g(z, w) + cov_g(z, w.conj()); }

double kernel_cov(KernelKind kind, const DiskPoint& z, const DiskPoint& w) {
  return kind == KernelKind::G ? cov_g(z, w) : cov_t(z, w);
}

double log_exp_moment_g(const BiasSpec& bias) {
  double s = 0.0;
  for (const auto& z : bias.plus)
    for (const auto& w : bias.minus) s += 2.0 * log_abs_one_minus(z.z(), w.z());
  for (const auto& a : bias.plus)
    for (const auto& b : bias.plus) s -= log_abs_one_minus(a.z(), b.z());
  for (const auto& a : bias.minus)
    for (const auto& b : bias.minus) s -= log_abs_one_minus(a.z(), b.z());
  return s;
}

double exp_moment_g(const BiasSpec& bias) { return std::exp(log_exp_moment_g(bias)); }

double bias_variance(const BiasSpec& bias, KernelKind kind) {
  std::vector<DiskPoint> pts = bias.plus;
  pts.insert(pts.end(), bias.minus.begin(), bias.minus.end());
  Eigen::VectorXd v(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) v[i] = i < bias.plus.size() ? 2.0 : -2.0;
  Eigen::MatrixXd K = covariance_matrix(pts, kind);
  return v.dot(K * v);
}

double biased_mean(const BiasSpec& bias, KernelKind kind, const DiskPoint& zeta) {
  double m = 0.0;
  for (const auto& z : bias.plus) m += 2.0 * kernel_cov(kind, zeta, z);
  for (const auto& w : bias.minus) m -= 2.0 * kernel_cov(kind, zeta, w);
  return m;
}

Eigen::MatrixXd covariance_matrix(const std::vector<DiskPoint>& points, KernelKind kind) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) K(i, j) = K(j, i) = kernel_cov(kind, points[i], points[j]);
  return K;
}

GaussSampler::GaussSampler(const std::vector<DiskPoint>& points, KernelKind kind) {
  Eigen::MatrixXd K = covariance_matrix(points, kind);
  const auto n = K.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) {
    factor_ = llt.matrixL();
    kind_ = Factorization::cholesky;
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  if (es.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues();
  double floor = -1e-8 * K.trace() / static_cast<double>(n);
  if (lam.minCoeff() < floor)
    throw NumericalError("covariance is not positive semidefinite (near-duplicate points?)");
  for (Eigen::Index i = 0; i < n; ++i)
    if (lam[i] < 0.0) {
      clipped_ -= lam[i];
      lam[i] = 0.0;
    }
  factor_ = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  kind_ = Factorization::eigen;
}

void GaussSampler::draw(std::uint64_t seed, std::uint64_t row, double* out) const {
  const auto n = factor_.rows();
  Philox rng(seed, row);
  Eigen::VectorXd xi(n);
  for (Eigen::Index i = 0; i < n; ++i) xi[i] = rng.normal();
  Eigen::Map<Eigen::VectorXd>(out, n) = factor_ * xi;
}

FieldSample sample_gauss(const std::vector<DiskPoint>& points, KernelKind kind, int n_samples,
                         std::uint64_t seed, int threads) {
  if (n_samples < 1) throw DomainError("n_samples must be >= 1");
  GaussSampler sampler(points, kind);
  FieldSample s;
  s.points = points;
  s.seed = seed;
  s.factorization = sampler.factorization();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> v(n_samples, points.size());
  parallel_for(static_cast<std::size_t>(n_samples), threads,
               [&](std::size_t r) { sampler.draw(seed, r, v.row(static_cast<Eigen::Index>(r)).data()); });
  s.values = v;
  return s;
}

void write_field_csv(const FieldSample& s, std::ostream& os) {
  os << "sample_index,point_index,re_z,im_z,value\n";
  for (Eigen::Index r = 0; r < s.values.rows(); ++r)
    for (std::size_t p = 0; p < s.points.size(); ++p) {
      cplx z = s.points[p].z();
      os << r << ',' << p << ',' << fmt17(z.real()) << ',' << fmt17(z.imag()) << ','
         << fmt17(s.values(r, static_cast<Eigen::Index>(p))) << '\n';
    }
}

BrwStats brw_check(const std::vector<DiskPoint>& grid, KernelKind kind) {
  BrwStats st;
  st.k_offset_min = std::numeric_limits<double>::infinity();
  st.k_offset_max = -std::numeric_limits<double>::infinity();
  const std::size_t n = grid.size();
  Eigen::MatrixXd K = covariance_matrix(grid, kind);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const auto &p = grid[a], &q = grid[b];
      double s = std::abs(std::sin(0.5 * (p.theta - q.theta)));
      double m = std::min(p.rho, q.rho);
      if (s > 0.0) m = std::min(m, -std::log(s));
      double off = K(a, b) - 0.5 * m;
      st.k_offset_min = std::min(st.k_offset_min, off);
      st.k_offset_max = std::max(st.k_offset_max, off);
      if (a == b) continue;
      double d = hyp_dist(p, q);
      if (d > 1.0 || d == 0.0) continue;
      ++st.close_pairs;
      double var = K(a, a) + K(b, b) - 2.0 * K(a, b);
      st.c_b = std::max(st.c_b, var / (d * d));
      for (std::size_t y = 0; y < n; ++y) st.c_c = std::max(st.c_c, std::abs(K(y, a) - K(y, b)) / d);
    }
  }
  return st;
}

}  // namespace detfield
