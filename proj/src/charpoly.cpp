#include "detfield/charpoly.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "detfield/format.hpp"
#include "detfield/parallel.hpp"

namespace detfield {

cplx vandermonde_det(const std::vector<cplx>& x) {
  cplx d{1.0, 0.0};
  for (std::size_t j = 1; j < x.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) d *= x[j] - x[i];
  return d;
}

LogComplex log_scaled_det(const std::vector<std::vector<LogComplex>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) return LogComplex::from(1.0);
  // both scalings in the log domain; scaling in doubles would underflow entries like e^{-800}
  std::vector<double> rs(n), cs(n, -std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n) throw DomainError("log_scaled_det needs a square matrix");
    rs[i] = -std::numeric_limits<double>::infinity();
    for (const auto& e : rows[i]) rs[i] = std::max(rs[i], e.log_mag);
    if (std::isinf(rs[i])) return {};  // zero row
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) cs[j] = std::max(cs[j], rows[i][j].log_mag - rs[i]);
    if (std::isinf(cs[j])) return {};
  }
  Eigen::MatrixXcd A(n, n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += rs[i] + cs[i];
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rows[i][j].scaled(rs[i] + cs[j]);
  }
  LogComplex d = LogComplex::from(Eigen::PartialPivLU<Eigen::MatrixXcd>(A).determinant());
  if (!d.is_zero()) d.log_mag += total;
  return d;
}

namespace {

void require_distinct(const std::vector<cplx>& x, const char* what) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (x[i] == x[j]) throw DomainError(std::string("coincident points in ") + what);
}

void require_off_axis(const std::vector<cplx>& q) {
  for (cplx z : q)
    if (z.imag() == 0.0) throw DomainError("denominator point on the real axis");
}

LogComplex minus_2pi_i_gamma_sq(const OPTable& t, int n) {
  return {std::log(2.0 * pi) + t.log_gamma_sq(n), cplx{0.0, -1.0}};
}

LogComplex power(cplx x, int c) { return LogComplex::from(std::pow(x, c)); }

}  // namespace

cplx fs_balanced(const OPTable& t, const std::vector<cplx>& p, const std::vector<cplx>& q) {
  const std::size_t l = p.size();
  if (l == 0 || q.size() != l) throw DomainError("fs_balanced needs two tuples of equal length >= 1");
  if (t.N < static_cast<int>(l)) throw DomainError("fs_balanced needs N >= l");
  require_distinct(p, "p");
  require_distinct(q, "q");
  require_off_axis(q);
  const LogComplex c = minus_2pi_i_gamma_sq(t, t.N - 1);
  std::vector<std::vector<LogComplex>> rows;
  for (cplx z : q) {
    auto [hm, hn] = eval_h_pair(t, t.N, z);
    LogComplex ht = c * hm;
    std::vector<LogComplex> r;
    for (std::size_t k = 0; k < l; ++k) r.push_back(ht * power(z, static_cast<int>(k)));
    for (std::size_t k = 0; k < l; ++k) r.push_back(hn * power(z, static_cast<int>(k)));
    rows.push_back(std::move(r));
  }
  for (cplx z : p) {
    auto [pm, pn] = eval_pi_pair(t, t.N, z);
    LogComplex pt = c * pm;
    std::vector<LogComplex> r;
    for (std::size_t k = 0; k < l; ++k) r.push_back(pt * power(z, static_cast<int>(k)));
    for (std::size_t k = 0; k < l; ++k) r.push_back(pn * power(z, static_cast<int>(k)));
    rows.push_back(std::move(r));
  }
  LogComplex d = log_scaled_det(rows) / LogComplex::from(vandermonde_det(q) * vandermonde_det(p));
  return d.value();
}

LogComplex fs_general_log(const OPTable& t, const std::vector<cplx>& p, const std::vector<cplx>& q,
                          const std::vector<LogComplex>& pf, const std::vector<LogComplex>& qf) {
  const int l = static_cast<int>(p.size()), k = static_cast<int>(q.size());
  if (l > 4 || k > 4) throw DomainError("fs_general supports at most 4 points on each side");
  if (t.N < k) throw DomainError("fs_general needs N >= k");
  if ((!pf.empty() && pf.size() != p.size()) || (!qf.empty() && qf.size() != q.size()))
    throw DomainError("row factor count mismatch");
  require_distinct(p, "p");
  require_distinct(q, "q");
  require_off_axis(q);
  if (k + l == 0) return LogComplex::from(1.0);
  std::vector<std::vector<LogComplex>> rows;
  for (int j = 0; j < k; ++j) {
    std::vector<LogComplex> r;
    for (int n = t.N - k; n <= t.N + l - 1; ++n) {
      LogComplex h = eval_h(t, n, q[j]);
      r.push_back(qf.empty() ? h : h * qf[j]);
    }
    rows.push_back(std::move(r));
  }
  for (int i = 0; i < l; ++i) {
    std::vector<LogComplex> r;
    for (int n = t.N - k; n <= t.N + l - 1; ++n) {
      LogComplex v = eval_pi(t, n, p[i]);
      r.push_back(pf.empty() ? v : v * pf[i]);
    }
    rows.push_back(std::move(r));
  }
  LogComplex pre = LogComplex::from(1.0);
  for (int j = 1; j <= k; ++j) pre = pre * minus_2pi_i_gamma_sq(t, t.N - j);
  if ((k * (k - 1) / 2) % 2 == 1) pre = pre * cplx{-1.0, 0.0};
  return pre * log_scaled_det(rows) / LogComplex::from(vandermonde_det(q) * vandermonde_det(p));
}

cplx fs_general(const OPTable& t, const std::vector<cplx>& p, const std::vector<cplx>& q) {
  return fs_general_log(t, p, q).value();
}

namespace {

void check_blocks(const std::vector<cplx>& A, const std::vector<cplx>& B, const std::vector<cplx>& C,
                  const std::vector<cplx>& D, const std::vector<cplx>& p, const std::vector<cplx>& q) {
  const std::size_t l = p.size();
  if (q.size() != l || A.size() != l || B.size() != l || C.size() != l || D.size() != l)
    throw DomainError("block sizes disagree");
}

template <class Combine>
cplx laplace_terms(const std::vector<cplx>& A, const std::vector<cplx>& B, const std::vector<cplx>& C,
                   const std::vector<cplx>& D, const std::vector<cplx>& p, const std::vector<cplx>& q,
                   Combine&& vdm) {
  check_blocks(A, B, C, D, p, q);
  const int l = static_cast<int>(p.size());
  if (l > 6) throw DomainError("laplace_split limited to l <= 6");
  if (l == 0) return 1.0;
  cplx total{};
  // rows 1..l carry q, rows l+1..2l carry p; R picks the rows feeding the left block
  for (unsigned R = 0; R < (1u << (2 * l)); ++R) {
    if (std::popcount(R) != l) continue;
    std::vector<cplx> left, right;
    cplx w{1.0, 0.0};
    int rowsum = 0;
    for (int i = 0; i < l; ++i) {
      if (R >> i & 1u) {
        left.push_back(q[i]);
        w *= A[i];
        rowsum += i + 1;
      } else {
        right.push_back(q[i]);
        w *= B[i];
      }
    }
    for (int i = 0; i < l; ++i) {
      if (R >> (l + i) & 1u) {
        left.push_back(p[i]);
        w *= C[i];
        rowsum += l + i + 1;
      } else {
        right.push_back(p[i]);
        w *= D[i];
      }
    }
    if (w == cplx{}) continue;
    int sign_exp = rowsum + l * (l + 1) / 2;
    cplx term = w * vdm(left, right);
    total += sign_exp % 2 == 0 ? term : -term;
  }
  return total;
}

}  // namespace

cplx laplace_split(const std::vector<cplx>& A, const std::vector<cplx>& B, const std::vector<cplx>& C,
                   const std::vector<cplx>& D, const std::vector<cplx>& p, const std::vector<cplx>& q) {
  return laplace_terms(A, B, C, D, p, q, [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    return vandermonde_det(a) * vandermonde_det(b);
  });
}

cplx laplace_split_normalized(const std::vector<cplx>& A, const std::vector<cplx>& B, const std::vector<cplx>& C,
                              const std::vector<cplx>& D, const std::vector<cplx>& p, const std::vector<cplx>& q) {
  cplx norm = vandermonde_det(q) * vandermonde_det(p);
  if (norm == cplx{}) throw DomainError("coincident points: Vandermonde normalization vanishes");
  return laplace_terms(A, B, C, D, p, q, [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    // ratio of products of differences, accumulated factor by factor
    return vandermonde_det(a) * (vandermonde_det(b) / norm);
  });
}

cplx block_vandermonde_det(const std::vector<cplx>& A, const std::vector<cplx>& B, const std::vector<cplx>& C,
                           const std::vector<cplx>& D, const std::vector<cplx>& p, const std::vector<cplx>& q) {
  check_blocks(A, B, C, D, p, q);
  const std::size_t l = p.size();
  std::vector<std::vector<LogComplex>> rows;
  auto add = [&](cplx x, cplx left, cplx right) {
    std::vector<LogComplex> r;
    for (std::size_t c = 0; c < l; ++c) r.push_back(LogComplex::from(left * std::pow(x, static_cast<int>(c))));
    for (std::size_t c = 0; c < l; ++c) r.push_back(LogComplex::from(right * std::pow(x, static_cast<int>(c))));
    rows.push_back(std::move(r));
  };
  for (std::size_t i = 0; i < l; ++i) add(q[i], A[i], B[i]);
  for (std::size_t i = 0; i < l; ++i) add(p[i], C[i], D[i]);
  return log_scaled_det(rows).value();
}

void bias_images(const BiasSpec& bias, std::vector<cplx>& p, std::vector<cplx>& q) {
  p.clear();
  q.clear();
  for (const auto& z : bias.plus) p.push_back(std::conj(joukowsky(z)));
  for (const auto& z : bias.plus) p.push_back(joukowsky(z));
  for (const auto& w : bias.minus) q.push_back(std::conj(joukowsky(w)));
  for (const auto& w : bias.minus) q.push_back(joukowsky(w));
}

namespace {

struct MBlocks {
  std::vector<cplx> A, B, C, D, p, q;
};

MBlocks m_blocks(const OPTable& t, const EquilibriumModel& m, const BiasSpec& bias) {
  if (bias.plus.size() != bias.minus.size()) throw DomainError("exp_moment_field needs |Z| = |W|");
  MBlocks b;
  bias_images(bias, b.p, b.q);
  require_distinct(b.p, "J(Z)");
  require_distinct(b.q, "J(W)");
  for (cplx x : b.q) {
    RHMatrix M = m_matrix(t, m, x);
    b.A.push_back(M(1, 1));
    b.B.push_back(M(0, 1));
  }
  for (cplx x : b.p) {
    RHMatrix M = m_matrix(t, m, x);
    b.C.push_back(M(1, 0));
    b.D.push_back(M(0, 0));
  }
  return b;
}

FieldMoment finish(cplx v) {
  FieldMoment r;
  r.value = v.real();
  r.imag_residue = std::abs(v.imag()) / std::abs(v.real());
  if (!(r.imag_residue <= 1e-8))
    throw NumericalError("field moment has imaginary residue " + fmt17(r.imag_residue));
  if (!(r.value > 0.0)) throw NumericalError("field moment is not positive");
  return r;
}

}  // namespace

FieldMoment exp_moment_field(const OPTable& t, const EquilibriumModel& m, const BiasSpec& bias) {
  if (bias.plus.empty() && bias.minus.empty()) return {};
  MBlocks b = m_blocks(t, m, bias);
  return finish(laplace_split_normalized(b.A, b.B, b.C, b.D, b.p, b.q));
}

FieldMoment exp_moment_field_direct(const OPTable& t, const EquilibriumModel& m, const BiasSpec& bias) {
  if (bias.plus.empty() && bias.minus.empty()) return {};
  MBlocks b = m_blocks(t, m, bias);
  cplx d = block_vandermonde_det(b.A, b.B, b.C, b.D, b.p, b.q);
  return finish(d / (vandermonde_det(b.q) * vandermonde_det(b.p)));
}

double exp_pm2_moment(const OPTable& t, const EquilibriumModel& m, cplx q, int sign) {
  if (q.imag() == 0.0) throw DomainError("exp_pm2_moment needs q off the real axis");
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  std::vector<cplx> pts = {q, std::conj(q)};
  const double N = t.N;
  std::vector<LogComplex> f;
  for (cplx x : pts) f.push_back(LogComplex::exp_of(-sign * N * g_eval(m, x)));
  LogComplex v = sign > 0 ? fs_general_log(t, pts, {}, f, {}) : fs_general_log(t, {}, pts, {}, f);
  cplx z = v.value();
  if (std::abs(z.imag()) > 1e-8 * std::abs(z.real()) || !(z.real() > 0.0))
    throw NumericalError("E e^{+-2Q} evaluation is not real positive");
  return z.real();
}

cplx char_ratio(const std::vector<double>& eig, const std::vector<cplx>& p, const std::vector<cplx>& q) {
  cplx r{1.0, 0.0};
  for (double x : eig) {
    for (cplx a : p) r *= a - x;
    for (cplx b : q) r /= b - x;
  }
  return r;
}

McEstimate mc_gue_mean(int N, long n_samples, std::uint64_t seed, int threads,
                       const std::function<cplx(const std::vector<double>&)>& f) {
  if (n_samples < 2) throw DomainError("need at least two samples");
  const long B = std::min<long>(100, n_samples);
  std::vector<cplx> sums(B);
  std::vector<long> counts(B);
  parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
    long lo = n_samples * static_cast<long>(b) / B, hi = n_samples * (static_cast<long>(b) + 1) / B;
    cplx s{};
    for (long i = lo; i < hi; ++i) s += f(sample_spectrum_gue(N, seed, static_cast<std::uint64_t>(i)).eigenvalues);
    sums[b] = s;
    counts[b] = hi - lo;
  });
  McEstimate e;
  e.n = n_samples;
  cplx total{};
  for (long b = 0; b < B; ++b) total += sums[b];
  e.mean = total / static_cast<double>(n_samples);
  double vr = 0.0, vi = 0.0;
  for (long b = 0; b < B; ++b) {
    cplx d = sums[b] / static_cast<double>(counts[b]) - e.mean;
    vr += d.real() * d.real();
    vi += d.imag() * d.imag();
  }
  e.se_re = std::sqrt(vr / (B - 1) / B);
  e.se_im = std::sqrt(vi / (B - 1) / B);
  return e;
}

}  // namespace detfield
