#include "detfield/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>

#include "detfield/format.hpp"
#include "detfield/parallel.hpp"

namespace detfield {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double field_q(const Spectrum& s, const EquilibriumModel& m, cplx q) {
  double acc = 0.0;
  for (double x : s.eigenvalues) {
    double d = std::abs(q - x);
    if (d == 0.0) return kNegInf;
    acc += std::log(d);
  }
  return acc - s.N * log_potential(m, q);
}

std::vector<double> cheb_grid(int N) {
  if (N < 1) throw DomainError("cheb_grid needs N >= 1");
  std::vector<double> x(2 * N + 1);
  for (int k = 0; k <= 2 * N; ++k) x[k] = std::cos(pi * k / (2.0 * N));
  x.front() = 1.0;
  x.back() = -1.0;
  x[N] = 0.0;
  return x;
}

void log_abs_charpoly(const std::vector<double>& eig, const std::vector<double>& x, double shift,
                      std::vector<double>& out) {
  constexpr std::size_t kBlock = 16;
  const std::size_t n = eig.size();
  const double s2 = shift * shift;
  out.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double xk = x[k];
    double acc = 0.0;
    std::size_t i = 0;
    for (; i + kBlock <= n; i += kBlock) {
      double prod = 1.0;
      for (std::size_t j = 0; j < kBlock; ++j) {
        double d = xk - eig[i + j];
        prod *= d * d + s2;
      }
      acc += std::log(prod);
    }
    double prod = 1.0;
    for (; i < n; ++i) {
      double d = xk - eig[i];
      prod *= d * d + s2;
    }
    acc += std::log(prod);
    out[k] = 0.5 * acc;
  }
}

std::vector<double> centering_on_grid(const EquilibriumModel& m, int N, const std::vector<double>& x,
                                      double shift) {
  std::vector<double> c(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) c[k] = N * log_potential(m, cplx{x[k], shift});
  return c;
}

namespace {

template <class F>
double golden_max(F&& f, double a, double b, int iters = 60) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters && b - a > 1e-15; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return std::max(fc, fd);
}

std::vector<double> dense_grid(int N) {
  const int M = 8 * N;
  std::vector<double> x(M + 1);
  for (int k = 0; k <= M; ++k) x[k] = std::cos(pi * k / M);
  x.front() = 1.0;
  x.back() = -1.0;
  return x;
}

// Max of f over the dense grid, then golden-section polish on the brackets of the
// `peaks` largest local maxima.
template <class F>
double dense_max(F&& f, const std::vector<double>& x, const std::vector<double>& fx, std::size_t peaks) {
  std::vector<std::size_t> loc;
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) {
    bool left = k == 0 || fx[k] >= fx[k - 1];
    bool right = k + 1 == n || fx[k] >= fx[k + 1];
    if (left && right) loc.push_back(k);
  }
  std::sort(loc.begin(), loc.end(), [&](std::size_t a, std::size_t b) { return fx[a] > fx[b]; });
  double best = *std::max_element(fx.begin(), fx.end());
  for (std::size_t i = 0; i < std::min(peaks, loc.size()); ++i) {
    std::size_t k = loc[i];
    double hi = x[k == 0 ? 0 : k - 1], lo = x[k + 1 == n ? n - 1 : k + 1];  // grid descends
    if (hi > lo) best = std::max(best, golden_max(f, lo, hi));
  }
  return best;
}

Factor14 factor14_from(const std::function<double(double)>& logp, int N, std::size_t peaks) {
  Factor14 r;
  r.grid_max = kNegInf;
  for (double x : cheb_grid(N)) r.grid_max = std::max(r.grid_max, logp(x));
  auto xd = dense_grid(N);
  std::vector<double> fd(xd.size());
  for (std::size_t k = 0; k < xd.size(); ++k) fd[k] = logp(xd[k]);
  r.dense_max = dense_max(logp, xd, fd, peaks);
  r.max_ratio = std::exp(r.dense_max - r.grid_max);
  return r;
}

}  // namespace

Factor14 factor14_roots(const std::vector<cplx>& roots) {
  const int N = static_cast<int>(roots.size());
  if (N == 0) return {0.0, 0.0, 1.0};
  auto logp = [&](double x) {
    double s = 0.0;
    for (cplx r : roots) s += std::log(std::abs(x - r));
    return s;
  };
  return factor14_from(logp, N, 16);
}

Factor14 factor14_chebyshev(const std::vector<double>& c) {
  if (c.empty()) throw DomainError("empty coefficient list");
  const int N = static_cast<int>(c.size()) - 1;
  if (N == 0) return {std::log(std::abs(c[0])), std::log(std::abs(c[0])), 1.0};
  if (c.back() == 0.0) throw DomainError("leading Chebyshev coefficient must be nonzero");
  auto logp = [&](double x) {
    // Clenshaw
    double b1 = 0.0, b2 = 0.0;
    for (int k = N; k >= 1; --k) {
      double b0 = 2.0 * x * b1 - b2 + c[k];
      b2 = b1;
      b1 = b0;
    }
    return std::log(std::abs(x * b1 - b2 + c[0]));
  };
  return factor14_from(logp, N, 16);
}

double shift_constant(const EquilibriumModel& m) { return pi * m.rho_max; }

MaxRecord regularized_max(const Spectrum& s, const EquilibriumModel& m, double y) {
  if (!(y >= 1.0)) throw DomainError("regularized_max needs y >= 1");
  const int N = s.N;
  auto x = cheb_grid(N);
  auto c0 = centering_on_grid(m, N, x, 0.0), c1 = centering_on_grid(m, N, x, -y / N);
  std::vector<double> a, b;
  log_abs_charpoly(s.eigenvalues, x, 0.0, a);
  log_abs_charpoly(s.eigenvalues, x, y / N, b);
  MaxRecord r;
  r.N = N;
  r.seed = s.seed;
  r.y = y;
  r.m_star = r.m_star_reg = kNegInf;
  for (std::size_t k = 0; k < x.size(); ++k) {
    r.m_star = std::max(r.m_star, a[k] - c0[k]);
    r.m_star_reg = std::max(r.m_star_reg, b[k] - c1[k]);
  }
  r.m_star_dense = r.m_star;
  r.ordering_ok = r.m_star <= r.m_star_reg + shift_constant(m) * y + 1e-9;
  return r;
}

Spectrum draw_spectrum(const EquilibriumModel& m, int N, std::uint64_t seed, std::uint64_t stream, int sweeps,
                       double step) {
  if (m.gaussian_weight) return sample_spectrum_gue(N, seed, stream);
  return sample_spectrum_mcmc(m, N, sweeps, step > 0.0 ? step : 1.0 / N, seed, stream);
}

std::vector<MaxRecord> max_experiment(const EquilibriumModel& m, const MaxExperimentConfig& cfg) {
  if (cfg.n_samples < 1) throw DomainError("n_samples must be >= 1");
  if (cfg.N < 2) throw DomainError("N must be >= 2");
  if (!(cfg.y >= 1.0)) throw DomainError("y must be >= 1");
  const int N = cfg.N;
  const auto x = cheb_grid(N);
  const auto c0 = centering_on_grid(m, N, x, 0.0);
  const auto c1 = centering_on_grid(m, N, x, -cfg.y / N);
  const auto xd = cfg.dense ? dense_grid(N) : std::vector<double>{};
  const auto cd = cfg.dense ? centering_on_grid(m, N, xd, 0.0) : std::vector<double>{};
  const double CV = shift_constant(m);
  std::vector<MaxRecord> out(static_cast<std::size_t>(cfg.n_samples));
  parallel_for(out.size(), cfg.threads, [&](std::size_t i) {
    Spectrum s = draw_spectrum(m, N, cfg.seed, i, cfg.mcmc_sweeps, cfg.mcmc_step);
    std::vector<double> a, b;
    log_abs_charpoly(s.eigenvalues, x, 0.0, a);
    log_abs_charpoly(s.eigenvalues, x, cfg.y / N, b);
    MaxRecord r;
    r.N = N;
    r.seed = cfg.seed;
    r.seed_index = static_cast<long>(i);
    r.y = cfg.y;
    r.m_star = r.m_star_reg = kNegInf;
    for (std::size_t k = 0; k < x.size(); ++k) {
      r.m_star = std::max(r.m_star, a[k] - c0[k]);
      r.m_star_reg = std::max(r.m_star_reg, b[k] - c1[k]);
    }
    r.ordering_ok = r.m_star <= r.m_star_reg + CV * cfg.y + 1e-9;
    r.m_star_dense = r.m_star;
    if (cfg.dense) {
      std::vector<double> d;
      log_abs_charpoly(s.eigenvalues, xd, 0.0, d);
      for (std::size_t k = 0; k < d.size(); ++k) d[k] -= cd[k];
      auto f = [&](double t) { return field_q(s, m, cplx{t, 0.0}); };
      r.m_star_dense = std::max(r.m_star, dense_max(f, xd, d, 8));
    }
    out[i] = r;
  });
  return out;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw DomainError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  double h = (v.size() - 1) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

MaxSummary summarize(const std::vector<MaxRecord>& rec) {
  MaxSummary s;
  if (rec.empty()) return s;
  s.N = rec.front().N;
  s.n_samples = static_cast<long>(rec.size());
  const double L = std::log(static_cast<double>(s.N)), LL = std::log(L);
  std::vector<double> ratio, centered;
  long tail = 0;
  for (const auto& r : rec) {
    ratio.push_back(r.m_star / L);
    centered.push_back(r.m_star - (L - 0.75 * LL));
    if (r.m_star > L + 3.0 * LL) ++tail;
    if (!r.ordering_ok) ++s.ordering_violations;
    s.max_dense_gap = std::max(s.max_dense_gap, r.m_star_dense - r.m_star);
  }
  s.median_ratio = quantile(ratio, 0.5);
  s.q1_ratio = quantile(ratio, 0.25);
  s.q3_ratio = quantile(ratio, 0.75);
  s.median_centered = quantile(centered, 0.5);
  s.q1_centered = quantile(centered, 0.25);
  s.q3_centered = quantile(centered, 0.75);
  s.upper_tail_fraction = static_cast<double>(tail) / rec.size();
  return s;
}

void write_max_csv(const std::vector<MaxRecord>& rec, std::ostream& os) {
  os << "N,seed_index,m_star,m_star_over_logN,m_star_centered_2nd_order\n";
  for (const auto& r : rec) {
    double L = std::log(static_cast<double>(r.N));
    os << r.N << ',' << r.seed_index << ',' << fmt17(r.m_star) << ',' << fmt17(r.m_star / L) << ','
       << fmt17(r.m_star - (L - 0.75 * std::log(L))) << '\n';
  }
}

CenteringOffsets empirical_centering(const EquilibriumModel& m, int N, long n_samples, std::uint64_t seed,
                                     int threads) {
  if (n_samples < 2) throw DomainError("need at least two samples");
  CenteringOffsets r;
  r.x = cheb_grid(N);
  const auto c = centering_on_grid(m, N, r.x, 0.0);
  const std::size_t K = r.x.size();
  std::vector<std::vector<double>> vals(static_cast<std::size_t>(n_samples));
  parallel_for(vals.size(), threads, [&](std::size_t i) {
    Spectrum s = draw_spectrum(m, N, seed, i, 200, 0.0);
    log_abs_charpoly(s.eigenvalues, r.x, 0.0, vals[i]);
  });
  r.offset.assign(K, 0.0);
  r.std_error.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double mean = 0.0;
    for (const auto& v : vals) mean += v[k];
    mean /= n_samples;
    double var = 0.0;
    for (const auto& v : vals) var += (v[k] - mean) * (v[k] - mean);
    var /= (n_samples - 1);
    r.offset[k] = mean - c[k];
    r.std_error[k] = std::sqrt(var / n_samples);
  }
  return r;
}

}  // namespace detfield
