#include "detfield/momentlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "detfield/extremes.hpp"
#include "detfield/parallel.hpp"
#include "detfield/rng.hpp"

namespace detfield {

namespace {

std::vector<DiskPoint> all_points(const BiasSpec& b) {
  std::vector<DiskPoint> v = b.plus;
  v.insert(v.end(), b.minus.begin(), b.minus.end());
  return v;
}

DomainParams domain_of(const BiasClassParams& p) { return {p.N, p.delta, p.omega_arg}; }

}  // namespace

bool validate_separated_bias(const BiasSpec& bias, const BiasClassParams& params) {
  if (bias.plus.size() != bias.minus.size()) return false;
  if (params.k > 0 && bias.plus.size() != static_cast<std::size_t>(params.k)) return false;
  auto pts = all_points(bias);
  for (const auto& z : pts)
    if (!in_domain(domain_of(params), z)) return false;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (!(hyp_dist(pts[i], pts[j]) >= params.epsilon)) return false;
  return true;
}

bool validate_paired_bias(const BiasSpec& base, const std::vector<std::pair<DiskPoint, DiskPoint>>& extra,
                          const BiasClassParams& params) {
  std::vector<DiskPoint> Z = base.plus, W = base.minus;
  for (const auto& [z, w] : extra) {
    Z.push_back(z);
    W.push_back(w);
  }
  const std::size_t z0 = base.plus.size(), w0 = base.minus.size();
  for (std::size_t e = 0; e < extra.size(); ++e) {
    const auto& [z, w] = extra[e];
    if (!in_domain(domain_of(params), z) || !in_domain(domain_of(params), w)) return false;
    double d = hyp_dist(z, w);
    for (std::size_t i = 0; i < Z.size(); ++i)
      if (i != z0 + e && hyp_dist(z, Z[i]) < d) return false;
    for (std::size_t i = 0; i < W.size(); ++i)
      if (i != w0 + e && hyp_dist(w, W[i]) < d) return false;
  }
  return true;
}

double mem_ratio(const OPTable& t, const EquilibriumModel& m, const BiasSpec& bias) {
  if (bias.plus.empty() && bias.minus.empty()) return 1.0;
  return exp_moment_field(t, m, bias).value / exp_moment_g(bias);
}

BiasSpec singleton_pair_bias(int N, double omega_arg) {
  double d = 0.5 * std::log(static_cast<double>(N));
  double a = 0.5 * std::exp(-d);
  return {{DiskPoint::polar(d, omega_arg + a)}, {DiskPoint::polar(d, omega_arg - a)}};
}

std::vector<MemRow> mem_suite(const EquilibriumModel& m, const std::vector<int>& Ns, int translates, int threads) {
  const std::size_t per = static_cast<std::size_t>(translates) + 1;
  std::vector<MemRow> rows(Ns.size() * per);
  parallel_for(Ns.size(), threads, [&](std::size_t a) {
    const int N = Ns[a];
    OPTable t = recurrence_table(m, N, N + 4);
    for (std::size_t id = 0; id < per; ++id) {
      BiasSpec b = singleton_pair_bias(N, pi / 2 + 0.25 * static_cast<double>(id));
      FieldMoment f = exp_moment_field(t, m, b);
      MemRow& r = rows[a * per + id];
      r.N = N;
      r.bias_id = static_cast<int>(id);
      r.ratio = f.value / exp_moment_g(b);
      r.abs_error = std::abs(r.ratio - 1.0);
      r.imag_residue = f.imag_residue;
    }
  });
  return rows;
}

double matching_ratio(const std::vector<DiskPoint>& Z, const std::vector<DiskPoint>& W,
                      const std::vector<bool>& in_T, const std::vector<bool>& in_S) {
  if (Z.empty() || W.empty()) throw DomainError("matching_ratio needs nonempty Z and W");
  if (in_T.size() != Z.size() || in_S.size() != W.size()) throw DomainError("subset mask size mismatch");
  // products in log form; d = 0 in the numerator gives ratio 0, in the denominator an error
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < Z.size(); ++i)
    for (std::size_t j = 0; j < W.size(); ++j)
      if (in_T[i] == in_S[j]) num += std::log(pseudo_dist(Z[i], W[j]));
  for (std::size_t i = 0; i < Z.size(); ++i)
    for (std::size_t j = 0; j < Z.size(); ++j)
      if (in_T[i] && !in_T[j]) den += std::log(pseudo_dist(Z[i], Z[j]));
  for (std::size_t i = 0; i < W.size(); ++i)
    for (std::size_t j = 0; j < W.size(); ++j)
      if (in_S[i] && !in_S[j]) den += std::log(pseudo_dist(W[i], W[j]));
  if (std::isinf(den)) throw DomainError("coincident points in matching_ratio");
  return std::exp(num - den);
}

double matching_sup(const std::vector<DiskPoint>& Z, const std::vector<DiskPoint>& W) {
  const std::size_t nz = Z.size(), nw = W.size();
  if (nz + nw > 24) throw DomainError("too many points for exhaustive subsets");
  double best = 0.0;
  std::vector<bool> T(nz), S(nw);
  for (std::uint32_t mz = 0; mz < (1u << nz); ++mz) {
    for (std::size_t i = 0; i < nz; ++i) T[i] = (mz >> i) & 1u;
    for (std::uint32_t mw = 0; mw < (1u << nw); ++mw) {
      for (std::size_t j = 0; j < nw; ++j) S[j] = (mw >> j) & 1u;
      best = std::max(best, matching_ratio(Z, W, T, S));
    }
  }
  return best;
}

bool pair_config_validate(const PairConfiguration& c) {
  const std::size_t n = c.z.size();
  if (c.w.size() != n || c.l_paired < 0 || static_cast<std::size_t>(c.l_paired) > n) return false;
  for (std::size_t j = 0; j < static_cast<std::size_t>(c.l_paired); ++j) {
    double d = pseudo_dist(c.z[j], c.w[j]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      if (pseudo_dist(c.w[i], c.w[j]) < d || pseudo_dist(c.z[i], c.z[j]) < d) return false;
    }
  }
  for (std::size_t i = c.l_paired; i < n; ++i)
    for (std::size_t j = c.l_paired; j < n; ++j) {
      if (i < j && (pseudo_dist(c.z[i], c.z[j]) < c.epsilon || pseudo_dist(c.w[i], c.w[j]) < c.epsilon))
        return false;
      if (pseudo_dist(c.z[i], c.w[j]) < c.epsilon) return false;
    }
  return true;
}

PairConfiguration random_pair_configuration(int k, int l, double epsilon, std::uint64_t seed, std::uint64_t index) {
  if (k < 0 || l < 0 || k + l < 1) throw DomainError("need k + l >= 1");
  Philox rng(seed, index);
  auto disk = [&] {
    double r = 0.9 * std::sqrt(rng.uniform());
    return std::polar(r, 2.0 * pi * rng.uniform());
  };
  PairConfiguration c;
  c.l_paired = l;
  c.epsilon = epsilon;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    c.z.clear();
    c.w.clear();
    for (int j = 0; j < l + k; ++j) {
      cplx z = disk(), w;
      if (j < l) {
        // partner at pseudo-distance s through the automorphism u -> (u + z)/(1 + conj(z) u)
        cplx u = std::polar(std::pow(10.0, -1.0 - 2.0 * rng.uniform()), 2.0 * pi * rng.uniform());
        w = (u + z) / (1.0 + std::conj(z) * u);
      } else {
        w = disk();
      }
      c.z.push_back(DiskPoint::from_complex(z));
      c.w.push_back(DiskPoint::from_complex(w));
    }
    if (pair_config_validate(c)) return c;
  }
  throw DomainError("could not generate a valid pair configuration");
}

MatchingSummary matching_experiment(long trials, double epsilon, int max_pairs, std::uint64_t seed, int threads) {
  if (trials < 2) throw DomainError("need at least two trials");
  MatchingSummary s;
  s.trials = trials;
  s.per_trial.assign(static_cast<std::size_t>(trials), 0.0);
  parallel_for(s.per_trial.size(), threads, [&](std::size_t t) {
    Philox pick(seed ^ 0x9e3779b97f4a7c15ULL, t);
    int total = 1 + static_cast<int>(pick.uniform() * max_pairs);
    total = std::min(total, max_pairs);
    int l = static_cast<int>(pick.uniform() * (total + 1));
    l = std::min(l, total);
    auto c = random_pair_configuration(total - l, l, epsilon, seed, t);
    s.per_trial[t] = matching_sup(c.z, c.w);
  });
  for (long t = 0; t < trials; ++t) {
    double v = s.per_trial[t];
    if (!std::isfinite(v)) s.finite = false;
    s.sup_all = std::max(s.sup_all, v);
    if (t < trials / 2) s.sup_first_half = std::max(s.sup_first_half, v);
  }
  return s;
}

int LowerBoundParams::n0() const { return static_cast<int>(std::floor((1.0 - delta) * n + 1e-9)); }

int LowerBoundParams::step() const { return eta > 0 ? n0() / eta : 0; }

int LowerBoundParams::r() const {
  double D = 2.0 * std::atanh(1.0 - std::exp(-2.0 * delta * n));
  int s = step();
  if (s <= 0) return -1;
  for (int k = 0; k <= eta; ++k)
    if (k * s >= D) return k;
  return -1;
}

void LowerBoundParams::validate() const {
  if (n < 2 || n > 12) throw DomainError("lower bound depth n must be in [2, 12]");
  if (!(delta > 0.0 && delta < 0.5)) throw DomainError("delta must be in (0, 1/2)");
  if (eta < 1) throw DomainError("eta must be >= 1");
  if (stride < 1) throw DomainError("stride must be >= 1");
  if (step() < 1) throw DomainError("eta exceeds n0");
  // r = eta leaves no barrier windows; that is allowed
  if (r() < 0) throw DomainError("no b_k reaches the radius condition; increase eta or n");
}

std::vector<double> omega_grid(const LowerBoundParams& p) {
  p.validate();
  const int n0 = p.n0();
  const double H = std::exp(-p.delta * p.n) * std::exp(static_cast<double>(n0));
  const long hmax = static_cast<long>(std::ceil(H));
  std::vector<double> th;
  for (long h = -hmax; h <= hmax; ++h) {
    if (!(std::abs(static_cast<double>(h)) < H) || h % p.stride != 0) continue;
    th.push_back(pi / 2 + static_cast<double>(h) * std::exp(-static_cast<double>(n0)));
  }
  return th;
}

int midpoint(double theta1, double theta2, int n0) {
  double d = 2.0 * std::abs(std::sin(0.5 * (theta1 - theta2)));
  if (d == 0.0) throw DomainError("midpoint of coincident points");
  return std::min(static_cast<int>(std::lround(-std::log(d))), n0);
}

bool barrier_indicator(const std::vector<double>& ray, double anchor, const LowerBoundParams& p) {
  const int r = p.r();
  if (r < 0 || ray.size() != static_cast<std::size_t>(p.eta - r)) throw DomainError("barrier needs F at every b_k");
  const double win = p.eta * std::sqrt(static_cast<double>(p.n));
  for (int k = r + 1; k <= p.eta; ++k)
    if (std::abs(ray[k - r - 1] - anchor - (p.b(k) - p.b(r))) > win) return false;
  return true;
}

LowerBoundResult lower_bound_mc(const LowerBoundParams& p, long n_samples, std::uint64_t seed, int threads) {
  p.validate();
  if (n_samples < 2) throw DomainError("need at least two samples");
  const auto th = omega_grid(p);
  const int n0 = p.n0(), r = p.r(), nk = p.eta - r;
  const std::size_t W = th.size();

  // layout: [omega zeta_{n0}] [omega zeta_{b_k}, k = r+1..eta] [i zeta_{b_r}]
  std::vector<DiskPoint> pts;
  for (double t : th) pts.push_back(DiskPoint::polar(n0, t));
  for (int k = r + 1; k <= p.eta; ++k)
    for (double t : th) pts.push_back(DiskPoint::polar(p.b(k), t));
  const DiskPoint anchor = DiskPoint::polar(p.b(r), pi / 2);
  pts.push_back(anchor);
  const std::size_t P = pts.size(), ia = P - 1;

  GaussSampler sampler(pts, KernelKind::G);
  const std::size_t S = static_cast<std::size_t>(n_samples);
  Eigen::MatrixXd Y(S, W), EB(S, W);
  std::vector<double> ind_sum(S, 0.0), recentered(S, 0.0);
  parallel_for(S, threads, [&](std::size_t s) {
    std::vector<double> F(P), ray(static_cast<std::size_t>(nk));
    sampler.draw(seed, s, F.data());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < W; ++w) {
      for (int j = 0; j < nk; ++j) ray[j] = F[W * (1 + j) + w];
      bool ok = barrier_indicator(ray, F[ia], p);
      double e = std::exp(2.0 * (F[w] - F[ia]));
      EB(s, w) = e;
      Y(s, w) = ok ? e : 0.0;
      mx = std::max(mx, F[w] - F[ia]);
    }
    recentered[s] = mx;
  });

  LowerBoundResult res;
  res.params = p;
  res.n_samples = n_samples;
  res.omega_count = W;
  res.point_count = P;
  res.factorization = sampler.factorization();

  const double ns = static_cast<double>(S);
  Eigen::VectorXd Z = Y.rowwise().sum();
  long pos = 0;
  for (std::size_t s = 0; s < S; ++s) pos += Z(s) > 0.0;
  res.p_z_positive = pos / ns;
  res.p_z_se = std::sqrt(res.p_z_positive * (1.0 - res.p_z_positive) / ns);
  double mz = Z.mean(), mz2 = Z.squaredNorm() / ns;
  res.cs_ratio = mz2 > 0.0 ? mz * mz / mz2 : 0.0;
  res.barrier_pass_biased = Y.sum() / EB.sum();

  auto K = [&](const DiskPoint& a, const DiskPoint& b) { return cov_g(a, b); };
  const double kaa = K(anchor, anchor);
  std::vector<double> ka(W), exact_one(W);
  Eigen::VectorXd EY = Y.colwise().mean().transpose();
  res.one_point_min = std::numeric_limits<double>::infinity();
  res.one_point_max = 0.0;
  for (std::size_t w = 0; w < W; ++w) {
    ka[w] = K(pts[w], anchor);
    double var = 4.0 * (K(pts[w], pts[w]) + kaa - 2.0 * ka[w]);
    exact_one[w] = std::exp(0.5 * var);
    double q = EY(w) / exact_one[w];
    res.one_point_min = std::min(res.one_point_min, q);
    res.one_point_max = std::max(res.one_point_max, q);
  }

  std::vector<double> sorted(recentered);
  res.recentered_max_median = quantile(sorted, 0.5);
  long above = 0;
  for (double v : recentered) above += v > (1.0 - 2.0 * p.delta) * p.n;
  res.recentered_max_fraction = above / ns;

  // two-point table
  Eigen::MatrixXd EYY = (Y.transpose() * Y) / ns;
  std::vector<DiskPoint> rayb;
  for (double t : th) rayb.push_back(DiskPoint::polar(p.b(r), t));
  struct Acc {
    long pairs = 0;
    double mc_num = 0, mc_den = 0, ex_num = 0, ex_den = 0;
    double ex_min = std::numeric_limits<double>::infinity(), ex_max = 0;
    double ra_min = std::numeric_limits<double>::infinity(), ra_max = 0;
  };
  std::map<int, Acc> bins;
  for (std::size_t i = 0; i < W; ++i)
    for (std::size_t j = i + 1; j < W; ++j) {
      Acc& a = bins[midpoint(th[i], th[j], n0)];
      ++a.pairs;
      a.mc_num += EYY(i, j);
      a.mc_den += EY(i) * EY(j);
      double cov = 4.0 * (K(pts[i], pts[j]) - ka[i] - ka[j] + kaa);
      double f = std::exp(cov), e2 = exact_one[i] * exact_one[j];
      a.ex_num += e2 * f;
      a.ex_den += e2;
      a.ex_min = std::min(a.ex_min, f);
      a.ex_max = std::max(a.ex_max, f);
      double cr = 4.0 * (K(pts[i], pts[j]) - K(pts[i], rayb[j]) - K(rayb[i], pts[j]) + K(rayb[i], rayb[j]));
      a.ra_min = std::min(a.ra_min, std::exp(cr));
      a.ra_max = std::max(a.ra_max, std::exp(cr));
    }
  for (const auto& [m, a] : bins) {
    TwoPointBin b;
    b.m = m;
    b.pairs = a.pairs;
    b.mc_ratio = a.mc_den > 0.0 ? a.mc_num / a.mc_den : 0.0;
    b.exact_ratio = a.ex_num / a.ex_den;
    b.exact_min = a.ex_min;
    b.exact_max = a.ex_max;
    b.ray_anchor_min = a.ra_min;
    b.ray_anchor_max = a.ra_max;
    res.bins.push_back(b);
  }
  return res;
}

}  // namespace detfield
