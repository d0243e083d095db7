#include "detfield/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "detfield/format.hpp"
#include "detfield/quadrature.hpp"

namespace detfield {

namespace {

bool is_gaussian(const EquilibriumModel& m) { return m.gaussian_weight; }

double potential_min(const EquilibriumModel& m, double lo, double hi) {
  double vmin = std::numeric_limits<double>::infinity();
  const int n = 4000;
  for (int k = 0; k <= n; ++k) vmin = std::min(vmin, m.V(lo + (hi - lo) * k / n));
  return vmin;
}

// Edge beyond which N V(x) - 2 n log(1+|x|) exceeds the bulk scale by 80.
double range_edge(const EquilibriumModel& m, int N, int n, double start, double dir) {
  double x = start;
  for (int it = 0; it < 10000; ++it) {
    double excess = N * (m.V(x) - m.ell_v) - 2.0 * n * std::log1p(std::abs(x));
    if (excess > 80.0 && std::abs(x) > 1.0) return x;
    x += dir * 0.02;
  }
  throw NumericalError("weight does not decay fast enough to truncate");
}

Interval model_range(const EquilibriumModel& m, int N, int n) {
  return {range_edge(m, N, n, support_left(m), -1.0), range_edge(m, N, n, support_right(m), 1.0)};
}

// Composite Gauss-Legendre nodes on [lo, hi] with `panels` panels.
void composite_nodes(double lo, double hi, int panels, std::vector<double>& x, std::vector<double>& w) {
  const GaussRule& r = gl20();
  x.clear();
  w.clear();
  double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    double a = lo + p * h, c = a + 0.5 * h;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      x.push_back(c + 0.5 * h * r.nodes[i]);
      w.push_back(0.5 * h * r.weights[i]);
    }
  }
}

// Weideman's rational approximation with 40 terms; coefficients by a direct DFT.
struct FaddeevaCoeffs {
  static constexpr int kN = 40;
  double L;
  std::array<double, kN> a;  // p(Z) = sum a[j] Z^j
  FaddeevaCoeffs() {
    const int M = 2 * kN, M2 = 2 * M;
    L = std::sqrt(kN / std::sqrt(2.0));
    std::vector<double> f(M2, 0.0);
    for (int k = -M + 1; k <= M - 1; ++k) {
      double t = L * std::tan(0.5 * k * pi / M);
      f[k + M] = std::exp(-t * t) * (L * L + t * t);  // f[0] = 0 at the pole
    }
    for (int j = 1; j <= kN; ++j) {
      double s = 0.0;
      for (int m = 0; m < M2; ++m) {
        // fftshift: element m of the shifted vector is f[(m + M) mod 2M]
        s += f[(m + M) % M2] * std::cos(2.0 * pi * j * m / M2);
      }
      a[j - 1] = s / M2;
    }
  }
};

}  // namespace

double OPTable::beta_at(int n) const {
  if (gaussian) return 0.0;
  if (n < 0 || n > n_max) throw DomainError("recurrence index beyond table");
  return beta[n];
}

double OPTable::a2_at(int n) const {
  if (gaussian) return n / (4.0 * N);
  if (n < 0 || n > n_max) throw DomainError("recurrence index beyond table");
  return a2[n];
}

double OPTable::log_gamma_sq(int n) const {
  double s = 2.0 * log_gamma0;
  for (int k = 1; k <= n; ++k) s -= std::log(a2_at(k));
  return s;
}

double log_gamma0(const EquilibriumModel& m, int N) {
  if (is_gaussian(m)) return 0.25 * std::log(2.0 * N / pi);
  Interval r = model_range(m, N, 0);
  double vmin = potential_min(m, r.lo, r.hi);
  std::vector<double> breaks = {support_left(m), 0.0, support_right(m)};
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double b) { return b <= r.lo || b >= r.hi; }),
               breaks.end());
  cplx z = integrate_with_breaks([&](double x) { return cplx{std::exp(-N * (m.V(x) - vmin)), 0.0}; }, r.lo, r.hi,
                                 breaks, 1e-14);
  return -0.5 * (std::log(z.real()) - N * vmin);
}

double gamma0(const EquilibriumModel& m, int N) { return std::exp(log_gamma0(m, N)); }

double gamma0_quadrature(const EquilibriumModel& m, int N) {
  Interval r = model_range(m, N, 0);
  double z = integrate_with_breaks([&](double x) { return cplx{std::exp(-N * m.V(x)), 0.0}; }, r.lo, r.hi,
                                   {0.0}, 1e-14)
                 .real();
  return 1.0 / std::sqrt(z);
}

OPTable recurrence_table(const EquilibriumModel& m, int N, int n_max) {
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  if (N < 1) throw DomainError("N must be >= 1");
  OPTable t;
  t.N = N;
  t.n_max = n_max;
  t.model = m.name;
  t.weight = std::make_shared<const EquilibriumModel>(m);
  t.log_gamma0 = log_gamma0(m, N);
  t.gamma0 = std::exp(t.log_gamma0);
  t.beta.assign(n_max + 1, 0.0);
  t.a2.assign(n_max + 1, 0.0);
  if (is_gaussian(m)) {
    t.gaussian = true;
    for (int n = 1; n <= n_max; ++n) t.a2[n] = n / (4.0 * N);
    return t;
  }

  // discretized Stieltjes procedure in orthonormal form
  Interval r = model_range(m, N, n_max);
  std::vector<double> x, w;
  int nodes = std::max(8 * n_max, 800);
  composite_nodes(r.lo, r.hi, (nodes + 19) / 20, x, w);
  double shift = std::numeric_limits<double>::infinity();
  for (double xi : x) shift = std::min(shift, N * m.V(xi));
  const std::size_t K = x.size();
  for (std::size_t k = 0; k < K; ++k) w[k] *= std::exp(-(N * m.V(x[k]) - shift));
  double mass = 0.0;
  for (double wk : w) mass += wk;
  std::vector<double> p(K, 1.0 / std::sqrt(mass)), prev(K, 0.0), next(K);
  for (int n = 0; n <= n_max; ++n) {
    double b = 0.0;
    for (std::size_t k = 0; k < K; ++k) b += w[k] * x[k] * p[k] * p[k];
    t.beta[n] = b;
    if (n == n_max) break;
    double sa = n == 0 ? 0.0 : std::sqrt(t.a2[n]);
    double nn = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      next[k] = (x[k] - b) * p[k] - sa * prev[k];
      nn += w[k] * next[k] * next[k];
    }
    t.a2[n + 1] = nn;
    double inv = 1.0 / std::sqrt(nn);
    for (std::size_t k = 0; k < K; ++k) {
      prev[k] = p[k];
      p[k] = next[k] * inv;
    }
  }

  // orthogonality on an independent, finer grid
  std::vector<double> x2, w2;
  composite_nodes(r.lo, r.hi, (3 * nodes / 2 + 19) / 20 + 1, x2, w2);
  const auto K2 = static_cast<Eigen::Index>(x2.size());
  Eigen::MatrixXd P(K2, n_max + 1);
  Eigen::VectorXd sw(K2);
  for (Eigen::Index k = 0; k < K2; ++k) {
    sw[k] = w2[k] * std::exp(-(N * m.V(x2[k]) - shift));
  }
  for (Eigen::Index k = 0; k < K2; ++k) {
    double pm = 0.0, pc = 1.0 / std::sqrt(mass);
    P(k, 0) = pc;
    for (int n = 0; n < n_max; ++n) {
      double sa = n == 0 ? 0.0 : std::sqrt(t.a2[n]);
      double pn = ((x2[k] - t.beta[n]) * pc - sa * pm) / std::sqrt(t.a2[n + 1]);
      pm = pc;
      pc = pn;
      P(k, n + 1) = pc;
    }
    sw[k] = std::sqrt(sw[k]);
  }
  Eigen::MatrixXd WP = sw.asDiagonal() * P;
  Eigen::MatrixXd G = WP.transpose() * WP;
  G -= Eigen::MatrixXd::Identity(n_max + 1, n_max + 1);
  t.orth_residual = G.cwiseAbs().maxCoeff();
  if (t.orth_residual > 1e-8)
    throw NumericalError("recurrence table lost orthogonality (residual " + fmt17(t.orth_residual) + ")");
  return t;
}

void save_table(const OPTable& t, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["model"] = t.model;
  j["N"] = t.N;
  j["n_max"] = t.n_max;
  j["beta"] = t.beta;
  j["a2"] = t.a2;
  j["gamma0"] = t.gamma0;
  j["log_gamma0"] = t.log_gamma0;
  j["orth_residual"] = t.orth_residual;
  atomic_write(path, j.dump() + "\n");
}

OPTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  auto j = nlohmann::json::parse(in);
  OPTable t;
  t.model = j.at("model").get<std::string>();
  t.N = j.at("N").get<int>();
  t.n_max = j.at("n_max").get<int>();
  t.beta = j.at("beta").get<std::vector<double>>();
  t.a2 = j.at("a2").get<std::vector<double>>();
  t.gamma0 = j.at("gamma0").get<double>();
  t.log_gamma0 = j.value("log_gamma0", std::log(t.gamma0));
  t.orth_residual = j.value("orth_residual", 0.0);
  if (static_cast<int>(t.beta.size()) != t.n_max + 1 || static_cast<int>(t.a2.size()) != t.n_max + 1)
    throw std::runtime_error("malformed recurrence cache " + path.string());
  t.weight = std::make_shared<const EquilibriumModel>(model_by_name(t.model));
  t.gaussian = t.weight->gaussian_weight;
  return t;
}

OPTable cached_table(const EquilibriumModel& m, int N, int n_max, const std::filesystem::path& dir) {
  std::string key = m.name;
  std::replace(key.begin(), key.end(), ':', '_');
  std::ostringstream name;
  name << key << "_N" << N << "_n" << n_max << ".json";
  auto path = dir / name.str();
  if (std::filesystem::exists(path)) {
    OPTable t = load_table(path);
    if (t.model == m.name && t.N == N && t.n_max == n_max) return t;
  }
  OPTable t = recurrence_table(m, N, n_max);
  std::filesystem::create_directories(dir);
  save_table(t, path);
  return t;
}

Interval weight_range(const OPTable& t) { return model_range(*t.weight, t.N, t.n_max); }

std::pair<LogComplex, LogComplex> eval_pi_pair(const OPTable& t, int n, cplx x) {
  if (n < 0 || !t.has(n)) throw DomainError("eval_pi: degree outside the table");
  cplx prev{0.0, 0.0}, cur{1.0, 0.0};
  double scale = 0.0;
  for (int k = 0; k < n; ++k) {
    cplx next = (x - t.beta_at(k)) * cur - t.a2_at(k) * prev;
    prev = cur;
    cur = next;
    double a = std::max(std::abs(cur), std::abs(prev));
    if (a > 1e150 || (a < 1e-150 && a > 0.0)) {
      double s = std::log(a);
      prev /= a;
      cur /= a;
      scale += s;
    }
  }
  LogComplex lp = LogComplex::from(prev), lc = LogComplex::from(cur);
  if (!lp.is_zero()) lp.log_mag += scale;
  if (!lc.is_zero()) lc.log_mag += scale;
  return {lp, lc};
}

LogComplex eval_pi(const OPTable& t, int n, cplx x) { return eval_pi_pair(t, n, x).second; }

cplx faddeeva_w(cplx z) {
  if (z.imag() < 0.0) throw DomainError("faddeeva_w implemented for Im z >= 0");
  static const FaddeevaCoeffs c;
  cplx d = c.L - I * z;
  cplx Z = (c.L + I * z) / d;
  cplx p{0.0, 0.0};
  for (int j = FaddeevaCoeffs::kN - 1; j >= 0; --j) p = p * Z + c.a[j];
  return 2.0 * p / (d * d) + (1.0 / std::sqrt(pi)) / d;
}

cplx h0_gaussian(const OPTable& t, cplx q) {
  if (!t.gaussian) throw DomainError("h0_gaussian needs the Gaussian weight");
  if (q.imag() == 0.0) throw DomainError("h_n evaluated on the real axis");
  const double s = std::sqrt(2.0 * t.N);
  // int e^{-u^2}/(u - z) du = i pi w(z) for Im z > 0
  if (q.imag() > 0.0) return 0.5 * faddeeva_w(s * q);
  return -std::conj(0.5 * faddeeva_w(s * std::conj(q)));
}

cplx h_quadrature(const OPTable& t, int n, cplx q) {
  if (q.imag() == 0.0) throw DomainError("h_n evaluated on the real axis");
  const EquilibriumModel& m = *t.weight;
  Interval r = model_range(m, t.N, std::max(n, 1));
  // common scale: largest |pi_n w| on a coarse grid
  double S = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 400; ++k) {
    double x = r.lo + (r.hi - r.lo) * k / 400.0;
    S = std::max(S, eval_pi(t, n, x).log_mag - t.N * m.V(x));
  }
  auto f = [&](double x) {
    LogComplex p = eval_pi(t, n, x);
    return p.scaled(S + t.N * m.V(x)) / (x - q);
  };
  std::vector<double> breaks;
  if (q.real() > r.lo && q.real() < r.hi) breaks.push_back(q.real());
  for (double b : {support_left(m), support_right(m)})
    if (b > r.lo && b < r.hi && std::abs(b - q.real()) > 1e-9) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  cplx v = integrate_with_breaks(f, r.lo, r.hi, breaks, 1e-13) / (2.0 * pi * I);
  return v * std::exp(S);
}

namespace {

cplx h0_any(const OPTable& t, cplx q) { return t.gaussian ? h0_gaussian(t, q) : h_quadrature(t, 0, q); }

// Forward recurrence from h_0; returns (h_{n-1}, h_n). Accurate only when |Im q| is small
// compared with the spacing scale, since h_n is the recessive solution.
std::pair<LogComplex, LogComplex> h_forward(const OPTable& t, int n, cplx q, cplx h0) {
  cplx prev{0.0, 0.0}, cur = h0;
  double scale = 0.0;
  cplx extra = std::exp(-2.0 * t.log_gamma0) / (2.0 * pi * I);
  for (int k = 0; k < n; ++k) {
    cplx next = k == 0 ? (q - t.beta_at(0)) * cur + extra : (q - t.beta_at(k)) * cur - t.a2_at(k) * prev;
    prev = cur;
    cur = next;
    double a = std::max(std::abs(cur), std::abs(prev));
    if (a > 1e150 || (a < 1e-150 && a > 0.0)) {
      prev /= a;
      cur /= a;
      extra /= a;
      scale += std::log(a);
    }
  }
  LogComplex lp = LogComplex::from(prev), lc = LogComplex::from(cur);
  if (!lp.is_zero()) lp.log_mag += scale;
  if (!lc.is_zero()) lc.log_mag += scale;
  return {lp, lc};
}

// Ratios rho_k = h_k / h_{k-1}, k = 1..n, from the backward continued fraction
// rho_k = a2[k] / (q - beta[k] - rho_{k+1}) started at depth M. Empty when the table
// cannot supply enough coefficients for convergence.
std::vector<cplx> h_ratios(const OPTable& t, int n, cplx q) {
  const int cap = t.gaussian ? (1 << 21) : t.n_max;
  int M = std::min(cap, std::max(2 * n + 64, 128));
  if (M == cap) M = std::max(n, (n + cap) / 2);
  cplx last{};
  bool have_last = false;
  for (;;) {
    cplx tail{0.0, 0.0};
    std::vector<cplx> rho(n + 1);
    for (int k = M; k >= 1; --k) {
      tail = t.a2_at(k) / (q - t.beta_at(k) - tail);
      if (k <= n) rho[k] = tail;
    }
    cplx s{};
    for (int k = 1; k <= n; ++k) s += std::log(rho[k]);
    if (have_last && std::abs(s - last) <= 1e-14 * std::max(1.0, std::abs(s))) return rho;
    last = s;
    have_last = true;
    if (M >= cap) return {};
    M = std::min(2 * M, cap);
  }
}

}  // namespace

std::pair<LogComplex, LogComplex> eval_h_pair(const OPTable& t, int n, cplx q) {
  if (q.imag() == 0.0) throw DomainError("h_n evaluated on the real axis");
  if (n < 0 || !t.has(n)) throw DomainError("eval_h: degree outside the table");
  if (q.imag() < 0.0) {
    // h_n(conj q) = -conj(h_n(q))
    auto [a, b] = eval_h_pair(t, n, std::conj(q));
    return {LogComplex{a.log_mag, -std::conj(a.phase)}, LogComplex{b.log_mag, -std::conj(b.phase)}};
  }
  cplx h0 = h0_any(t, q);
  bool near_axis = t.gaussian && std::sqrt(2.0 * t.N) * q.imag() < 0.02;
  if (n == 0) return {LogComplex{}, LogComplex::from(h0)};
  std::vector<cplx> rho = near_axis ? std::vector<cplx>{} : h_ratios(t, n, q);
  if (rho.empty()) return h_forward(t, n, q, h0);
  LogComplex h = LogComplex::from(h0), prev;
  for (int k = 1; k <= n; ++k) {
    prev = h;
    h = h * LogComplex::from(rho[k]);
  }
  return {prev, h};
}

LogComplex eval_h(const OPTable& t, int n, cplx q) { return eval_h_pair(t, n, q).second; }

double RHMatrix::log_scale() const {
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& x : e) s = std::max(s, x.log_mag);
  return s;
}

double RHMatrix::norm() const {
  double s = log_scale();
  if (std::isinf(s)) return 0.0;
  double acc = 0.0;
  for (const auto& x : e) acc += std::norm(x.scaled(s));
  return std::sqrt(acc) * std::exp(s);
}

RHMatrix y_matrix(const OPTable& t, cplx q) {
  const int N = t.N;
  if (q.imag() == 0.0) throw DomainError("Y_N evaluated on the real axis");
  if (!t.has(N)) throw DomainError("table too short for Y_N");
  auto [pm, pn] = eval_pi_pair(t, N, q);
  auto [hm, hn] = eval_h_pair(t, N, q);
  LogComplex c{std::log(2.0 * pi) + t.log_gamma_sq(N - 1), cplx{0.0, -1.0}};  // -2 pi i gamma_{N-1}^2
  RHMatrix Y;
  Y.kind = RHKind::Y;
  Y.q = q;
  Y.e = {pn, hn, c * pm, c * hm};
  LogComplex d = Y.det();
  if (std::abs(d.value() - 1.0) > 1e-6)
    throw NumericalError("det Y_N deviates from 1 (" + fmt17(std::abs(d.value() - 1.0)) + ")");
  return Y;
}

RHMatrix m_matrix(const OPTable& t, const EquilibriumModel& model, cplx q) {
  RHMatrix Y = y_matrix(t, q);
  const double N = t.N, ell = model.ell_v;
  cplx g = g_eval(model, q);
  RHMatrix M;
  M.kind = RHKind::M;
  M.q = q;
  M.e = {Y.e[0] * LogComplex::exp_of(-N * g), Y.e[1] * LogComplex::exp_of(N * g - N * ell),
         Y.e[2] * LogComplex::exp_of(-N * g + N * ell), Y.e[3] * LogComplex::exp_of(N * g)};
  return M;
}

cplx gamma_onecut(cplx q) {
  if (q.imag() == 0.0 && std::abs(q.real()) <= 1.0) throw DomainError("gamma evaluated on the cut");
  return std::pow(q + 1.0, 0.25) / std::pow(q - 1.0, 0.25);
}

namespace {
RHMatrix parametrix_from_gamma(cplx gm, cplx q) {
  cplx a = 0.5 * (gm + 1.0 / gm), b = (gm - 1.0 / gm) / (2.0 * I);
  RHMatrix M;
  M.kind = RHKind::M_infinity;
  M.q = q;
  M.e = {LogComplex::from(a), LogComplex::from(-b), LogComplex::from(b), LogComplex::from(a)};
  return M;
}
}  // namespace

RHMatrix global_parametrix_onecut(cplx q) { return parametrix_from_gamma(gamma_onecut(q), q); }

RHMatrix global_parametrix_boundary(double x, int side) {
  if (!(x > -1.0 && x < 1.0) || (side != 1 && side != -1)) throw DomainError("boundary value needs -1 < x < 1");
  // arg(q - 1) -> +-pi from above/below
  cplx gm = std::pow((1.0 + x) / (1.0 - x), 0.25) * std::polar(1.0, -side * pi / 4.0);
  return parametrix_from_gamma(gm, cplx{x, 0.0});
}

double r_weight(const EquilibriumModel& m, cplx q) {
  double s = 0.0;
  for (const auto& iv : m.support) {
    double d = std::abs((q - iv.lo) * (q - iv.hi));
    if (d == 0.0) throw DomainError("R(q) is infinite at a support edge");
    s -= 0.25 * std::log(d);
  }
  return std::exp(s);
}

}  // namespace detfield
