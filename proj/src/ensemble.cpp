#include "detfield/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "detfield/format.hpp"
#include "detfield/quadrature.hpp"
#include "detfield/rng.hpp"

namespace detfield {

namespace {

cplx sqrt_q2m1(cplx q) { return std::sqrt(q - 1.0) * std::sqrt(q + 1.0); }

constexpr double kLog2 = 0.69314718055994530942;

// Integrals over one support interval in the variable u = c + h cos(phi), which turns
// the square-root edges of rho into smooth endpoints.
template <class F>
cplx integrate_support(const EquilibriumModel& m, cplx q, F&& f) {
  cplx total{};
  for (const auto& iv : m.support) {
    double c = 0.5 * (iv.lo + iv.hi), h = 0.5 * (iv.hi - iv.lo);
    auto integrand = [&](double phi) -> cplx {
      double u = c + h * std::cos(phi);
      return f(u) * (m.rho(u) * h * std::sin(phi));
    };
    std::vector<double> breaks;
    double t = (q.real() - c) / h;
    if (t > -1.0 && t < 1.0) breaks.push_back(std::acos(t));
    total += integrate_with_breaks(integrand, 0.0, pi, breaks, 1e-14);
  }
  return total;
}

double compute_ell_v(const EquilibriumModel& m) {
  // mean over a bulk grid; the invariant tests check the spread
  double lo = support_left(m), hi = support_right(m);
  double s = 0.0;
  const int n = 21;
  for (int k = 0; k < n; ++k) {
    double x = lo + (hi - lo) * (0.1 + 0.8 * k / (n - 1.0));
    s += ell_v_residual(m, x);
  }
  return s / n;
}

}  // namespace

double support_left(const EquilibriumModel& m) { return m.support.front().lo; }
double support_right(const EquilibriumModel& m) { return m.support.back().hi; }

EquilibriumModel gue_model() {
  EquilibriumModel m;
  m.name = "gue";
  m.V = [](double x) { return 2.0 * x * x; };
  m.rho = [](double u) { return std::abs(u) < 1.0 ? (2.0 / pi) * std::sqrt(1.0 - u * u) : 0.0; };
  m.support = {{-1.0, 1.0}};
  m.rho_max = 2.0 / pi;
  m.gaussian_weight = true;
  m.stieltjes_closed = [](cplx q) { return 2.0 / (q + sqrt_q2m1(q)); };
  m.g_closed = [](cplx q) {
    cplx s = q + sqrt_q2m1(q);
    return q / s + std::log(s) - 0.5 - kLog2;
  };
  m.log_potential_closed = [](double x) {
    if (std::abs(x) <= 1.0) return x * x - 0.5 - kLog2;
    double a = std::abs(x), s = a + std::sqrt(a * a - 1.0);
    return a / s + std::log(s) - 0.5 - kLog2;
  };
  m.ell_v = compute_ell_v(m);
  return m;
}

EquilibriumModel quartic_model(double b) {
  if (!(b > -4.0 / 3.0 && b < 4.0)) throw DomainError("quartic model needs -4/3 < b < 4");
  EquilibriumModel m;
  std::ostringstream nm;
  nm << "quartic:" << b;
  m.name = nm.str();
  double a = 2.0 - 1.5 * b;
  m.V = [a, b](double x) { return a * x * x + b * x * x * x * x; };
  m.rho = [b](double u) {
    return std::abs(u) < 1.0 ? (4.0 * b * u * u + 4.0 - b) * std::sqrt(1.0 - u * u) / (2.0 * pi) : 0.0;
  };
  m.support = {{-1.0, 1.0}};
  m.rho_max = std::max((4.0 - b) / (2.0 * pi), 0.0);
  for (int k = 0; k <= 200; ++k) m.rho_max = std::max(m.rho_max, m.rho(-1.0 + k / 100.0));
  m.ell_v = compute_ell_v(m);
  return m;
}

EquilibriumModel model_by_name(const std::string& name) {
  if (name == "gue") return gue_model();
  if (name == "quartic") return quartic_model(1.0);
  if (name.rfind("quartic:", 0) == 0) return quartic_model(std::stod(name.substr(8)));
  throw DomainError("unknown model: " + name);
}

cplx stieltjes_quadrature(const EquilibriumModel& m, cplx q) {
  return integrate_support(m, q, [&](double u) { return 1.0 / (q - u); });
}

cplx stieltjes(const EquilibriumModel& m, cplx q) {
  if (q.imag() == 0.0 && q.real() >= support_left(m) && q.real() <= support_right(m))
    throw DomainError("Stieltjes transform evaluated on the support");
  return m.stieltjes_closed ? m.stieltjes_closed(q) : stieltjes_quadrature(m, q);
}

cplx g_quadrature(const EquilibriumModel& m, cplx q) {
  return integrate_support(m, q, [&](double u) { return std::log(q - u); });
}

cplx g_eval(const EquilibriumModel& m, cplx q) {
  if (q.imag() == 0.0 && q.real() <= support_right(m))
    throw DomainError("g evaluated on its branch cut");
  return m.g_closed ? m.g_closed(q) : g_quadrature(m, q);
}

double log_potential_quadrature(const EquilibriumModel& m, double x) {
  return integrate_support(m, x, [&](double u) { return cplx{std::log(std::abs(x - u)), 0.0}; }).real();
}

double log_potential(const EquilibriumModel& m, cplx q) {
  if (q.imag() == 0.0) {
    double x = q.real();
    return m.log_potential_closed ? m.log_potential_closed(x) : log_potential_quadrature(m, x);
  }
  if (m.g_closed) return m.g_closed(q).real();
  return integrate_support(m, q, [&](double u) { return cplx{std::log(std::abs(q - u)), 0.0}; }).real();
}

double ell_v_residual(const EquilibriumModel& m, double x) {
  return 2.0 * log_potential_quadrature(m, x) - m.V(x);
}

std::vector<double> tridiag_eigenvalues(std::vector<double> d, std::vector<double> off) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return d;
  if (static_cast<int>(off.size()) != n - 1) throw DomainError("off-diagonal length must be n-1");
  std::vector<double> e(off);
  e.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw NumericalError("implicit QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        bool deflated = false;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i], b = c * e[i];
          r = std::sqrt(f * f + g * g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            deflated = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (deflated) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

Spectrum sample_spectrum_gue(int N, std::uint64_t seed, std::uint64_t stream) {
  if (N < 1) throw DomainError("N must be >= 1");
  Philox rng(seed, stream);
  std::vector<double> diag(N), off(N > 0 ? N - 1 : 0);
  for (auto& x : diag) x = rng.normal();
  // off-diagonal i is chi_{2(N-1-i)}/sqrt(2), i.e. sqrt(Gamma(N-1-i, 1))
  for (int i = 0; i + 1 < N; ++i) off[i] = std::sqrt(rng.gamma(static_cast<double>(N - 1 - i)));
  Spectrum s;
  s.N = N;
  s.eigenvalues = tridiag_eigenvalues(std::move(diag), std::move(off));
  const double scale = 1.0 / (2.0 * std::sqrt(static_cast<double>(N)));
  for (auto& x : s.eigenvalues) x *= scale;
  s.model = "gue";
  s.seed = seed;
  s.stream = stream;
  s.sampler = SamplerKind::tridiagonal;
  return s;
}

namespace {

// Quantiles of rho, used as the MCMC starting configuration.
std::vector<double> equilibrium_quantiles(const EquilibriumModel& m, int N) {
  double a = support_left(m), b = support_right(m);
  auto cdf = [&](double x) {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    return integrate_adaptive_real(m.rho, a, x, 1e-10);
  };
  std::vector<double> xs(N);
  for (int i = 0; i < N; ++i) {
    double target = (i + 0.5) / N, lo = a, hi = b;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (cdf(mid) < target ? lo : hi) = mid;
    }
    xs[i] = 0.5 * (lo + hi);
  }
  return xs;
}

double log_gas_energy(const EquilibriumModel& m, const std::vector<double>& x) {
  const std::size_t n = x.size();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e += static_cast<double>(n) * m.V(x[i]);
    for (std::size_t j = i + 1; j < n; ++j) e -= 2.0 * std::log(std::abs(x[i] - x[j]));
  }
  return e;
}

}  // namespace

Spectrum sample_spectrum_mcmc(const EquilibriumModel& m, int N, int sweeps, double step,
                              std::uint64_t seed, std::uint64_t stream) {
  if (N < 1 || sweeps < 1 || step < 0.0) throw DomainError("invalid MCMC parameters");
  Philox rng(seed, stream);
  std::vector<double> x = equilibrium_quantiles(m, N);
  const double dN = N;
  long accepted = 0, proposed = 0;
  Spectrum s;
  s.energy_trace.reserve(sweeps);
  for (int sw = 0; sw < sweeps; ++sw) {
    for (int i = 0; i < N; ++i) {
      double prop = x[i] + step * rng.normal();
      double u = rng.uniform();
      ++proposed;
      if (prop == x[i]) continue;
      double delta = -dN * (m.V(prop) - m.V(x[i]));
      for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        delta += 2.0 * (std::log(std::abs(prop - x[j])) - std::log(std::abs(x[i] - x[j])));
      }
      if (std::log(u) < delta) {
        x[i] = prop;
        ++accepted;
      }
    }
    s.energy_trace.push_back(log_gas_energy(m, x));
  }
  std::sort(x.begin(), x.end());
  s.N = N;
  s.eigenvalues = std::move(x);
  s.model = m.name;
  s.seed = seed;
  s.stream = stream;
  s.sampler = SamplerKind::mcmc;
  s.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposed);
  s.acceptance_flagged = step > 0.0 && (s.acceptance_rate < 0.1 || s.acceptance_rate > 0.9);
  return s;
}

void write_spectrum(const Spectrum& s, const std::filesystem::path& csv_path) {
  std::ostringstream os;
  os << "index,eigenvalue\n";
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) os << i << ',' << fmt17(s.eigenvalues[i]) << '\n';
  atomic_write(csv_path, os.str());
  nlohmann::ordered_json j;
  j["N"] = s.N;
  j["model"] = s.model;
  j["seed"] = s.seed;
  j["stream"] = s.stream;
  j["sampler"] = s.sampler == SamplerKind::tridiagonal ? "tridiagonal" : "mcmc";
  if (s.sampler == SamplerKind::mcmc) j["acceptance_rate"] = s.acceptance_rate;
  std::filesystem::path side = csv_path;
  side.replace_extension(".json");
  atomic_write(side, j.dump(2) + "\n");
}

Spectrum read_spectrum(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path.string());
  Spectrum s;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    s.eigenvalues.push_back(std::stod(line.substr(comma + 1)));
  }
  s.N = static_cast<int>(s.eigenvalues.size());
  std::filesystem::path side = csv_path;
  side.replace_extension(".json");
  if (std::ifstream js{side}) {
    auto j = nlohmann::json::parse(js);
    s.model = j.value("model", "");
    s.seed = j.value("seed", std::uint64_t{0});
    s.stream = j.value("stream", std::uint64_t{0});
    s.sampler = j.value("sampler", "tridiagonal") == "mcmc" ? SamplerKind::mcmc : SamplerKind::tridiagonal;
  }
  return s;
}

}  // namespace detfield
