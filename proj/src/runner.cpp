#include "detfield/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "detfield/format.hpp"
#include "detfield/parallel.hpp"
#include "detfield/rng.hpp"

namespace detfield {

using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Result of one command: exit status and a list of failed checks.
struct Checks {
  std::vector<std::string> failed;
  void expect(bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  }
};

void write_or_throw(const std::string& path, const std::string& text) {
  try {
    atomic_write(path, text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot write output: ") + e.what());
  }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (k.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    kv.emplace_back(k, v);
  }
  return kv;
}

std::vector<FsCase> fs_verify_cases(const std::vector<int>& Ns, long n_samples, std::uint64_t seed, int threads) {
  const EquilibriumModel m = gue_model();
  const std::vector<std::pair<cplx, cplx>> pq = {{{0.3, 0.4}, {-0.2, 0.5}}, {{-0.5, 0.3}, {0.1, 0.8}}};
  std::vector<FsCase> out;
  for (int N : Ns) {
    OPTable t = recurrence_table(m, N, N + 4);
    for (std::size_t c = 0; c < pq.size(); ++c) {
      std::vector<cplx> p{pq[c].first}, q{pq[c].second};
      FsCase fc;
      fc.case_id = std::string(1, static_cast<char>('A' + c)) + std::to_string(N);
      fc.N = N;
      fc.formula = fs_balanced(t, p, q);
      // independent stream block per (N, case)
      std::uint64_t s = seed * 1000003ULL + static_cast<std::uint64_t>(N) * 16 + c;
      fc.mc = mc_gue_mean(N, n_samples, s, threads, [&](const std::vector<double>& e) { return char_ratio(e, p, q); });
      out.push_back(fc);
    }
  }
  return out;
}

BranchSweep branch_sweep(int hmax, int theta_points) {
  if (hmax < 0 || theta_points < 1) throw DomainError("invalid branch sweep size");
  BranchSweep s;
  s.per_hj_error.assign(static_cast<std::size_t>((hmax + 1) * (hmax + 1)), 0.0);
  for (int h = 0; h <= hmax; ++h)
    for (int j = 0; j <= hmax; ++j) {
      double worst = 0.0;
      const int k = std::min(h, j);
      for (int t = 0; t < theta_points; ++t) {
        double th = -pi + 2.0 * pi * (t + 0.5) / theta_points;
        BranchProfile b = branch_profile(h, j, th);
        worst = std::max(worst, std::abs(b.error));
        if (k > -std::log(std::abs(std::sin(0.5 * th))))
          s.refined_c = std::max(s.refined_c, std::abs(b.error) * std::abs(th) * std::exp(k));
      }
      s.per_hj_error[static_cast<std::size_t>(h * (hmax + 1) + j)] = worst;
      s.max_abs_error = std::max(s.max_abs_error, worst);
    }
  return s;
}

std::vector<LaplaceRow> laplace_bound_sweep(const EquilibriumModel& m, int N) {
  OPTable t = recurrence_table(m, N, N + 4);
  std::vector<LaplaceRow> rows;
  for (int a = 0; a <= 12; ++a)
    for (int b = 0; b < 12; ++b)
      for (int sign : {1, -1}) {
        double im = std::exp(-std::log(static_cast<double>(N)) * (1.0 - b / 11.0));
        LaplaceRow r;
        r.q = {-1.5 + 0.25 * a, im};
        r.sign = sign;
        r.value = exp_pm2_moment(t, m, r.q, sign);
        double R = r_weight(m, r.q);
        r.scaled = r.value * im / ((1.0 + im) * R * R);
        rows.push_back(r);
      }
  return rows;
}

std::vector<Factor14Row> factor14_sweep(long n_random, int max_degree, std::uint64_t seed, int threads) {
  if (max_degree < 1 || n_random < 0) throw DomainError("invalid factor-14 sweep size");
  std::vector<Factor14Row> rows(static_cast<std::size_t>(max_degree + n_random));
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    Factor14Row& r = rows[i];
    if (i < static_cast<std::size_t>(max_degree)) {
      r.kind = "chebyshev_T";
      r.case_id = static_cast<long>(i);
      r.degree = static_cast<int>(i) + 1;
      std::vector<double> c(static_cast<std::size_t>(r.degree) + 1, 0.0);
      c.back() = 1.0;
      r.max_ratio = factor14_chebyshev(c).max_ratio;
      return;
    }
    const long id = static_cast<long>(i) - max_degree;
    Philox rng(seed, static_cast<std::uint64_t>(id));
    r.case_id = id;
    r.degree = 1 + std::min(max_degree - 1, static_cast<int>(rng.uniform() * max_degree));
    if (id % 2 == 0) {
      r.kind = "random_coeffs";
      std::vector<double> c(static_cast<std::size_t>(r.degree) + 1);
      for (auto& v : c) v = rng.normal();
      if (c.back() == 0.0) c.back() = 1.0;
      r.max_ratio = factor14_chebyshev(c).max_ratio;
    } else {
      r.kind = "random_roots";
      std::vector<cplx> roots(static_cast<std::size_t>(r.degree));
      for (auto& z : roots) z = {-1.2 + 2.4 * rng.uniform(), 0.1 * rng.normal()};
      r.max_ratio = factor14_roots(roots).max_ratio;
    }
  });
  return rows;
}

namespace {

struct Options {
  std::string model = "gue";
  int N = 256;
  int n = 10;
  long samples = 0;  // 0 selects the command default
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  int threads = 0;
  std::string out;
  std::string summary;
  bool check = false;
  double y = 2.0;
  bool dense = true;
  int sweeps = 200;
  double step = 0.0;
  std::vector<int> Ns;
  int translates = 2;
  int hmax = -1;
  int theta_points = 10000;
  long trials = 1000;
  double epsilon = 0.3;
  int max_pairs = 5;
  double delta = 0.2;
  int eta = 3;
  int stride = 1;
  int max_degree = 256;
  int angles = 64;
  std::string kernel = "G";
};

std::string default_out(const std::string& cmd, const char* ext) { return cmd + ext; }

int cmd_gen_spectrum(const Options& o, Checks& ck) {
  EquilibriumModel m = model_by_name(o.model);
  if (o.N < 1) throw ConfigError("N must be >= 1");
  Spectrum s = draw_spectrum(m, o.N, o.seed, o.stream, o.sweeps, o.step);
  const std::string out = o.out.empty() ? default_out("spectrum", ".csv") : o.out;
  write_spectrum(s, out);
  std::cout << "gen-spectrum: N=" << s.N << " model=" << s.model << " -> " << out << "\n";
  ck.expect(static_cast<int>(s.eigenvalues.size()) == o.N, "eigenvalue count");
  ck.expect(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()), "eigenvalues ascending");
  ck.expect(!s.acceptance_flagged, "MCMC acceptance rate outside [0.1, 0.9]");
  return 0;
}

json summary_json(const MaxSummary& s, const std::string& model, const Options& o) {
  return json{{"model", model},
              {"N", s.N},
              {"n_samples", s.n_samples},
              {"seed", o.seed},
              {"y", o.y},
              {"centering", "g"},
              {"median_ratio", s.median_ratio},
              {"q1_ratio", s.q1_ratio},
              {"q3_ratio", s.q3_ratio},
              {"median_centered", s.median_centered},
              {"q1_centered", s.q1_centered},
              {"q3_centered", s.q3_centered},
              {"upper_tail_fraction", s.upper_tail_fraction},
              {"ordering_violations", s.ordering_violations},
              {"max_dense_gap", s.max_dense_gap}};
}

int cmd_max_experiment(const Options& o, Checks& ck) {
  EquilibriumModel m = model_by_name(o.model);
  MaxExperimentConfig cfg;
  cfg.N = o.N;
  cfg.n_samples = o.samples > 0 ? o.samples : 100;
  cfg.y = o.y;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.dense = o.dense;
  cfg.mcmc_sweeps = o.sweeps;
  cfg.mcmc_step = o.step;
  if (cfg.N < 2) throw ConfigError("N must be >= 2");
  if (!(cfg.y >= 1.0)) throw ConfigError("y must be >= 1");
  auto rec = max_experiment(m, cfg);
  auto sum = summarize(rec);
  const std::string out = o.out.empty() ? default_out("max_experiment", ".csv") : o.out;
  std::string sumpath = o.summary;
  if (sumpath.empty()) {
    std::filesystem::path p(out);
    sumpath = (p.parent_path() / (p.stem().string() + ".summary.json")).string();
  }
  std::ostringstream os;
  write_max_csv(rec, os);
  write_or_throw(out, os.str());
  write_or_throw(sumpath, summary_json(sum, m.name, o).dump(2) + "\n");
  std::cout << "max-experiment: N=" << sum.N << " samples=" << sum.n_samples << " median m*/logN=" << fmt17(sum.median_ratio)
            << " median centered=" << fmt17(sum.median_centered) << "\n";
  ck.expect(sum.ordering_violations == 0, "regularized ordering violated");
  ck.expect(sum.max_dense_gap <= std::log(14.0), "dense maximum exceeds grid maximum by more than log 14");
  ck.expect(sum.median_ratio >= 0.55 && sum.median_ratio <= 1.1, "median m*/log N outside [0.55, 1.1]");
  return 0;
}

int cmd_fs_verify(const Options& o, Checks& ck) {
  std::vector<int> Ns = o.Ns.empty() ? std::vector<int>{4, 5, 6} : o.Ns;
  for (int N : Ns)
    if (N < 1 || N > 64) throw ConfigError("fs-verify N must be in [1, 64]");
  long ns = o.samples > 0 ? o.samples : 1000000;
  auto cases = fs_verify_cases(Ns, ns, o.seed, o.threads);
  std::ostringstream os;
  os << "case_id,N,formula_value,mc_value,mc_stderr,z_score\n";
  double worst = 0.0;
  for (const auto& c : cases) {
    for (int part = 0; part < 2; ++part) {
      double f = part == 0 ? c.formula.real() : c.formula.imag();
      double mc = part == 0 ? c.mc.mean.real() : c.mc.mean.imag();
      double se = part == 0 ? c.mc.se_re : c.mc.se_im;
      double z = (f - mc) / se;
      worst = std::max(worst, std::abs(z));
      os << c.case_id << (part == 0 ? ".re" : ".im") << ',' << c.N << ',' << fmt17(f) << ',' << fmt17(mc) << ','
         << fmt17(se) << ',' << fmt17(z) << '\n';
    }
  }
  const std::string out = o.out.empty() ? default_out("fs_verify", ".csv") : o.out;
  write_or_throw(out, os.str());
  std::cout << "fs-verify: " << cases.size() << " cases, max |z| = " << fmt17(worst) << "\n";
  ck.expect(worst <= 3.0, "formula and Monte Carlo differ by more than 3 standard errors");
  return 0;
}

int cmd_mem_verify(const Options& o, Checks& ck) {
  EquilibriumModel m = model_by_name(o.model);
  std::vector<int> Ns = o.Ns.empty() ? std::vector<int>{64, 128, 256, 512} : o.Ns;
  for (int N : Ns)
    if (N < 4 || N > 4096) throw ConfigError("mem-verify N must be in [4, 4096]");
  if (o.translates < 0 || o.translates > 16) throw ConfigError("translates must be in [0, 16]");
  std::sort(Ns.begin(), Ns.end());
  auto rows = mem_suite(m, Ns, o.translates, o.threads);
  std::ostringstream os;
  os << "N,bias_id,ratio,abs_error\n";
  for (const auto& r : rows) os << r.N << ',' << r.bias_id << ',' << fmt17(r.ratio) << ',' << fmt17(r.abs_error) << '\n';
  const std::string out = o.out.empty() ? default_out("mem_verify", ".csv") : o.out;
  write_or_throw(out, os.str());
  const std::size_t per = static_cast<std::size_t>(o.translates) + 1;
  std::cout << "mem-verify: " << rows.size() << " rows; |ratio-1| at N=" << Ns.back() << ": "
            << fmt17(rows[(Ns.size() - 1) * per].abs_error) << "\n";
  for (std::size_t id = 0; id < per; ++id) {
    for (std::size_t a = 1; a < Ns.size(); ++a) {
      bool dec = rows[a * per + id].abs_error < rows[(a - 1) * per + id].abs_error;
      if (id == 0) ck.expect(dec, "singleton |ratio-1| not strictly decreasing at N=" + std::to_string(Ns[a]));
    }
    ck.expect(rows[(Ns.size() - 1) * per + id].abs_error < rows[id].abs_error,
              "bias " + std::to_string(id) + ": |ratio-1| not smaller at the largest N");
  }
  ck.expect(rows[(Ns.size() - 1) * per].abs_error < 0.25, "singleton |ratio-1| >= 0.25 at the largest N");
  return 0;
}

int cmd_branch_verify(const Options& o, Checks& ck) {
  int hmax = o.hmax >= 0 ? o.hmax : 25;
  if (hmax > 60 || o.theta_points < 16) throw ConfigError("branch-verify needs hmax <= 60 and theta-points >= 16");
  auto s = branch_sweep(hmax, o.theta_points);
  std::ostringstream os;
  os << "h,j,max_abs_error\n";
  for (int h = 0; h <= hmax; ++h)
    for (int j = 0; j <= hmax; ++j) os << h << ',' << j << ',' << fmt17(s.per_hj_error[h * (hmax + 1) + j]) << '\n';
  const std::string out = o.out.empty() ? default_out("branch_verify", ".csv") : o.out;
  write_or_throw(out, os.str());
  std::cout << "branch-verify: max |error| = " << fmt17(s.max_abs_error) << ", refined C = " << fmt17(s.refined_c)
            << "\n";
  ck.expect(s.max_abs_error <= calibrated::branch_uniform, "profile error above the calibrated uniform bound");
  ck.expect(s.refined_c <= calibrated::branch_refined && s.refined_c <= 10.0, "refined constant above calibration");
  return 0;
}

int cmd_matching_verify(const Options& o, Checks& ck) {
  if (o.trials < 2 || o.max_pairs < 1 || o.max_pairs > 8 || !(o.epsilon > 0.0 && o.epsilon < 1.0))
    throw ConfigError("matching-verify needs trials >= 2, 1 <= max-pairs <= 8, 0 < epsilon < 1");
  auto s = matching_experiment(o.trials, o.epsilon, o.max_pairs, o.seed, o.threads);
  std::ostringstream os;
  os << "trial,sup_L\n";
  for (std::size_t t = 0; t < s.per_trial.size(); ++t) os << t << ',' << fmt17(s.per_trial[t]) << '\n';
  const std::string out = o.out.empty() ? default_out("matching_verify", ".csv") : o.out;
  write_or_throw(out, os.str());
  std::cout << "matching-verify: sup first half = " << fmt17(s.sup_first_half) << ", sup all = " << fmt17(s.sup_all)
            << "\n";
  ck.expect(s.finite, "non-finite subset ratio");
  ck.expect(s.sup_all <= 2.0 * s.sup_first_half, "sup over all trials more than twice the first-half sup");
  return 0;
}

json lower_bound_json(const LowerBoundResult& r) {
  json bins = json::array();
  for (const auto& b : r.bins)
    bins.push_back({{"m", b.m},
                    {"pairs", b.pairs},
                    {"mc_ratio", b.mc_ratio},
                    {"exact_ratio", b.exact_ratio},
                    {"exact_min", b.exact_min},
                    {"exact_max", b.exact_max},
                    {"ray_anchor_min", b.ray_anchor_min},
                    {"ray_anchor_max", b.ray_anchor_max}});
  return json{{"n", r.params.n},
              {"delta", r.params.delta},
              {"eta", r.params.eta},
              {"n0", r.params.n0()},
              {"r", r.params.r()},
              {"stride", r.params.stride},
              {"omega_count", r.omega_count},
              {"n_samples", r.n_samples},
              {"p_z_positive", r.p_z_positive},
              {"p_z_stderr", r.p_z_se},
              {"cs_ratio", r.cs_ratio},
              {"one_point_ratio_min", r.one_point_min},
              {"one_point_ratio_max", r.one_point_max},
              {"barrier_pass_biased", r.barrier_pass_biased},
              {"recentered_max_median", r.recentered_max_median},
              {"recentered_max_fraction", r.recentered_max_fraction},
              {"factorization", r.factorization == Factorization::cholesky ? "cholesky" : "eigen"},
              {"per_m_bins", bins}};
}

int cmd_lowerbound(const Options& o, Checks& ck) {
  LowerBoundParams p;
  p.n = o.n;
  p.delta = o.delta;
  p.eta = o.eta;
  p.stride = o.stride;
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  long ns = o.samples > 0 ? o.samples : 500;
  auto r = lower_bound_mc(p, ns, o.seed, o.threads);
  const std::string out = o.out.empty() ? default_out("lowerbound", ".json") : o.out;
  write_or_throw(out, lower_bound_json(r).dump(2) + "\n");
  std::cout << "lowerbound-sim: |Omega|=" << r.omega_count << " P[Z>0]=" << fmt17(r.p_z_positive)
            << " cs_ratio=" << fmt17(r.cs_ratio) << " recentered max fraction=" << fmt17(r.recentered_max_fraction)
            << "\n";
  ck.expect(r.p_z_positive >= r.cs_ratio - 2.0 * r.p_z_se, "P[Z>0] below the Cauchy-Schwarz ratio");
  ck.expect(r.recentered_max_fraction >= 0.5, "recentered max exceeds (1-2 delta) n in fewer than half the runs");
  for (const auto& b : r.bins)
    if (b.m <= 0.75 * p.b(p.r()))
      ck.expect(std::abs(b.mc_ratio - 1.0) <= 0.3, "two-point factorization off by more than 0.3 at m=" + std::to_string(b.m));
  return 0;
}

int cmd_upperbound(const Options& o, Checks& ck) {
  if (o.max_degree < 1 || o.max_degree > 4096) throw ConfigError("max-degree must be in [1, 4096]");
  long nr = o.samples > 0 ? o.samples : 1000;
  int N = o.Ns.empty() ? 64 : o.Ns.front();
  auto f14 = factor14_sweep(nr, o.max_degree, o.seed, o.threads);
  auto lap = laplace_bound_sweep(gue_model(), N);
  std::ostringstream os;
  os << "kind,case_id,parameter,value,bound\n";
  double worst14 = 1.0, worst_lap = 0.0;
  for (const auto& r : f14) {
    os << r.kind << ',' << r.case_id << ',' << r.degree << ',' << fmt17(r.max_ratio) << ",14\n";
    worst14 = std::max(worst14, r.max_ratio);
  }
  for (std::size_t i = 0; i < lap.size(); ++i) {
    const auto& r = lap[i];
    os << (r.sign > 0 ? "laplace_plus" : "laplace_minus") << ',' << i << ',' << N << ',' << fmt17(r.scaled) << ','
       << fmt17(calibrated::laplace_bound) << '\n';
    worst_lap = std::max(worst_lap, r.scaled);
  }
  const std::string out = o.out.empty() ? default_out("upperbound_verify", ".csv") : o.out;
  write_or_throw(out, os.str());
  std::cout << "upperbound-verify: max factor ratio = " << fmt17(worst14) << ", max Laplace scaled = " << fmt17(worst_lap)
            << "\n";
  ck.expect(worst14 <= 14.0, "Chebyshev grid factor above 14");
  ck.expect(worst_lap <= calibrated::laplace_bound && worst_lap <= 100.0, "Laplace bound above calibration");
  return 0;
}

int cmd_brw(const Options& o, Checks& ck) {
  int hmax = o.hmax >= 0 ? o.hmax : 12;
  if (hmax < 1 || hmax > 40 || o.angles < 4 || o.angles > 512) throw ConfigError("brw-verify needs 1 <= hmax <= 40, 4 <= angles <= 512");
  if (o.kernel != "G" && o.kernel != "T") throw ConfigError("kernel must be G or T");
  std::vector<DiskPoint> grid;
  for (int h = 1; h <= hmax; ++h)
    for (int t = 0; t < o.angles; ++t) grid.push_back(DiskPoint::polar(h, -pi + 2.0 * pi * t / o.angles));
  auto s = brw_check(grid, o.kernel == "G" ? KernelKind::G : KernelKind::T);
  json j{{"kernel", o.kernel},      {"hmax", hmax},
         {"angles", o.angles},      {"c_b", s.c_b},
         {"c_c", s.c_c},            {"k_offset_min", s.k_offset_min},
         {"k_offset_max", s.k_offset_max}, {"close_pairs", s.close_pairs}};
  const std::string out = o.out.empty() ? default_out("brw_verify", ".json") : o.out;
  write_or_throw(out, j.dump(2) + "\n");
  std::cout << "brw-verify: c_b=" << fmt17(s.c_b) << " c_c=" << fmt17(s.c_c) << " offsets [" << fmt17(s.k_offset_min)
            << ", " << fmt17(s.k_offset_max) << "]\n";
  ck.expect(std::isfinite(s.c_b) && std::isfinite(s.c_c), "non-finite BRW constants");
  if (o.kernel == "G") {
    const double c = -0.5 * std::log(2.0), w = calibrated::brw_offset_halfwidth;
    ck.expect(s.k_offset_min >= c - w && s.k_offset_max <= c + w, "covariance offsets outside the calibrated band");
  }
  return 0;
}

bool has_flag(const std::vector<std::string>& args, const std::string& key) {
  const std::string f = "--" + key;
  for (const auto& a : args)
    if (a == f || a.rfind(f + "=", 0) == 0) return true;
  return false;
}

const std::vector<std::string> kCommands = {"gen-spectrum",  "max-experiment", "fs-verify",
                                            "mem-verify",    "branch-verify",  "matching-verify",
                                            "lowerbound-sim", "upperbound-verify", "brw-verify"};

}  // namespace

int run(const std::vector<std::string>& args_in) {
  Options o;
  std::vector<std::string> args;
  std::string config_path;
  for (std::size_t i = 0; i < args_in.size(); ++i) {
    if (args_in[i] == "--config" && i + 1 < args_in.size()) {
      config_path = args_in[++i];
    } else if (args_in[i].rfind("--config=", 0) == 0) {
      config_path = args_in[i].substr(9);
    } else {
      args.push_back(args_in[i]);
    }
  }

  CLI::App app{"Characteristic-polynomial field laboratory"};
  app.require_subcommand(1);
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : kCommands) subs[name] = app.add_subcommand(name);

  auto common = [&](CLI::App* s, bool with_samples) {
    s->add_option("--seed", o.seed, "master seed");
    s->add_option("--threads", o.threads, "worker threads (default CHARPOLY_THREADS)")->check(CLI::Range(1, 1024));
    s->add_option("--out", o.out, "output path");
    s->add_flag("--check", o.check, "run this command's acceptance assertions");
    if (with_samples) s->add_option("--samples", o.samples)->check(CLI::Range(1L, 100000000L));
  };
  {
    auto* s = subs["gen-spectrum"];
    common(s, false);
    s->add_option("--model", o.model);
    s->add_option("--N", o.N)->check(CLI::Range(1, 1 << 16));
    s->add_option("--stream", o.stream);
    s->add_option("--sweeps", o.sweeps)->check(CLI::Range(1, 1000000));
    s->add_option("--step", o.step)->check(CLI::Range(0.0, 1.0));
  }
  {
    auto* s = subs["max-experiment"];
    common(s, true);
    s->add_option("--model", o.model);
    s->add_option("--N", o.N)->check(CLI::Range(2, 4096));
    s->add_option("--y", o.y)->check(CLI::Range(1.0, 1e6));
    s->add_option("--dense", o.dense);
    s->add_option("--sweeps", o.sweeps)->check(CLI::Range(1, 1000000));
    s->add_option("--step", o.step)->check(CLI::Range(0.0, 1.0));
    s->add_option("--summary", o.summary, "summary JSON path");
  }
  {
    auto* s = subs["fs-verify"];
    common(s, true);
    s->add_option("--Ns", o.Ns)->delimiter(',');
  }
  {
    auto* s = subs["mem-verify"];
    common(s, false);
    s->add_option("--model", o.model);
    s->add_option("--Ns", o.Ns)->delimiter(',');
    s->add_option("--translates", o.translates);
  }
  {
    auto* s = subs["branch-verify"];
    common(s, false);
    s->add_option("--hmax", o.hmax);
    s->add_option("--theta-points", o.theta_points);
  }
  {
    auto* s = subs["matching-verify"];
    common(s, false);
    s->add_option("--trials", o.trials);
    s->add_option("--epsilon", o.epsilon);
    s->add_option("--max-pairs", o.max_pairs);
  }
  {
    auto* s = subs["lowerbound-sim"];
    common(s, true);
    s->add_option("--n", o.n);
    s->add_option("--delta", o.delta);
    s->add_option("--eta", o.eta);
    s->add_option("--stride", o.stride);
  }
  {
    auto* s = subs["upperbound-verify"];
    common(s, true);
    s->add_option("--max-degree", o.max_degree);
    s->add_option("--Ns", o.Ns)->delimiter(',');
  }
  {
    auto* s = subs["brw-verify"];
    common(s, false);
    s->add_option("--hmax", o.hmax);
    s->add_option("--angles", o.angles);
    s->add_option("--kernel", o.kernel);
  }

  try {
    if (!config_path.empty()) {
      auto kv = read_config(config_path);
      bool have_cmd = !args.empty() && subs.count(args.front());
      std::vector<std::string> extra;
      for (const auto& [k, v] : kv) {
        if (k == "command") {
          if (!have_cmd) {
            args.insert(args.begin(), v);
            have_cmd = true;
          }
          continue;
        }
        if (has_flag(args, k)) continue;  // flags override the file
        if (k == "check") {
          if (v == "true" || v == "1") extra.push_back("--check");
          else if (v != "false" && v != "0") throw ConfigError("check must be true or false");
          continue;
        }
        extra.push_back("--" + k);
        extra.push_back(v);
      }
      args.insert(args.end(), extra.begin(), extra.end());
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  }

  if (o.threads <= 0) o.threads = default_threads();
  std::string cmd;
  for (const auto& [name, s] : subs)
    if (s->parsed()) cmd = name;

  Checks ck;
  try {
    if (cmd == "gen-spectrum") cmd_gen_spectrum(o, ck);
    else if (cmd == "max-experiment") cmd_max_experiment(o, ck);
    else if (cmd == "fs-verify") cmd_fs_verify(o, ck);
    else if (cmd == "mem-verify") cmd_mem_verify(o, ck);
    else if (cmd == "branch-verify") cmd_branch_verify(o, ck);
    else if (cmd == "matching-verify") cmd_matching_verify(o, ck);
    else if (cmd == "lowerbound-sim") cmd_lowerbound(o, ck);
    else if (cmd == "upperbound-verify") cmd_upperbound(o, ck);
    else if (cmd == "brw-verify") cmd_brw(o, ck);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_check_failed;
  }
  if (!o.check) return exit_ok;
  for (const auto& f : ck.failed) std::cout << "check failed: " << f << "\n";
  std::cout << "check: " << (ck.failed.empty() ? "PASS" : "FAIL") << "\n";
  return ck.failed.empty() ? exit_ok : exit_check_failed;
}

}  // namespace detfield
