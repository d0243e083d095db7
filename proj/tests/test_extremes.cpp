#include <doctest.h>

#include <cmath>
#include <sstream>

#include "detfield/extremes.hpp"
#include "detfield/rng.hpp"

using namespace detfield;

TEST_CASE("Chebyshev grid") {
  auto x = cheb_grid(2);
  REQUIRE(x.size() == 5);
  CHECK(x[0] == 1.0);
  CHECK(x[2] == 0.0);
  CHECK(x[4] == -1.0);
  CHECK(x[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  auto y = cheb_grid(37);
  CHECK(y.size() == 75);
  CHECK(y[37] == 0.0);
  for (std::size_t k = 1; k < y.size(); ++k) CHECK(y[k] < y[k - 1]);
}

TEST_CASE("field is small far away and log sums match the naive loop") {
  auto m = gue_model();
  auto s = sample_spectrum_gue(128, 4, 0);
  CHECK(std::abs(field_q(s, m, cplx{1e6, 0})) < 1e-3);
  CHECK(std::abs(field_q(s, m, cplx{0, 1e6})) < 1e-3);
  auto x = cheb_grid(128);
  for (double shift : {0.0, -2.0 / 128}) {
    std::vector<double> out;
    log_abs_charpoly(s.eigenvalues, x, shift, out);
    double worst = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      double naive = 0;
      for (double l : s.eigenvalues) naive += std::log(std::abs(cplx{x[k] - l, shift}));
      worst = std::max(worst, std::abs(out[k] - naive));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("shifted maximum dominates with the shift constant") {
  auto m = gue_model();
  CHECK(shift_constant(m) == doctest::Approx(2.0).epsilon(1e-12));
  // pointwise: N (Re g(x - iy/N) - Re g(x)) <= C_V y
  const int N = 256;
  const double y = 2.0;
  auto x = cheb_grid(N);
  auto c0 = centering_on_grid(m, N, x, 0.0);
  auto c1 = centering_on_grid(m, N, x, -y / N);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(c1[k] - c0[k] <= shift_constant(m) * y + 1e-9);
  long bad = 0;
  for (int i = 0; i < 100; ++i) {
    auto r = regularized_max(sample_spectrum_gue(N, 21, i), m, y);
    if (!r.ordering_ok) ++bad;
    CHECK(r.m_star <= r.m_star_reg + shift_constant(m) * y);
  }
  CHECK(bad == 0);
}

TEST_CASE("factor 14 on simple polynomials") {
  CHECK(factor14_chebyshev({3.0}).max_ratio == doctest::Approx(1.0));
  for (int N = 1; N <= 20; ++N) {
    std::vector<double> c(N + 1, 0.0);
    c[N] = 1.0;
    auto f = factor14_chebyshev(c);
    CHECK(f.max_ratio >= 1.0 - 1e-12);
    CHECK(f.max_ratio <= 14.0);
  }
  // roots of T_3 give the same polynomial up to scale
  std::vector<cplx> r{std::cos(pi / 6), 0.0, -std::cos(pi / 6)};
  CHECK(factor14_roots(r).max_ratio == doctest::Approx(factor14_chebyshev({0, 0, 0, 1}).max_ratio).epsilon(1e-9));
}

TEST_CASE("experiment is reproducible and thread independent") {
  auto m = gue_model();
  MaxExperimentConfig cfg;
  cfg.N = 64;
  cfg.n_samples = 12;
  cfg.seed = 9;
  cfg.threads = 1;
  auto a = max_experiment(m, cfg);
  cfg.threads = 3;
  auto b = max_experiment(m, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].m_star == b[i].m_star);
    CHECK(a[i].m_star_dense == b[i].m_star_dense);
    CHECK(a[i].m_star_dense >= a[i].m_star - 1e-12);
    CHECK(a[i].seed_index == static_cast<long>(i));
  }
  std::ostringstream os;
  write_max_csv(a, os);
  CHECK(os.str().rfind("N,seed_index,m_star,m_star_over_logN,m_star_centered_2nd_order\n", 0) == 0);
  auto s = summarize(a);
  CHECK(s.n_samples == 12);
  CHECK(s.q1_ratio <= s.median_ratio);
  CHECK(s.median_ratio <= s.q3_ratio);
}

TEST_CASE("empirical centering offsets") {
  auto c = empirical_centering(gue_model(), 32, 400, 5, 2);
  const std::size_t K = c.x.size();
  REQUIRE(K == 65);
  for (std::size_t k = 0; k < K; ++k) {
    if (std::abs(c.x[k]) > 0.9) continue;
    CHECK(std::abs(c.offset[k]) < 2.0);
    double se = std::hypot(c.std_error[k], c.std_error[K - 1 - k]);
    CHECK(std::abs(c.offset[k] - c.offset[K - 1 - k]) < 5 * se + 1e-12);
  }
}

TEST_CASE("quantile interpolation") {
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({5}, 0.9) == 5.0);
}
