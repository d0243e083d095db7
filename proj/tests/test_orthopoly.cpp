#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "detfield/orthopoly.hpp"
#include "detfield/rng.hpp"

using namespace detfield;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("Faddeeva function against scipy wofz") {
  CHECK(rel(faddeeva_w({1, 1}), {0.30474420525691254, 0.2082189382028316}) < 1e-13);
  CHECK(rel(faddeeva_w({0.5, 2}), {0.2452759902263585, 0.0515214783436358}) < 1e-13);
  CHECK(rel(faddeeva_w({-3, 0.1}), {0.007942680998770001, -0.20074234309867764}) < 1e-12);
}

TEST_CASE("GUE recurrence and normalization") {
  auto m = gue_model();
  auto t = recurrence_table(m, 8, 20);
  CHECK(t.gaussian);
  for (int n = 1; n <= 20; ++n) {
    CHECK(t.a2_at(n) == doctest::Approx(n / 32.0).epsilon(1e-15));
    CHECK(t.beta_at(n) == 0.0);
  }
  CHECK(t.gamma0 * t.gamma0 == doctest::Approx(std::sqrt(16.0 / pi)).epsilon(1e-14));
  CHECK(gamma0_quadrature(m, 8) == doctest::Approx(t.gamma0).epsilon(1e-12));
  // monic Hermite: pi_5(x) = H_5(sqrt(2N) x) / (2 sqrt(2N))^5, by numpy
  cplx p5 = eval_pi(t, 5, {0.3, 0.2}).value();
  CHECK(rel(p5, {0.00123703125000000160, -0.0102253125}) < 1e-13);
}

TEST_CASE("Cauchy transforms against quadrature oracles") {
  auto t = recurrence_table(gue_model(), 8, 20);
  cplx q{0.3, 0.2};
  // (2 pi i)^{-1} int e^{-16 x^2} / (x - q) dx by mpmath
  CHECK(rel(h0_gaussian(t, q), {0.138346675471731801, 0.133378321357756339}) < 1e-13);
  CHECK(rel(eval_h(t, 0, q).value(), {0.138346675471731801, 0.133378321357756339}) < 1e-13);
  CHECK(rel(eval_h(t, 3, q).value(), {-0.000307835830670559091, -0.000300177049508643593}) < 1e-12);
  CHECK(rel(h_quadrature(t, 3, q), {-0.000307835830670559091, -0.000300177049508643593}) < 1e-9);
  // lower half-plane by the reflection h_n(conj q) = -conj h_n(q)
  CHECK(rel(eval_h(t, 3, std::conj(q)).value(), -std::conj(eval_h(t, 3, q).value())) < 1e-14);
  auto [hm, hn] = eval_h_pair(t, 6, {-0.4, 0.9});
  CHECK(rel(hm.value(), eval_h(t, 5, {-0.4, 0.9}).value()) < 1e-13);
  CHECK(rel(hn.value(), h_quadrature(t, 6, {-0.4, 0.9})) < 1e-8);
}

TEST_CASE("jump of h across the real axis") {
  auto t = recurrence_table(gue_model(), 4, 12);
  const double x = 0.3;
  for (int n : {0, 2, 4}) {
    cplx up = eval_h(t, n, {x, 1e-12}).value(), down = eval_h(t, n, {x, -1e-12}).value();
    cplx expect = eval_pi(t, n, {x, 0}).value() * std::exp(-4.0 * 2.0 * x * x);
    CHECK(std::abs(up - down - expect) < 1e-9);
  }
}

TEST_CASE("quartic recurrence against moment oracles") {
  auto m = quartic_model(1.0);
  auto t = recurrence_table(m, 4, 30);
  CHECK_FALSE(t.gaussian);
  CHECK(t.orth_residual < 1e-8);
  // moments of e^{-4(x^2/2 + x^4)} by mpmath
  CHECK(t.a2_at(1) == doctest::Approx(0.116979979243416297).epsilon(1e-11));
  CHECK(t.a2_at(2) == doctest::Approx(0.167299479551388859).epsilon(1e-11));
  CHECK(t.gamma0 * t.gamma0 == doctest::Approx(1.03345937449683901).epsilon(1e-11));
  for (int n = 0; n <= 30; ++n) CHECK(std::abs(t.beta_at(n)) < 1e-12);
  CHECK_FALSE(t.has(31));
}

TEST_CASE("table cache round trip") {
  auto dir = std::filesystem::temp_directory_path() / "detfield_test_tables";
  std::filesystem::remove_all(dir);
  auto m = quartic_model(0.5);
  auto a = cached_table(m, 6, 10, dir);
  auto b = cached_table(m, 6, 10, dir);
  CHECK(a.a2 == b.a2);
  CHECK(a.beta == b.beta);
  CHECK(a.gamma0 == b.gamma0);
  CHECK(std::filesystem::exists(dir / "quartic_0.5_N6_n10.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("Riemann-Hilbert determinants equal one") {
  Philox r(41, 0);
  auto m = gue_model();
  for (int trial = 0; trial < 30; ++trial) {
    int N = 1 + static_cast<int>(r.uniform() * 64);
    auto t = recurrence_table(m, N, N + 4);
    cplx q{-1.5 + 3 * r.uniform(), (r.uniform() < 0.5 ? -1 : 1) * (0.02 + r.uniform())};
    CHECK(std::abs(y_matrix(t, q).det().value() - 1.0) < 1e-9);
    CHECK(std::abs(m_matrix(t, m, q).det().value() - 1.0) < 1e-9);
    CHECK(std::abs(global_parametrix_onecut(q).det().value() - 1.0) < 1e-12);
  }
  auto qm = quartic_model(1.0);
  auto tq = recurrence_table(qm, 16, 24);
  CHECK(std::abs(y_matrix(tq, {0.2, 0.3}).det().value() - 1.0) < 1e-9);
  CHECK(std::abs(m_matrix(tq, qm, {0.2, 0.3}).det().value() - 1.0) < 1e-9);
}

TEST_CASE("M_N approaches the boundary parametrix") {
  auto m = gue_model();
  double prev = 1e9;
  for (int N : {8, 64, 512}) {
    auto t = recurrence_table(m, N, N + 4);
    cplx q{0.2, 2.0 * std::pow(N, -0.8)};
    RHMatrix M = m_matrix(t, m, q), P = global_parametrix_boundary(0.2, 1);
    double err = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) err = std::max(err, std::abs(M(i, j) - P(i, j)));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.01);
  // away from the axis the one-cut parametrix is the limit
  auto t = recurrence_table(m, 256, 260);
  RHMatrix M = m_matrix(t, m, {0.4, 0.5}), P = global_parametrix_onecut({0.4, 0.5});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(M(i, j) - P(i, j)) < 0.02);
}

TEST_CASE("parametrix boundary values") {
  cplx g = gamma_onecut({0.2, 1e-14});
  CHECK(std::abs(g - std::pow(1.2 / 0.8, 0.25) * std::polar(1.0, -pi / 4)) < 1e-10);
  CHECK(r_weight(gue_model(), {0.0, 1.0}) == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-14));
  CHECK_THROWS_AS(r_weight(gue_model(), {1.0, 0.0}), DomainError);
}
