#include <doctest.h>

#include <cmath>

#include "detfield/charpoly.hpp"
#include "detfield/rng.hpp"

using namespace detfield;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }
cplx rc(Philox& r) { return {r.normal(), r.normal()}; }
}  // namespace

// Oracles: tensor Gauss-Hermite quadrature over the eigenvalue density of N = 2, 3 GUE,
// 110 nodes per dimension (numpy).
TEST_CASE("ratio expectations against eigenvalue quadrature") {
  auto m = gue_model();
  const cplx p{0.3, 0.4}, q{-0.2, 0.5}, qq{0.2, 0.5};
  const std::vector<cplx> p2{{0.3, 0.4}, {-0.5, 0.2}}, q2{{-0.2, 0.5}, {0.1, -0.7}};
  struct Ref {
    int N;
    cplx fs, k1, l2;
    double k2, plus, minus;
  };
  const Ref refs[] = {
      {2, {0.21451042589756117, -0.8107224244472117}, {-1.681977852975276, 0.8103202692971289},
       {0.10763240530905742, 0.06480332467294565}, 5.415163469318935, 1.1747013997556999, 1.1799989932311208},
      {3, {-0.28036660525880985, -0.713107996968}, {1.7357203047086698, 2.0938265921168027},
       {-0.07112406249286653, -0.019662859382503842}, 11.602406584863557, 1.1800138918206062,
       1.1801933917661158}};
  for (const auto& ref : refs) {
    auto t = recurrence_table(m, ref.N, ref.N + 6);
    CHECK(rel(fs_balanced(t, {p}, {q}), ref.fs) < 1e-8);
    CHECK(rel(fs_general(t, {p}, {q}), ref.fs) < 1e-8);
    CHECK(rel(fs_general(t, {}, {q}), ref.k1) < 1e-8);
    CHECK(rel(fs_general(t, {}, {qq, std::conj(qq)}), ref.k2) < 1e-8);
    CHECK(rel(fs_balanced(t, p2, q2), ref.l2) < 1e-8);
    CHECK(rel(fs_general(t, p2, q2), ref.l2) < 1e-8);
    CHECK(exp_pm2_moment(t, m, qq, 1) == doctest::Approx(ref.plus).epsilon(1e-9));
    CHECK(exp_pm2_moment(t, m, qq, -1) == doctest::Approx(ref.minus).epsilon(1e-8));
  }
}

TEST_CASE("balanced formula with p = q is one") {
  auto m = gue_model();
  Philox r(51, 0);
  for (int l = 1; l <= 3; ++l)
    for (int N : {4, 16, 64}) {
      auto t = recurrence_table(m, N, N + 4);
      std::vector<cplx> v;
      for (int i = 0; i < l; ++i) v.push_back({-1 + 2 * r.uniform(), (i % 2 ? -1 : 1) * (0.1 + r.uniform())});
      CHECK(std::abs(fs_balanced(t, v, v) - 1.0) < 1e-9);
    }
}

TEST_CASE("Laplace expansion against the direct determinant") {
  Philox r(52, 0);
  // l = 1 reduces to ad - bc after the Vandermonde factors (both 1)
  cplx a = rc(r), b = rc(r), c = rc(r), d = rc(r), p = rc(r), q = rc(r);
  CHECK(rel(laplace_split({a}, {b}, {c}, {d}, {p}, {q}), a * d - b * c) < 1e-14);
  CHECK(rel(block_vandermonde_det({a}, {b}, {c}, {d}, {p}, {q}), a * d - b * c) < 1e-14);
  // A = D = I, B = C = 0
  std::vector<cplx> P{rc(r), rc(r), rc(r)}, Q{rc(r), rc(r), rc(r)}, one(3, 1.0), zero(3, 0.0);
  CHECK(rel(laplace_split(one, zero, zero, one, P, Q), vandermonde_det(Q) * vandermonde_det(P)) < 1e-13);
  for (int trial = 0; trial < 100; ++trial) {
    int l = 1 + trial % 3;
    std::vector<cplx> A, B, C, D, pp, qv;
    for (int i = 0; i < l; ++i) {
      A.push_back(rc(r));
      B.push_back(rc(r));
      C.push_back(rc(r));
      D.push_back(rc(r));
      pp.push_back(rc(r));
      qv.push_back(rc(r));
    }
    cplx direct = block_vandermonde_det(A, B, C, D, pp, qv);
    CHECK(rel(laplace_split(A, B, C, D, pp, qv), direct) < 1e-10);
    CHECK(rel(laplace_split_normalized(A, B, C, D, pp, qv), direct / (vandermonde_det(qv) * vandermonde_det(pp))) <
          1e-10);
  }
}

TEST_CASE("log-scaled determinant") {
  std::vector<std::vector<LogComplex>> rows{{LogComplex::exp_of({800, 0}), LogComplex::from(2.0)},
                                            {LogComplex::from(3.0), LogComplex::exp_of({-800, 0})}};
  // det = e^0 - 6
  CHECK(std::abs(log_scaled_det(rows).value() - cplx{-5.0, 0}) < 1e-12);
  CHECK(vandermonde_det({1.0, 2.0, 4.0}) == cplx{(2.0 - 1) * (4.0 - 1) * (4.0 - 2), 0});
  CHECK(vandermonde_det({cplx{3, 1}}) == 1.0);
}

TEST_CASE("field moments: routes agree, conjugation symmetry, trend to the Gaussian value") {
  auto m = gue_model();
  double prev = 1e9;
  for (int N : {8, 16, 64, 128}) {
    auto t = recurrence_table(m, N, N + 4);
    double d = 0.5 * std::log(static_cast<double>(N));
    BiasSpec b{{DiskPoint::polar(d, pi / 2 + 0.5 * std::exp(-d))}, {DiskPoint::polar(d, pi / 2 - 0.5 * std::exp(-d))}};
    auto f = exp_moment_field(t, m, b);
    auto g = exp_moment_field_direct(t, m, b);
    CHECK(f.value == doctest::Approx(g.value).epsilon(1e-10));
    CHECK(f.imag_residue < 1e-10);
    BiasSpec bc{{b.plus[0].conj()}, {b.minus[0].conj()}};
    CHECK(exp_moment_field(t, m, bc).value == doctest::Approx(f.value).epsilon(1e-9));
    double err = std::abs(f.value / exp_moment_g(b) - 1.0);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("Monte Carlo harness") {
  const cplx p{0.3, 0.4}, q{-0.2, 0.5};
  auto a = mc_gue_mean(4, 20000, 3, 1, [&](const std::vector<double>& e) { return char_ratio(e, {p}, {q}); });
  auto b = mc_gue_mean(4, 20000, 3, 3, [&](const std::vector<double>& e) { return char_ratio(e, {p}, {q}); });
  CHECK(a.mean == b.mean);
  CHECK(a.se_re == b.se_re);
  auto t = recurrence_table(gue_model(), 4, 8);
  cplx f = fs_balanced(t, {p}, {q});
  CHECK(std::abs(a.mean.real() - f.real()) < 4 * a.se_re);
  CHECK(std::abs(a.mean.imag() - f.imag()) < 4 * a.se_im);
  CHECK(std::abs(char_ratio({0.1, 0.2}, {cplx{1, 0}}, {cplx{2, 0}}) - 0.9 * 0.8 / (1.9 * 1.8)) < 1e-15);
}

TEST_CASE("bias images and errors") {
  BiasSpec b{{DiskPoint::from_complex({0.1, 0.6})}, {DiskPoint::from_complex({-0.3, 0.5})}};
  std::vector<cplx> p, q;
  bias_images(b, p, q);
  REQUIRE(p.size() == 2);
  REQUIRE(q.size() == 2);
  CHECK(std::abs(p[1] - joukowsky(cplx{0.1, 0.6})) < 1e-14);
  CHECK(std::abs(p[0] - joukowsky(cplx{0.1, -0.6})) < 1e-14);
  auto t = recurrence_table(gue_model(), 8, 12);
  CHECK_THROWS(exp_pm2_moment(t, gue_model(), {0.3, 0.0}, 1));
}
