#include <doctest.h>

#include <cmath>

#include "detfield/momentlab.hpp"

using namespace detfield;

TEST_CASE("Omega grid") {
  LowerBoundParams p;  // n = 10, delta = 0.2
  CHECK(p.n0() == 8);
  auto th = omega_grid(p);
  REQUIRE(th.size() == 807);
  CHECK(th[403] == pi / 2);
  for (std::size_t k = 1; k < th.size(); ++k) CHECK(th[k] - th[k - 1] == doctest::Approx(std::exp(-8.0)));
  p.stride = 4;
  auto th4 = omega_grid(p);
  CHECK(th4.size() == 201);
  CHECK(th4[100] == pi / 2);
}

TEST_CASE("lower-bound parameters") {
  LowerBoundParams p;
  CHECK(p.step() == 2);
  CHECK(p.r() == 3);  // b_3 = 6 first exceeds 4.68, so no barrier windows remain
  LowerBoundParams q{12, 0.2, 3, 1};
  CHECK(q.n0() == 9);
  CHECK(q.r() == 2);
  CHECK_THROWS_AS(LowerBoundParams({13, 0.2, 3, 1}).validate(), DomainError);
  CHECK_THROWS_AS(LowerBoundParams({10, 0.5, 3, 1}).validate(), DomainError);
  CHECK_THROWS_AS(LowerBoundParams({10, 0.2, 9, 1}).validate(), DomainError);
  CHECK_THROWS_AS(LowerBoundParams({10, 0.2, 3, 0}).validate(), DomainError);
}

TEST_CASE("midpoint index") {
  const double e8 = std::exp(-8.0);
  CHECK(midpoint(pi / 2, pi / 2 + e8, 8) == 8);
  CHECK(midpoint(pi / 2, pi / 2 + 2 * e8, 8) == 7);
  CHECK(midpoint(pi / 2, pi / 2 + std::exp(-3.0), 8) == 3);
  CHECK(midpoint(0.0, pi, 8) == -1);  // |w1 - w2| = 2
  CHECK_THROWS_AS(midpoint(1.0, 1.0, 8), DomainError);
}

TEST_CASE("barrier indicator") {
  LowerBoundParams p{12, 0.2, 3, 1};  // r = 2, one window at b_3 = 9, half-width 3 sqrt(12)
  CHECK(barrier_indicator({1.5 + 3.0}, 1.5, p));
  CHECK(barrier_indicator({1.5 + 3.0 + 10.0}, 1.5, p));
  CHECK_FALSE(barrier_indicator({1.5 + 3.0 + 10.5}, 1.5, p));
  CHECK_FALSE(barrier_indicator({1.5 + 3.0 - 10.5}, 1.5, p));
  CHECK_THROWS_AS(barrier_indicator({1.0, 2.0}, 0.0, p), DomainError);
  LowerBoundParams d;  // r = eta: vacuous
  CHECK(barrier_indicator({}, 0.0, d));
}

TEST_CASE("separated and paired bias classes") {
  BiasClassParams cp;
  cp.N = 64;
  BiasSpec empty;
  CHECK(validate_separated_bias(empty, cp));
  BiasSpec one = singleton_pair_bias(64);
  CHECK(validate_separated_bias(one, cp));
  double d = hyp_dist(one.plus[0], one.minus[0]);
  cp.epsilon = d * 1.01;
  CHECK_FALSE(validate_separated_bias(one, cp));
  cp.epsilon = d * 0.99;
  CHECK(validate_separated_bias(one, cp));
  cp.k = 2;
  CHECK_FALSE(validate_separated_bias(one, cp));
  cp.k = 0;

  const double dep = 0.5 * std::log(64.0);
  DiskPoint z = DiskPoint::polar(dep, pi / 2 + 0.3), w = DiskPoint::polar(dep, pi / 2 + 0.3 + 1e-3);
  CHECK(validate_paired_bias(one, {{z, w}}, cp));
  // w placed next to an existing minus point instead
  DiskPoint far = DiskPoint::polar(dep, pi / 2 - 0.3);
  DiskPoint near_minus = one.minus[0].rotate(1e-4);
  CHECK_FALSE(validate_paired_bias(one, {{far, near_minus}}, cp));
}

TEST_CASE("matching ratio") {
  auto P = [](double x, double y) { return DiskPoint::from_complex({x, y}); };
  std::vector<DiskPoint> Z{P(0.1, 0.2)}, W{P(-0.3, 0.4)};
  double dzw = pseudo_dist(Z[0], W[0]);
  CHECK(matching_ratio(Z, W, {true}, {true}) == doctest::Approx(dzw));
  CHECK(matching_ratio(Z, W, {false}, {false}) == doctest::Approx(dzw));
  CHECK(matching_ratio(Z, W, {true}, {false}) == 1.0);
  CHECK(matching_sup(Z, W) == 1.0);

  std::vector<DiskPoint> Z3{P(0.1, 0.2), P(0.5, -0.1), P(-0.6, -0.2)}, W3{P(-0.3, 0.4), P(0.0, -0.7), P(0.2, 0.6)};
  CHECK(matching_ratio(Z3, W3, {true, true, true}, {true, true, true}) <= 1.0);
  // T = {z1}, S = {}: d(z2,w)d(z3,w) products over (T^c, S^c) divided by d(z1,z2)d(z1,z3)
  double num = 1, den = pseudo_dist(Z3[0], Z3[1]) * pseudo_dist(Z3[0], Z3[2]);
  for (int i = 1; i < 3; ++i)
    for (int j = 0; j < 3; ++j) num *= pseudo_dist(Z3[i], W3[j]);
  CHECK(matching_ratio(Z3, W3, {true, false, false}, {false, false, false}) == doctest::Approx(num / den));
  CHECK_THROWS_AS(matching_ratio({}, W, {}, {true}), DomainError);
}

TEST_CASE("pair configurations") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto c = random_pair_configuration(2, 2, 0.3, 17, i);
    CHECK(pair_config_validate(c));
    CHECK(c.z.size() == 4);
    auto again = random_pair_configuration(2, 2, 0.3, 17, i);
    CHECK(again.z[3].theta == c.z[3].theta);
  }
  auto c = random_pair_configuration(0, 2, 0.3, 3, 0);
  std::swap(c.w[0], c.w[1]);  // each tight partner now sits far away
  CHECK_FALSE(pair_config_validate(c));
  auto s = matching_experiment(40, 0.3, 4, 8, 2);
  CHECK(s.finite);
  CHECK(s.sup_all >= 1.0);
  CHECK(s.sup_first_half <= s.sup_all);
  CHECK(matching_experiment(40, 0.3, 4, 8, 1).per_trial == s.per_trial);
}

TEST_CASE("moment ratios") {
  auto m = gue_model();
  auto t = recurrence_table(m, 64, 68);
  CHECK(mem_ratio(t, m, BiasSpec{}) == 1.0);
  auto rows = mem_suite(m, {64, 128, 256}, 1, 2);
  REQUIRE(rows.size() == 6);
  for (int id = 0; id < 2; ++id) {
    CHECK(rows[2 + id].abs_error < rows[id].abs_error);
    CHECK(rows[4 + id].abs_error < rows[2 + id].abs_error);
  }
  for (const auto& r : rows) CHECK(r.imag_residue < 1e-12);
  CHECK(rows[0].ratio == doctest::Approx(mem_ratio(t, m, singleton_pair_bias(64))).epsilon(1e-12));
}

TEST_CASE("lower-bound Monte Carlo") {
  LowerBoundParams p{8, 0.2, 3, 1};
  auto a = lower_bound_mc(p, 200, 5, 1);
  auto b = lower_bound_mc(p, 200, 5, 2);
  CHECK(a.omega_count == 163);
  CHECK(a.point_count == 163 * (3 - p.r()) + 163 + 1);
  CHECK(a.cs_ratio <= 1.0);
  CHECK(a.p_z_positive >= a.cs_ratio - 1e-12);  // second-moment inequality
  CHECK(a.cs_ratio == b.cs_ratio);
  CHECK(a.p_z_positive == b.p_z_positive);
  long pairs = 0;
  for (const auto& bin : a.bins) {
    pairs += bin.pairs;
    CHECK(bin.exact_min <= bin.exact_ratio * (1 + 1e-12));
    CHECK(bin.exact_ratio <= bin.exact_max * (1 + 1e-12));
  }
  CHECK(pairs == 163L * 162 / 2);
}
