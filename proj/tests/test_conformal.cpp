#include "doctest.h"

#include <cmath>

#include "finsler/conformal.hpp"
#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/expression.hpp"
#include "finsler/tensors.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

FinslerModel test_randers() {
  return randers_model(2,
                       {parse_expression("1", 2, false), parse_expression("0", 2, false),
                        parse_expression("0", 2, false), parse_expression("1 + 0.1*x1^2", 2, false)},
                       {parse_expression("0.3*sin(x2)", 2, false), parse_expression("0.2*cos(x1)", 2, false)});
}

std::vector<SupportElement> samples(int n, std::size_t count, std::uint64_t seed, double lo = -1,
                                    double hi = 1) {
  SampleSpec s;
  s.count = count;
  s.seed = seed;
  s.box = Box{std::vector<double>(n, lo), std::vector<double>(n, hi)};
  return draw_samples(s);
}

double worst(const VerificationReport& r) {
  double m = 0.0;
  for (const auto& c : r.checks) m = std::max(m, c.max_rel);
  return m;
}

}  // namespace

TEST_CASE("B^h by hand: euclidean plane, linear sigma") {
  const auto m = euclidean_model(2);
  const auto sigma = linear_factor({0, 1});
  const auto d = conformal_deltas(m, sigma, SupportElement({0.3, 0.2}, {1, 0}));
  // B^h = (E delta^hj - y^h y^j) a_j with E = 1/2, y = (1, 0), a = (0, 1).
  CHECK(d.B(0) == doctest::Approx(0.0));
  CHECK(d.B(1) == doctest::Approx(0.5));
}

TEST_CASE("B^h = G^h - G~^h against the Euler-Lagrange oracle") {
  const auto m = test_randers();
  const auto sigma = gaussian_bump_factor(0.5, {0.2, -0.1}, 0.8);
  const auto lifted = conformal_lift(m, sigma);
  const auto E = oracle::energy(m);
  const auto Et = oracle::energy(lifted);
  for (const auto& u : samples(2, 6, 9)) {
    const auto p = oracle::point(u);
    const auto G = oracle::spray(E, p, 2), Gt = oracle::spray(Et, p, 2);
    const auto d = conformal_deltas(m, sigma, u);
    for (int h = 0; h < 2; ++h) CHECK(oracle::rel(d.B(h), G[h] - Gt[h]) < 1e-9);
  }
}

TEST_CASE("lifted metric is e^{2 sigma} g") {
  const auto sigma = linear_factor({0.4, -0.3}, 0.1);
  const auto lifted = conformal_lift(euclidean_model(2), sigma);
  const auto g = metric_tensor(lifted, SupportElement({1, 0}, {0, 1}));
  const double f = std::exp(2 * (0.4 + 0.1));
  CHECK(g.g.components(0, 0) == doctest::Approx(f).epsilon(1e-14));
  CHECK(g.g.components(1, 1) == doctest::Approx(f).epsilon(1e-14));
  CHECK(g.g.components(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("transformation laws: euclidean") {
  const auto u = samples(2, 30, 4);
  const auto hom = verify_transformation_laws(euclidean_model(2), constant_factor(2, 0.7), u);
  CHECK(hom.passed());
  CHECK(worst(hom) <= 1e-12);
  const auto lin = verify_transformation_laws(euclidean_model(2), linear_factor({0.3, -0.5}), u);
  CHECK(lin.passed());
  CHECK(worst(lin) <= 1e-7);
  CHECK(lin.checks.size() >= 20);
  CHECK(lin.details["sign_convention"] == "G~^h_j = G^h_j - B^h_j (L = -B^h_j dx^j (x) d/dy^h)");
}

TEST_CASE("transformation laws: every family and sigma") {
  const std::vector<std::pair<FinslerModel, std::vector<SupportElement>>> models = {
      {euclidean_model(3), samples(3, 15, 1)},
      {sphere_model(), samples(2, 15, 2, 0.4, 2.7)},
      {test_randers(), samples(2, 15, 3)},
  };
  for (const auto& [m, u] : models) {
    const int n = m.dim();
    std::vector<double> a(n, 0.2), c(n, 0.1);
    a[0] = -0.4;
    for (const auto& sigma : {linear_factor(a, 0.3), gaussian_bump_factor(0.6, c, 0.7)}) {
      CAPTURE(m.family());
      CAPTURE(sigma.family());
      const auto r = verify_transformation_laws(m, sigma, u);
      for (const auto& ch : r.checks) {
        CAPTURE(ch.name);
        CHECK(ch.passed);
        CHECK(ch.samples > 0);
      }
    }
  }
}

TEST_CASE("difference tensors are not trivially zero") {
  const auto m = test_randers();
  const auto sigma = gaussian_bump_factor(0.5, {0.2, -0.1}, 0.8);
  const auto d = conformal_deltas(m, sigma, SupportElement({0.1, 0.3}, {0.9, -0.4}));
  CHECK(max_abs(d.B) > 1e-3);
  CHECK(max_abs(d.B_j) > 1e-3);
  CHECK(max_abs(d.U) > 1e-3);
  CHECK(max_abs(d.Psi) > 1e-3);
  CHECK(max_abs(d.H_barthel) > 1e-3);
  CHECK(max_abs(d.V) > 1e-3);
  CHECK(max_abs(d.H) > 1e-3);
  CHECK(max_abs(d.V_star) > 1e-3);
  CHECK(max_abs(d.H_star) > 1e-3);
  CHECK(d.cartan_vertical_difference_zero);
}

TEST_CASE("a wrong prediction is caught") {
  // Feeding the laws a tolerance far below round-off must fail them, so the
  // residuals are measured and not assumed.
  const auto r = verify_transformation_laws(test_randers(), linear_factor({0.3, 0.2}), samples(2, 5, 8),
                                            Tolerances{}.scaled(1e-30));
  CHECK_FALSE(r.passed());
}

TEST_CASE("invariant suite") {
  const auto m = test_randers();
  const auto r = invariant_suite(m, gaussian_bump_factor(0.5, {0.2, -0.1}, 0.8), samples(2, 30, 12));
  for (const auto& c : r.checks) {
    CAPTURE(c.name);
    CHECK(c.passed);
  }
  REQUIRE(r.find("F_v"));
  CHECK(r.find("F_v")->note == "absent: n-2 = 0");
  REQUIRE(r.find("T_tensor"));
  CHECK(r.find("T_tensor")->samples == 30);

  // In three dimensions F^v is present and tested.
  const auto r3 = invariant_suite(euclidean_model(3), linear_factor({0.1, 0.2, -0.3}), samples(3, 5, 1));
  CHECK(r3.find("F_v")->samples == 5);
  CHECK(r3.passed());

  // A homothety satisfies every hypothesis, so the conditional checks run.
  const auto rc = invariant_suite(m, constant_factor(2, 0.4), samples(2, 10, 2));
  for (const auto& c : rc.checks) {
    if (c.details.contains("hypothesis_rate")) {
      CAPTURE(c.name);
      CHECK(c.details["hypothesis_rate"] == 1.0);
      CHECK(c.passed);
    }
  }
}

TEST_CASE("T-tensor is nonzero on a Randers model") {
  const auto t = t_tensor(test_randers(), SupportElement({0.2, 0.1}, {1.0, 0.3}));
  CHECK(max_abs(t.components) > 1e-3);
  CHECK(max_abs(t_tensor(euclidean_model(2), SupportElement({0.2, 0.1}, {1.0, 0.3})).components) == 0.0);
}

TEST_CASE("homothety equivalences") {
  const auto u = samples(2, 20, 6);
  for (const auto& m : {euclidean_model(2), test_randers()}) {
    const auto c = homothety_test(m, constant_factor(2, -0.8), u);
    CHECK(c.all_agree);
    CHECK(c.homothetic);
    for (const auto& p : c.predicates) CHECK(p.max_value <= 1e-12);
    const auto l = homothety_test(m, linear_factor({0.2, 0.5}), u);
    CHECK(l.all_agree);
    CHECK_FALSE(l.homothetic);
    CHECK(l.predicates.size() == 5);
  }
}

TEST_CASE("conformality characterization") {
  const auto u = samples(2, 20, 14);
  const auto m = test_randers();
  const auto sigma = gaussian_bump_factor(0.5, {0.2, -0.1}, 0.8);
  const auto res = conformality_test(m, conformal_lift(m, sigma), u);
  CHECK(res.conformal);
  REQUIRE(res.base_points.size() == res.sigma_estimate.size());
  for (std::size_t i = 0; i < res.base_points.size(); ++i) {
    CHECK(std::abs(res.sigma_estimate[i] - sigma.value(res.base_points[i])) <= 1e-9);
  }
  CHECK(res.max_fiber_variation <= 1e-9);

  const auto flat = randers_model(2, {parse_expression("1", 2), parse_expression("0", 2), parse_expression("0", 2),
                                      parse_expression("1", 2)},
                                  {parse_expression("0.3", 2), parse_expression("0", 2)});
  const auto no = conformality_test(euclidean_model(2), flat, u);
  CHECK_FALSE(no.conformal);
  CHECK(no.witness.has_value());
}
