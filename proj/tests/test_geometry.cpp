#include "doctest.h"

#include <cmath>

#include "finsler/connections.hpp"
#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/expression.hpp"
#include "finsler/tensors.hpp"
#include "oracles.hpp"

using namespace finsler;
using oracle::ld;

namespace {

FinslerModel test_randers() {
  return randers_model(2,
                       {parse_expression("1", 2, false), parse_expression("0", 2, false),
                        parse_expression("0", 2, false), parse_expression("1 + 0.1*x1^2", 2, false)},
                       {parse_expression("0.3*sin(x2)", 2, false), parse_expression("0.2*cos(x1)", 2, false)});
}

// A non-constant-curvature Riemannian metric in 3 dimensions.
FinslerModel test_riemannian3() {
  std::vector<FieldPtr> a = {
      parse_expression("1 + 0.2*x2^2", 3, false), parse_expression("0.1*sin(x3)", 3, false),
      parse_expression("0", 3, false),           parse_expression("0.1*sin(x3)", 3, false),
      parse_expression("exp(0.3*x1)", 3, false), parse_expression("0.05*x1*x2", 3, false),
      parse_expression("0", 3, false),           parse_expression("0.05*x1*x2", 3, false),
      parse_expression("2 + cos(x1)", 3, false)};
  return riemannian_model(3, std::move(a));
}

oracle::MetricFn riemannian3_metric() {
  return [](const std::vector<ld>& x) {
    Eigen::Matrix<ld, Eigen::Dynamic, Eigen::Dynamic> a(3, 3);
    a << 1 + 0.2L * x[1] * x[1], 0.1L * std::sin(x[2]), 0,
         0.1L * std::sin(x[2]), std::exp(0.3L * x[0]), 0.05L * x[0] * x[1],
         0, 0.05L * x[0] * x[1], 2 + std::cos(x[0]);
    return a;
  };
}

SampleSpec spec(int n, std::size_t count, std::uint64_t seed, double lo = -1, double hi = 1) {
  SampleSpec s;
  s.count = count;
  s.seed = seed;
  s.box = Box{std::vector<double>(n, lo), std::vector<double>(n, hi)};
  return s;
}

}  // namespace

TEST_CASE("structure validation") {
  const auto samples = draw_samples(spec(2, 20, 3));
  CHECK(validate_structure(euclidean_model(2), samples).passed());
  CHECK(validate_structure(test_randers(), samples).passed());

  // L^2 = (y1^2 + y2^2)^2 is not 1-homogeneous in L.
  auto bad = custom_model(2, parse_expression("(y1^2 + y2^2)^2", 2));
  CHECK_FALSE(validate_structure(bad, samples).find("homogeneity")->passed);

  // ||b||_a >= 1 is reported as a warning over the check box.
  Box box{{-1, -1}, {1, 1}};
  auto wild = randers_model(2, {parse_expression("1", 2), parse_expression("0", 2), parse_expression("0", 2),
                                parse_expression("1", 2)},
                            {parse_expression("1.5", 2), parse_expression("0", 2)}, &box);
  CHECK_FALSE(wild.warnings().empty());
}

TEST_CASE("euclidean reductions") {
  const auto m = euclidean_model(2);
  const SupportElement u({0.4, -0.3}, {0, 1});
  const auto g = metric_tensor(m, u);
  CHECK(g.g.components(0, 0) == 1.0);
  CHECK(g.g.components(0, 1) == 0.0);
  const auto hbar = angular_metric(m, u);
  CHECK(hbar.components(0, 0) == doctest::Approx(1.0));
  CHECK(hbar.components(1, 1) == doctest::Approx(0.0));
  const auto ff = fundamental_form(m, u);
  CHECK(ff.omega(2, 0) == doctest::Approx(1.0));  // Omega(d/dy^1, d/dx^1)
  CHECK(ff.spray_residual == 0.0);
  CHECK(max_abs(spray(m, u).G) == 0.0);
  const auto cc = cartan_coeffs(m, u);
  CHECK(max_abs(cc.h_coeffs) == 0.0);
  CHECK(max_abs(cc.v_coeffs) == 0.0);
  const auto cs = cartan_curvatures(m, u);
  CHECK(max_abs(cs.R) == 0.0);
  CHECK(max_abs(cs.P) == 0.0);
  CHECK(max_abs(cs.S) == 0.0);
}

TEST_CASE("metric and Cartan tensor against the oracle") {
  const auto m = test_randers();
  const auto E = oracle::energy(m);
  for (const auto& u : draw_samples(spec(2, 8, 11))) {
    const auto p = oracle::point(u);
    const auto g = metric_tensor(m, u);
    const auto C = cartan_tensor(m, u);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(oracle::rel(g.g.components(i, j), oracle::partial(E, p, oracle::unit(4, {2 + i, 2 + j}))) < 1e-9);
        for (int k = 0; k < 2; ++k) {
          const ld c = oracle::partial(E, p, oracle::unit(4, {2 + i, 2 + j, 2 + k})) / 2;
          CHECK(oracle::rel(C.lowered.components(i, j, k), c) < 1e-8);
        }
      }
    }
    // y^i C_ijk = 0 and C is totally symmetric.
    CHECK(C.lowered.asymmetry(0, 2) < 1e-14);
    double yc = 0.0;
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        yc = std::max(yc, std::abs(u.y[0] * C.lowered.components(0, j, k) +
                                   u.y[1] * C.lowered.components(1, j, k)));
      }
    }
    CHECK(yc < 1e-13);
  }
}

TEST_CASE("spray and Barthel connection against the Euler-Lagrange oracle") {
  const auto m = test_randers();
  const auto E = oracle::energy(m);
  for (const auto& u : draw_samples(spec(2, 4, 5))) {
    const auto p = oracle::point(u);
    const auto s = barthel(m, u);
    const auto G = oracle::spray(E, p, 2);
    const auto B = oracle::barthel(E, p, 2);
    for (int h = 0; h < 2; ++h) {
      CHECK(oracle::rel(s.G(h), G[h]) < 1e-9);
      for (int i = 0; i < 2; ++i) CHECK(oracle::rel(s.G_i(h, i), B.Gi[h * 2 + i]) < 1e-8);
    }
    // G^h is 2-homogeneous: G^h_i y^i = 2 G^h.
    for (int h = 0; h < 2; ++h) {
      CHECK(s.G_i(h, 0) * u.y[0] + s.G_i(h, 1) * u.y[1] == doctest::Approx(2 * s.G(h)).epsilon(1e-12));
    }
    const auto R = barthel_curvature(m, u);
    for (int h = 0; h < 2; ++h) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) CHECK(oracle::rel(R(h, i, j), B.R[(h * 2 + i) * 2 + j]) < 1e-6);
      }
    }
  }
}

TEST_CASE("Riemannian reduction in three dimensions") {
  const auto m = test_riemannian3();
  const auto a = riemannian3_metric();
  for (const auto& u : draw_samples(spec(3, 5, 17, -0.8, 0.8))) {
    const std::vector<ld> x(u.x.begin(), u.x.end());
    const auto gam = oracle::christoffel(a, x, 3);
    const auto riem = oracle::riemann(a, x, 3);
    SiteGeometry geo(m, u, kOrderCartanCurvature);
    const auto cc = cartan_coeffs(geo);
    const auto cs = to_values(ConnectionKind::cartan, cartan_curvature_jets(geo), u);
    for (std::size_t k = 0; k < gam.size(); ++k) {
      CHECK(oracle::rel(cc.h_coeffs.data()[k], gam[k]) < 1e-9);
    }
    for (std::size_t k = 0; k < riem.size(); ++k) CHECK(oracle::rel(cs.R.data()[k], riem[k]) < 1e-7);
    CHECK(max_abs(cc.v_coeffs) < 1e-13);
    CHECK(max_abs(cs.S) < 1e-12);
    CHECK(max_abs(cs.P) < 1e-12);
  }
}

TEST_CASE("unit sphere curvature") {
  const auto m = sphere_model();
  for (const auto& u : draw_samples(spec(2, 10, 2, 0.4, 2.7))) {
    SiteGeometry geo(m, u, kOrderBerwaldCurvature);
    const auto cs = to_values(ConnectionKind::cartan, cartan_curvature_jets(geo), u);
    const auto low = lower_curvature(cs.R, values(geo.g()));
    const double s = std::sin(u.x[0]);
    CHECK(low(0, 1, 0, 1) == doctest::Approx(s * s).epsilon(1e-10));
    const auto ric = ricci_scalars(geo, cs);
    CHECK(ric.sc_h == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(ric.f_v_absent == "absent: n-2 = 0");
    CHECK_FALSE(ric.f_v.has_value());
    CHECK(ric.f_h.has_value());
    // Berwald equals Cartan for a Riemannian metric.
    const auto bs = to_values(ConnectionKind::berwald, berwald_curvature_jets(geo), u);
    CHECK(max_abs_diff(bs.R, cs.R) < 1e-12);
  }
}

TEST_CASE("Cartan and Berwald curvature identities on a Randers model") {
  const auto m = test_randers();
  const auto E = oracle::energy(m);
  for (const auto& u : draw_samples(spec(2, 4, 23))) {
    SiteGeometry geo(m, u, kOrderBerwaldCurvature);
    const auto cj = cartan_curvature_jets(geo);
    const auto bj = berwald_curvature_jets(geo);
    const auto rb = geo.barthel_curvature();
    const auto oracle_r = oracle::barthel(E, oracle::point(u), 2);
    for (int h = 0; h < 2; ++h) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          // y^k R^h_kij = R^h_ij for the Cartan connection, checked against the oracle.
          const double yr = cj.R(h, 0, i, j).value() * u.y[0] + cj.R(h, 1, i, j).value() * u.y[1];
          CHECK(oracle::rel(yr, oracle_r.R[(h * 2 + i) * 2 + j]) < 1e-6);
          for (int k = 0; k < 2; ++k) {
            // R*^h_kij = d/dy^k R^h_ij
            CHECK(std::abs(bj.R(h, k, i, j).value() - geo.vdot(rb(h, i, j), k).value()) < 1e-10);
            CHECK(bj.S(h, k, i, j).value() == 0.0);
          }
        }
      }
    }
    // Berwald from Cartan: G^h_ij = Gamma^h_ij + C^h_ij|0.
    const auto c0 = values(cartan_tensor_h_derivative_along_y(geo));
    const auto diff = values(geo.berwald()) - values(geo.cartan_h()) - c0;
    CHECK(max_abs(diff) < 1e-10);
    // The identity is not vacuous here.
    CHECK(max_abs(c0) > 1e-3);
    // Vertical curvature is antisymmetric in its last pair.
    const auto S = values(cj.S);
    for (int h = 0; h < 2; ++h) {
      for (int k = 0; k < 2; ++k) CHECK(std::abs(S(h, k, 0, 1) + S(h, k, 1, 0)) < 1e-12);
    }
  }
}

TEST_CASE("covariant derivatives") {
  const auto m = test_randers();
  const SupportElement u({0.2, -0.5}, {0.8, 1.1});
  // The metric is parallel for the Cartan connection (h and v).
  TensorField metric{{Variance::lower, Variance::lower}, [](const SiteGeometry& g) { return g.g(); }};
  CHECK(max_abs(covariant_derivative(m, metric, Derivative::h_cartan, u).components) < 1e-12);
  CHECK(max_abs(covariant_derivative(m, metric, Derivative::v_cartan, u).components) < 1e-12);
  // But not for the Berwald connection on a non-Berwald space.
  CHECK(max_abs(covariant_derivative(m, metric, Derivative::h_berwald, u).components) > 1e-3);
  // y is horizontally parallel: y^h_|k = 0.
  TensorField ylift{{Variance::upper}, [](const SiteGeometry& g) {
                      JetTensor t(g.dim(), 1, g.y()[0].zero_like());
                      for (int i = 0; i < g.dim(); ++i) t(i) = g.y()[i];
                      return t;
                    }};
  CHECK(max_abs(covariant_derivative(m, ylift, Derivative::h_cartan, u).components) < 1e-12);
}

TEST_CASE("order bookkeeping") {
  const auto m = test_randers();
  const SupportElement u({0.1, 0.2}, {1, 0.5});
  SiteGeometry geo(m, u, kOrderSpray);
  CHECK_NOTHROW(geo.spray());
  CHECK_THROWS_AS(geo.barthel(), JetOrderError);
  CHECK_THROWS_AS(geo.berwald(), JetOrderError);
  SiteGeometry deep(m, u, kOrderCartanConnection);
  CHECK(deep.cartan_h()(0, 0, 0).order() == 0);
}

TEST_CASE("degenerate metric is rejected") {
  auto m = custom_model(2, parse_expression("y1^2", 2));
  CHECK_THROWS_AS(SiteGeometry(m, SupportElement({0, 0}, {1, 1}), 3), DegenerateMetricError);
}
