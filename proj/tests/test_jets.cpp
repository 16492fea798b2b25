#include "doctest.h"

#include <cmath>

#include "finsler/errors.hpp"
#include "finsler/expression.hpp"
#include "finsler/jet.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

MultiIndex mi(std::vector<int> o) { return MultiIndex(std::move(o)); }

// Every coefficient of jet_eval(f) against the finite-difference oracle.
double max_oracle_gap(const ScalarField& f, const SupportElement& u, int order) {
  const Jet j = jet_eval(f, u, order);
  const auto fn = oracle::field(f);
  const auto p = oracle::point(u);
  double worst = 0.0;
  for (std::size_t k = 0; k < j.layout().size(); ++k) {
    const MultiIndex& m = j.layout().monomial(k);
    worst = std::max(worst, oracle::rel(j.coefficients()[k], oracle::partial(fn, p, m.orders, 0.05L)));
  }
  return worst;
}

}  // namespace

TEST_CASE("constant field has only a value") {
  auto f = make_field(2, [](const auto& x, const auto&) { return zero_like(x[0]) + 7.0; });
  const Jet j = jet_eval(*f, SupportElement({0.3, -1}, {1, 2}), 2);
  CHECK(j.value() == 7.0);
  for (std::size_t k = 1; k < j.layout().size(); ++k) CHECK(j.coefficients()[k] == 0.0);
}

TEST_CASE("bilinear monomial") {
  auto f = make_field(2, [](const auto&, const auto& y) { return y[0] * y[1]; });
  const Jet j = jet_eval(*f, SupportElement({0, 0}, {1, 2}), 2);
  CHECK(j.value() == 2.0);
  CHECK(j.partial(mi({0, 0, 1, 1})) == 1.0);
  CHECK(j.partial(mi({0, 0, 2, 0})) == 0.0);
  CHECK(j.partial(mi({0, 0, 1, 0})) == 2.0);
}

TEST_CASE("exp(x1) (y1)^2 against the finite-difference oracle") {
  auto f = make_field(2, [](const auto& x, const auto& y) {
    using std::exp;
    return exp(x[0]) * y[0] * y[0];
  });
  const SupportElement u({0.3, 0}, {1.5, 0.2});
  const Jet j = jet_eval(*f, u, 6);
  CHECK(j.partial(mi({1, 0, 2, 0})) == doctest::Approx(2 * std::exp(0.3)).epsilon(1e-14));
  CHECK(max_oracle_gap(*f, u, 6) < 1e-5);
}

TEST_CASE("jets are exact on polynomials of degree <= order") {
  auto f = make_field(2, [](const auto& x, const auto& y) {
    return x[0] * x[0] * x[1] * y[0] * y[1] * y[1] - 3.0 * x[1] * y[0];
  });
  const Jet j = jet_eval(*f, SupportElement({0.5, -0.7}, {1.1, 0.4}), 6);
  // d^6 / dx1^2 dx2 dy1 dy2^2 = 2 * 2 = 4
  CHECK(j.partial(mi({2, 1, 1, 2})) == 4.0);
  CHECK(j.partial(mi({0, 1, 1, 0})) == doctest::Approx(0.5 * 0.5 * 0.4 * 0.4 - 3.0));
}

TEST_CASE("graded layout: degree-1 monomials follow the constant") {
  const JetLayout& l = JetLayout::get(4, 3);
  CHECK(l.monomial(0).total() == 0);
  for (int v = 0; v < 4; ++v) {
    std::vector<int> o(4, 0);
    o[v] = 1;
    CHECK(l.monomial(1 + v).orders == o);
  }
  CHECK(l.prefix(1) == 5);
  CHECK(JetLayout::get(4, 2).size() == l.prefix(2));
}

TEST_CASE("arithmetic matches the oracle") {
  const SupportElement u({0.2, 0.4}, {0.9, -0.6});
  auto f = make_field(2, [](const auto& x, const auto& y) {
    using std::cos;
    using std::log;
    using std::sin;
    using std::sqrt;
    using std::tanh;
    const auto r = y[0] * y[0] + 2.0 * y[1] * y[1] + 0.1 * x[0] * y[0] * y[1];
    return sqrt(r) * sin(x[1]) / (1.0 + x[0] * x[0]) + log(1.5 + cos(x[0] * y[1])) + tanh(x[1] - y[0]);
  });
  CHECK(max_oracle_gap(*f, u, 6) < 1e-5);
}

TEST_CASE("reciprocal and mismatches") {
  const auto c = coordinate_jets(SupportElement({0, 1}, {1, 0}), 3);
  const Jet r = c.x[1].reciprocal();
  CHECK(r.value() == 1.0);
  CHECK(r.partial(mi({0, 1, 0, 0})) == -1.0);
  CHECK(r.partial(mi({0, 3, 0, 0})) == doctest::Approx(-6.0));
  CHECK_THROWS_AS(c.x[0].reciprocal(), JetDomainError);

  const auto other = coordinate_jets(SupportElement({0, 2}, {1, 0}), 3);
  CHECK_THROWS_AS(c.x[0] + other.x[0], JetMismatchError);

  // Mixed orders truncate to the smaller one.
  const Jet low = c.x[0].truncated(1);
  CHECK((low * c.x[1]).order() == 1);
  CHECK_THROWS_AS((low * c.x[1]).partial(mi({1, 1, 0, 0})), JetOrderError);
}

TEST_CASE("non-finite coefficients name the multi-index") {
  auto f = make_field(1, [](const auto& x, const auto&) {
    using std::sqrt;
    return sqrt(x[0]);
  });
  CHECK_THROWS_AS(jet_eval(*f, SupportElement({0.0}, {1.0}), 2), JetDomainError);
  auto g = make_field(1, [](const auto& x, const auto& y) { return x[0] / (y[0] - y[0]); });
  CHECK_THROWS_AS(jet_eval(*g, SupportElement({1.0}, {1.0}), 1), JetDomainError);
}

TEST_CASE("real powers and integer powers") {
  const SupportElement u({0.7}, {1.3});
  auto f = make_field(1, [](const auto& x, const auto& y) {
    using std::pow;
    return pow(y[0], 2.5) * pow(x[0], 3) + pow(y[0] + x[0], -2);
  });
  CHECK(max_oracle_gap(*f, u, 6) < 1e-5);
}

TEST_CASE("expression parser") {
  const SupportElement u({0.3, -0.2}, {1.1, 0.5});
  auto f = parse_expression("sqrt(y1^2 + (1 + 0.1*x1^2)*y2^2) + 0.3*sin(x2)*y1 - 2.5e-1*exp(-x1)", 2);
  auto g = make_field(2, [](const auto& x, const auto& y) {
    using std::exp;
    using std::sin;
    using std::sqrt;
    return sqrt(y[0] * y[0] + (1.0 + 0.1 * x[0] * x[0]) * y[1] * y[1]) + 0.3 * sin(x[1]) * y[0] -
           0.25 * exp(-x[0]);
  });
  const Jet a = jet_eval(*f, u, 4), b = jet_eval(*g, u, 4);
  for (std::size_t k = 0; k < a.layout().size(); ++k) {
    CHECK(a.coefficients()[k] == doctest::Approx(b.coefficients()[k]).epsilon(1e-13));
  }
  CHECK((*parse_expression("(-2)^3 + pi - e", 1))(std::vector<double>{0.0}, std::vector<double>{1.0}) ==
        doctest::Approx(-8 + M_PI - M_E));
  CHECK_THROWS_AS(parse_expression("x3", 2), ConfigError);
  CHECK_THROWS_AS(parse_expression("x1 + y1", 2, false), ConfigError);
  CHECK_THROWS_AS(parse_expression("sin(x1", 2), ConfigError);
  CHECK_THROWS_AS(parse_expression("foo(x1)", 2), ConfigError);
}
