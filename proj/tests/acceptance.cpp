// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#include "finsler/conformal.hpp"
#include "finsler/connections.hpp"
#include "finsler/curvature.hpp"
#include "finsler/dynamics.hpp"
#include "finsler/expression.hpp"
#include "finsler/scenario.hpp"
#include "finsler/tensors.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::vector<SupportElement> samples(int n, std::size_t count, std::uint64_t seed, double lo, double hi) {
  SampleSpec s;
  s.count = count;
  s.seed = seed;
  s.box = Box{std::vector<double>(n, lo), std::vector<double>(n, hi)};
  return draw_samples(s);
}

struct Family {
  std::string name;
  FinslerModel model;
  std::vector<SupportElement> samples;
};

FinslerModel randers2() {
  return randers_model(2,
                       {parse_expression("1", 2, false), parse_expression("0", 2, false),
                        parse_expression("0", 2, false), parse_expression("1 + 0.1*x1^2", 2, false)},
                       {parse_expression("0.3*sin(x2)", 2, false), parse_expression("0.2*cos(x1)", 2, false)});
}

FinslerModel riemannian3() {
  std::vector<FieldPtr> a = {
      parse_expression("1 + 0.2*x2^2", 3, false), parse_expression("0.1*sin(x3)", 3, false),
      parse_expression("0", 3, false),           parse_expression("0.1*sin(x3)", 3, false),
      parse_expression("exp(0.3*x1)", 3, false), parse_expression("0.05*x1*x2", 3, false),
      parse_expression("0", 3, false),           parse_expression("0.05*x1*x2", 3, false),
      parse_expression("2 + cos(x1)", 3, false)};
  return riemannian_model(3, std::move(a));
}

FinslerModel custom2() {
  return custom_model(2, parse_expression("(sqrt(y1^2 + (1 + 0.2*x1^2)*y2^2) + 0.25*y1 - 0.1*sin(x2)*y2)^2", 2));
}

std::vector<Family> all_families(std::size_t count, std::uint64_t seed) {
  return {
      {"euclidean", euclidean_model(3), samples(3, count, seed, -1, 1)},
      {"sphere", sphere_model(), samples(2, count, seed, 0.4, 2.7)},
      {"riemannian", riemannian3(), samples(3, count, seed, -0.8, 0.8)},
      {"randers", randers2(), samples(2, count, seed, -1, 1)},
      {"custom", custom2(), samples(2, count, seed, -1, 1)},
  };
}

ConformalFactor linear_for(int n) {
  std::vector<double> a(n, 0.2);
  a[0] = -0.4;
  return linear_factor(a, 0.3);
}

ConformalFactor bump_for(int n) { return gaussian_bump_factor(0.6, std::vector<double>(n, 0.1), 0.7); }

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------
void riemannian_reduction() {
  const auto t0 = Clock::now();
  const auto m = sphere_model();
  double gam = 0.0, r1212 = 0.0, sc = 0.0;
  for (const auto& u : samples(2, 50, 101, 0.3, M_PI - 0.3)) {
    SiteGeometry geo(m, u, kOrderCartanCurvature);
    const auto G = values(geo.cartan_h());
    const double th = u.x[0];
    for (int h = 0; h < 2; ++h) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          double ref = 0.0;
          if (h == 0 && i == 1 && j == 1) ref = -std::sin(th) * std::cos(th);
          if (h == 1 && i + j == 1) ref = std::cos(th) / std::sin(th);
          gam = std::max(gam, rel(G(h, i, j), ref));
        }
      }
    }
    const auto cs = to_values(ConnectionKind::cartan, cartan_curvature_jets(geo), u);
    const auto low = lower_curvature(cs.R, values(geo.g()));
    r1212 = std::max(r1212, rel(low(0, 1, 0, 1), std::sin(th) * std::sin(th)));
    sc = std::max(sc, rel(ricci_scalars(geo, cs).sc_h, 2.0));
  }
  const double t = seconds_since(t0);
  report(1, "riemannian_reduction",
         gam <= 1e-7 && r1212 <= 1e-5 && sc <= 1e-5 && t < 5.0,
         fmt("50 samples; Gamma vs Levi-Civita rel %.2e (<=1e-7), R_1212 rel %.2e (<=1e-5), "
             "Sc^h rel %.2e (<=1e-5), %.2fs (<5s)", gam, r1212, sc, t));
}

// 2 -------------------------------------------------------------------------
void transformation_laws() {
  const auto t0 = Clock::now();
  const Tolerances tol;
  double conn = 0.0, curv = 0.0;
  std::size_t laws = 0, runs = 0;
  bool ok = true;
  std::string bad;
  const std::vector<Family> fams = {
      {"euclidean", euclidean_model(3), samples(3, 100, 42, -1, 1)},
      {"sphere", sphere_model(), samples(2, 100, 42, 0.4, 2.7)},
      {"randers", randers2(), samples(2, 100, 42, -1, 1)},
  };
  for (const auto& f : fams) {
    const int n = f.model.dim();
    for (const auto& sigma : {linear_for(n), bump_for(n)}) {
      const auto r = verify_transformation_laws(f.model, sigma, f.samples, tol);
      ++runs;
      laws = r.checks.size();
      for (const auto& c : r.checks) {
        if (!c.passed) {
          ok = false;
          bad += " " + f.name + "/" + sigma.family() + "/" + c.name;
        }
        if (c.tolerance == tol.connection) conn = std::max(conn, c.max_rel);
        if (c.tolerance == tol.curvature) curv = std::max(curv, c.max_rel);
      }
    }
  }
  const double t = seconds_since(t0);
  ok = ok && conn <= 1e-8 && curv <= 1e-5 && t < 60.0;
  report(2, "transformation_laws", ok,
         fmt("%zu runs x %zu laws x 100 samples; connection-level %.2e (<=1e-8), curvature-level %.2e "
             "(<=1e-5), %.2fs (<60s)%s",
             runs, laws, conn, curv, t, bad.empty() ? "" : ("; failed:" + bad).c_str()));
}

// 3 -------------------------------------------------------------------------
void invariants() {
  const Tolerances tol;
  double inv = 0.0, sig = 0.0;
  bool ok = true;
  std::string bad;
  std::size_t cond_tested = 0, cond_held = 0;
  for (const auto& f : all_families(40, 7)) {
    const int n = f.model.dim();
    for (const auto& sigma : {linear_for(n), bump_for(n), constant_factor(n, 0.4)}) {
      const auto r = invariant_suite(f.model, sigma, f.samples, tol);
      for (const auto& c : r.checks) {
        if (!c.passed) {
          ok = false;
          bad += " " + f.name + "/" + sigma.family() + "/" + c.name;
        }
        if (c.details.contains("hypothesis_tested")) {
          cond_tested += c.details["hypothesis_tested"].get<std::size_t>();
          cond_held += c.details["hypothesis_holds"].get<std::size_t>();
        } else if (c.tolerance == tol.invariant) {
          inv = std::max(inv, c.max_rel);
        } else if (c.tolerance == tol.sigma_invariant) {
          sig = std::max(sig, c.max_rel);
        }
      }
    }
  }
  ok = ok && inv <= 1e-8 && sig <= 1e-7;
  report(3, "invariants", ok,
         fmt("5 families x 3 sigmas x 40 samples; invariant %.2e (<=1e-8), sigma-invariant %.2e (<=1e-7), "
             "conditional hypotheses held at %zu of %zu evaluations%s",
             inv, sig, cond_held, cond_tested, bad.empty() ? "" : ("; failed:" + bad).c_str()));
}

// 4 -------------------------------------------------------------------------
void homothety() {
  bool ok = true;
  double worst_const = 0.0, least_linear = 1e300;
  for (const auto& f : all_families(30, 3)) {
    const int n = f.model.dim();
    const auto c = homothety_test(f.model, constant_factor(n, -0.6), f.samples);
    ok = ok && c.all_agree && c.homothetic;
    for (const auto& p : c.predicates) {
      worst_const = std::max(worst_const, p.max_value);
      ok = ok && p.holds;
    }
    const auto l = homothety_test(f.model, linear_for(n), f.samples);
    ok = ok && l.all_agree && !l.homothetic;
    for (const auto& p : l.predicates) {
      least_linear = std::min(least_linear, p.max_value);
      ok = ok && !p.holds;
    }
  }
  ok = ok && worst_const <= 1e-12;
  report(4, "homothety", ok,
         fmt("5 families; constant sigma: all five hold, max %.2e (<=1e-12); linear sigma: all five fail, "
             "smallest violation %.2e", worst_const, least_linear));
}

// 5 -------------------------------------------------------------------------
void berwald_identities() {
  double s_star = 0.0, ident = 0.0, c0 = 0.0;
  for (const auto& f : all_families(40, 5)) {
    for (const auto& u : f.samples) {
      SiteGeometry geo(f.model, u, kOrderBerwaldCurvature);
      s_star = std::max(s_star, max_abs(values(berwald_curvature_jets(geo).S)));
      const auto d = values(cartan_tensor_h_derivative_along_y(geo));
      const auto diff = values(geo.berwald()) - values(geo.cartan_h()) - d;
      ident = std::max(ident, max_abs(diff));
      c0 = std::max(c0, max_abs(d));
    }
  }
  report(5, "berwald_identities", s_star <= 1e-12 && ident <= 1e-8,
         fmt("5 families x 40 samples; |S*| %.2e (<=1e-12); |G^h_ij - Gamma^h_ij - C^h_ij|0| %.2e (<=1e-8); "
             "max |C^h_ij|0| %.2e", s_star, ident, c0));
}

// 6 -------------------------------------------------------------------------
void conformality() {
  double recovery = 0.0;
  bool ok = true;
  for (const auto& f : all_families(30, 9)) {
    const int n = f.model.dim();
    for (const auto& sigma : {linear_for(n), bump_for(n)}) {
      const auto res = conformality_test(f.model, conformal_lift(f.model, sigma), f.samples);
      ok = ok && res.conformal;
      for (std::size_t i = 0; i < res.base_points.size(); ++i) {
        recovery = std::max(recovery, std::abs(res.sigma_estimate[i] - sigma.value(res.base_points[i])));
      }
    }
  }
  const auto flat = randers_model(2, {parse_expression("1", 2), parse_expression("0", 2), parse_expression("0", 2),
                                      parse_expression("1", 2)},
                                  {parse_expression("0.3", 2), parse_expression("-0.1", 2)});
  const auto no = conformality_test(euclidean_model(2), flat, samples(2, 30, 9, -1, 1));
  const bool rejected = !no.conformal && no.witness.has_value();
  report(6, "conformality", ok && recovery <= 1e-9 && rejected,
         fmt("round trip on 5 families x 2 sigmas: sigma recovered to %.2e (<=1e-9); "
             "euclidean vs Randers(b const) rejected: %s, witness residual %.2e",
             recovery, rejected ? "yes" : "no", no.max_residual));
}

// 7 -------------------------------------------------------------------------
double great_circle_error(double step) {
  GeodesicOptions o;
  o.t1 = 1.0;
  o.step = step;
  const auto g = geodesic_integrate(sphere_model(), {M_PI / 2, 0}, {0.6, 0.8}, o);
  // Embedded solution through (1, 0, 0) with velocity 0.6 d_theta + 0.8 d_phi.
  const double v[3] = {0.0, 0.8, -0.6};
  double p[3];
  for (int i = 0; i < 3; ++i) p[i] = (i == 0 ? std::cos(1.0) : 0.0) + v[i] * std::sin(1.0);
  return std::hypot(g.states.back().x[0] - std::acos(p[2]), g.states.back().x[1] - std::atan2(p[1], p[0]));
}

void dynamics() {
  GeodesicOptions o;
  o.step = 1e-2;
  const auto line = geodesic_integrate(euclidean_model(2), {0, 0}, {1, 0}, o);
  const double straight = std::hypot(line.states.back().x[0] - 1.0, line.states.back().x[1]);

  GeodesicOptions p;
  p.t1 = 2 * M_PI;
  p.step = 1e-3;
  const auto eq = geodesic_integrate(sphere_model(), {M_PI / 2, 0}, {0, 1}, p);
  const double period = std::hypot(eq.states.back().x[0] - M_PI / 2, eq.states.back().x[1] - 2 * M_PI);

  GeodesicOptions q;
  q.t1 = 3.0;
  q.step = 1e-3;
  const auto arc = geodesic_integrate(sphere_model(), {M_PI / 2, 0}, {0, 1}, q);
  const auto j = jacobi_integrate(sphere_model(), arc, {0, 0}, {1, 0});
  double jac = 0.0;
  for (const auto& s : j.states) jac = std::max(jac, std::abs(std::hypot(s.xi[0], s.xi[1]) - std::sin(s.t)));

  const double e1 = great_circle_error(1e-2), e2 = great_circle_error(5e-3), e3 = great_circle_error(2.5e-3);
  const double r1 = e1 / e2, r2 = e2 / e3;
  const bool ok = straight <= 1e-10 && period <= 1e-4 && jac <= 1e-4 && std::abs(r1 - 16) <= 4 &&
                  std::abs(r2 - 16) <= 4;
  report(7, "dynamics", ok,
         fmt("straight line %.2e (<=1e-10); great circle after 2pi %.2e (<=1e-4, step 1e-3); "
             "| |xi| - sin t | %.2e (<=1e-4); step-halving ratios %.2f, %.2f (16 +- 4)",
             straight, period, jac, r1, r2));
}

// 8 -------------------------------------------------------------------------
void oracle_agreement() {
  double worst = 0.0;
  std::size_t coeffs = 0;
  for (const auto& f : all_families(5, 13)) {
    const auto E = oracle::energy(f.model);
    for (const auto& u : f.samples) {
      const Jet j = f.model.energy_jet(u, 6);
      const auto p = oracle::point(u);
      for (std::size_t k = 0; k < j.layout().size(); ++k) {
        const auto ref = oracle::partial(E, p, j.layout().monomial(k).orders);
        worst = std::max(worst, oracle::rel(j.coefficients()[k], ref));
        ++coeffs;
      }
    }
  }
  report(8, "oracle_agreement", worst <= 1e-5,
         fmt("%zu coefficients of E up to order 6 on 5 families x 5 samples; max rel %.2e (<=1e-5)", coeffs,
             worst));
}

// 9 -------------------------------------------------------------------------
void determinism() {
  const auto sc = load_scenario(std::string(FINSLER_SCENARIO_DIR) + "/randers_bump_full.json");
  RunOptions opt;
  opt.seed = 42;
  const auto a = run_scenario(sc, opt).to_json();
  const auto b = run_scenario(sc, opt).to_json();
  bool same = a["checks"].size() == b["checks"].size();
  for (std::size_t i = 0; same && i < a["checks"].size(); ++i) {
    const double xa = a["checks"][i]["max_abs"], xb = b["checks"][i]["max_abs"];
    const double ya = a["checks"][i]["max_rel"], yb = b["checks"][i]["max_rel"];
    same = std::memcmp(&xa, &xb, sizeof xa) == 0 && std::memcmp(&ya, &yb, sizeof ya) == 0;
  }
  same = same && a.dump() == b.dump();
  report(9, "determinism", same && a["passed"] == true,
         fmt("randers_bump_full.json, seed 42, two runs: %zu checks, residuals %s, report passed: %s",
             a["checks"].size(), same ? "bit-identical" : "DIFFER", a["passed"] == true ? "yes" : "no"));
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void()>> criteria[] = {
      {"riemannian_reduction", riemannian_reduction}, {"transformation_laws", transformation_laws},
      {"invariants", invariants},                     {"homothety", homothety},
      {"berwald_identities", berwald_identities},     {"conformality", conformality},
      {"dynamics", dynamics},                         {"oracle_agreement", oracle_agreement},
      {"determinism", determinism},
  };
  int id = 0;
  for (const auto& [name, run] : criteria) {
    ++id;
    try {
      run();
    } catch (const std::exception& e) {
      report(id, name, false, std::string("error: ") + e.what());
    }
  }
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
