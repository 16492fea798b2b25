#include "finsler/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "finsler/errors.hpp"
#include "finsler/expression.hpp"
#include "finsler/geometry.hpp"

namespace finsler {

using nlohmann::json;

const char* check_kind_name(CheckKind k) {
  switch (k) {
    case CheckKind::validate: return "validate";
    case CheckKind::transform_laws: return "transform-laws";
    case CheckKind::invariants: return "invariants";
    case CheckKind::homothety: return "homothety";
    case CheckKind::conformality: return "conformality";
    case CheckKind::geodesic: return "geodesic";
    case CheckKind::jacobi: return "jacobi";
    case CheckKind::correspondence: return "correspondence";
  }
  return "?";
}

namespace {

// A JSON value together with its path in the document, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError((path_.empty() ? std::string("<root>") : path_) + ": " + what);
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Node operator[](const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) fail("missing required field '" + key + "'");
    return Node(j_.at(key), path_.empty() ? key : path_ + "." + key);
  }
  Node operator[](std::size_t i) const {
    return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j_.items()) {
      if (!ok.count(k)) fail("unknown field '" + k + "'");
    }
  }

  std::size_t array_size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0)) fail("expected a positive number");
    return v;
  }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) const {
    if (!j_.is_number_integer()) fail("expected an integer");
    const auto v = j_.get<std::int64_t>();
    if (v < lo || v > hi) fail("expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::vector<double> vector(std::size_t n) const {
    if (array_size() != n) fail("expected an array of " + std::to_string(n) + " numbers");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (*this)[i].number();
    return v;
  }

  /// A number or an expression string.
  FieldPtr field(int dim, bool allow_fiber) const {
    if (j_.is_number()) {
      const double c = number();
      return make_field(dim, [c](const auto& x, const auto&) { return zero_like(x[0]) + c; });
    }
    if (!j_.is_string()) fail("expected a number or an expression string");
    try {
      return parse_expression(j_.get<std::string>(), dim, allow_fiber);
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }

 private:
  const json& j_;
  std::string path_;
};

int dimension(const Node& m) {
  return static_cast<int>(m["dim"].integer(1, 8));
}

std::vector<FieldPtr> matrix_fields(const Node& a, int n) {
  if (a.array_size() != static_cast<std::size_t>(n)) a.fail("expected " + std::to_string(n) + " rows");
  std::vector<FieldPtr> out;
  for (int i = 0; i < n; ++i) {
    const Node row = a[static_cast<std::size_t>(i)];
    if (row.array_size() != static_cast<std::size_t>(n)) {
      row.fail("expected " + std::to_string(n) + " entries");
    }
    for (int j = 0; j < n; ++j) out.push_back(row[static_cast<std::size_t>(j)].field(n, false));
  }
  return out;
}

FinslerModel parse_model(const Node& m, const Box* box) {
  const std::string family = m["family"].string();
  if (family == "euclidean") {
    m.expect_object({"family", "dim"});
    return euclidean_model(dimension(m));
  }
  if (family == "sphere") {
    m.expect_object({"family", "dim"});
    if (m.has("dim") && m["dim"].integer(1, 8) != 2) m["dim"].fail("the sphere model has dim 2");
    return sphere_model();
  }
  if (family == "riemannian") {
    m.expect_object({"family", "dim", "a"});
    const int n = dimension(m);
    return riemannian_model(n, matrix_fields(m["a"], n));
  }
  if (family == "randers") {
    m.expect_object({"family", "dim", "a", "b"});
    const int n = dimension(m);
    const Node b = m["b"];
    if (b.array_size() != static_cast<std::size_t>(n)) b.fail("expected " + std::to_string(n) + " entries");
    std::vector<FieldPtr> bf;
    for (int i = 0; i < n; ++i) bf.push_back(b[static_cast<std::size_t>(i)].field(n, false));
    return randers_model(n, matrix_fields(m["a"], n), std::move(bf), box);
  }
  if (family == "custom") {
    m.expect_object({"family", "dim", "L2"});
    const int n = dimension(m);
    return custom_model(n, m["L2"].field(n, true));
  }
  m["family"].fail("unknown model family '" + family +
                   "' (expected euclidean, sphere, riemannian, randers or custom)");
}

ConformalFactor parse_sigma(const Node& s, int n) {
  const std::string family = s["family"].string();
  if (family == "constant") {
    s.expect_object({"family", "value"});
    return constant_factor(n, s["value"].number());
  }
  if (family == "linear") {
    s.expect_object({"family", "a", "c0"});
    return linear_factor(s["a"].vector(n), s.has("c0") ? s["c0"].number() : 0.0);
  }
  if (family == "gaussian_bump") {
    s.expect_object({"family", "amplitude", "center", "width"});
    return gaussian_bump_factor(s["amplitude"].number(), s["center"].vector(n), s["width"].positive());
  }
  if (family == "custom") {
    s.expect_object({"family", "expr"});
    return custom_factor(n, s["expr"].field(n, false));
  }
  s["family"].fail("unknown sigma family '" + family +
                   "' (expected constant, linear, gaussian_bump or custom)");
}

Box parse_box(const Node& b, int n) {
  b.expect_object({"lo", "hi"});
  Box box{b["lo"].vector(n), b["hi"].vector(n)};
  for (int i = 0; i < n; ++i) {
    if (!(box.lo[i] < box.hi[i])) b["hi"].fail("every hi entry must exceed the matching lo entry");
  }
  return box;
}

SampleSpec parse_samples(const Node& s, int n) {
  s.expect_object({"count", "seed", "box", "fiber_radius"});
  SampleSpec spec;
  spec.count = static_cast<std::size_t>(s["count"].integer(1, 1000000));
  if (s.has("seed")) spec.seed = static_cast<std::uint64_t>(s["seed"].integer(0, INT64_MAX));
  spec.box = parse_box(s["box"], n);
  if (s.has("fiber_radius")) {
    const auto r = s["fiber_radius"].vector(2);
    if (!(r[0] > 0 && r[0] <= r[1])) s["fiber_radius"].fail("expected 0 < min <= max");
    spec.rmin = r[0];
    spec.rmax = r[1];
  }
  return spec;
}

CheckKind parse_check(const Node& c) {
  const std::string s = c.string();
  for (CheckKind k : {CheckKind::validate, CheckKind::transform_laws, CheckKind::invariants,
                      CheckKind::homothety, CheckKind::conformality, CheckKind::geodesic,
                      CheckKind::jacobi, CheckKind::correspondence}) {
    if (s == check_kind_name(k)) return k;
  }
  c.fail("unknown check '" + s + "'");
}

Tolerances parse_tolerances(const Node& t) {
  Tolerances tol;
  const std::pair<const char*, double*> fields[] = {
      {"connection", &tol.connection},
      {"curvature", &tol.curvature},
      {"invariant", &tol.invariant},
      {"sigma_invariant", &tol.sigma_invariant},
      {"homothety", &tol.homothety},
      {"conformality", &tol.conformality},
      {"structure", &tol.structure},
      {"berwald_identity", &tol.berwald_identity},
      {"berwald_vertical", &tol.berwald_vertical},
      {"hypothesis", &tol.hypothesis},
      {"geodesic", &tol.geodesic},
      {"jacobi", &tol.jacobi},
      {"linearity", &tol.linearity},
      {"max_condition", &tol.max_condition},
  };
  if (!t.raw().is_object()) t.fail("expected an object");
  for (const auto& [k, v] : t.raw().items()) {
    bool found = false;
    for (const auto& [name, ptr] : fields) {
      if (k == name) {
        *ptr = t[k].positive();
        found = true;
      }
    }
    if (!found) t.fail("unknown tolerance '" + k + "'");
  }
  return tol;
}

CurveSpec parse_curve(const Node& c, int n) {
  c.expect_object({"x0", "y0", "t0", "t1", "step", "chart", "xi0", "dxi0"});
  CurveSpec spec;
  spec.x0 = c["x0"].vector(n);
  spec.y0 = c["y0"].vector(n);
  if (c.has("t0")) spec.t0 = c["t0"].number();
  spec.t1 = c["t1"].number();
  if (!(spec.t1 > spec.t0)) c["t1"].fail("expected t1 > t0");
  if (c.has("step")) spec.step = c["step"].positive();
  if (c.has("chart")) spec.chart = parse_box(c["chart"], n);
  if (c.has("xi0")) spec.xi0 = c["xi0"].vector(n);
  if (c.has("dxi0")) spec.dxi0 = c["dxi0"].vector(n);
  return spec;
}

}  // namespace

Scenario parse_scenario(const json& config) {
  const Node root(config, "");
  root.expect_object({"$schema", "name", "model", "sigma", "samples", "checks", "tolerances",
                      "geodesic", "conformality"});
  const Node mnode = root["model"];
  if (!mnode.raw().is_object()) mnode.fail("expected an object");

  const int pre_dim = mnode["family"].string() == "sphere" ? 2 : dimension(mnode);
  SampleSpec samples = parse_samples(root["samples"], pre_dim);
  FinslerModel model = parse_model(mnode, &samples.box);
  const int n = model.dim();
  ConformalFactor sigma = parse_sigma(root["sigma"], n);

  std::vector<CheckKind> checks;
  const Node cnode = root["checks"];
  for (std::size_t i = 0; i < cnode.array_size(); ++i) checks.push_back(parse_check(cnode[i]));
  if (checks.empty()) cnode.fail("at least one check is required");

  Scenario sc{root.has("name") ? root["name"].string() : std::string("scenario"),
              std::move(model),
              std::move(sigma),
              std::move(samples),
              std::move(checks),
              root.has("tolerances") ? parse_tolerances(root["tolerances"]) : Tolerances{},
              std::nullopt,
              std::nullopt};
  if (root.has("geodesic")) sc.curve = parse_curve(root["geodesic"], n);
  if (root.has("conformality")) {
    const Node c = root["conformality"];
    c.expect_object({"target", "expect_conformal"});
    sc.conformality_target = parse_model(c["target"], &sc.samples.box);
    if (c.has("expect_conformal")) sc.conformality_expected = c["expect_conformal"].boolean();
    if (sc.conformality_target->dim() != n) c["target"]["dim"].fail("must match model.dim");
  }

  for (std::size_t i = 0; i < sc.checks.size(); ++i) {
    const CheckKind k = sc.checks[i];
    const bool needs_curve =
        k == CheckKind::geodesic || k == CheckKind::jacobi || k == CheckKind::correspondence;
    if (needs_curve && !sc.curve) {
      cnode[i].fail(std::string("check '") + check_kind_name(k) + "' requires a 'geodesic' block");
    }
    const bool needs_jacobi = k == CheckKind::jacobi || k == CheckKind::correspondence;
    if (needs_jacobi && (sc.curve->xi0.empty() || sc.curve->dxi0.empty())) {
      root["geodesic"].fail(std::string("check '") + check_kind_name(k) + "' requires xi0 and dxi0");
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scenario(j);
}

// ---------------------------------------------------------------------------

namespace {

GeodesicTrajectory integrate_curve(const Scenario& sc) {
  GeodesicOptions o;
  o.t0 = sc.curve->t0;
  o.t1 = sc.curve->t1;
  o.step = sc.curve->step;
  o.chart = sc.curve->chart ? &*sc.curve->chart : nullptr;
  return geodesic_integrate(sc.model, sc.curve->x0, sc.curve->y0, o);
}

CheckResult geodesic_check(const Scenario& sc, const GeodesicTrajectory& g, const Tolerances& tol) {
  CheckResult c;
  c.name = "geodesic_length_conservation";
  c.anchor = "L(x(t), x'(t)) constant along x'' + 2 G(x, x') = 0";
  c.samples = g.states.size();
  const auto& s0 = g.states.front();
  const double l0 = std::sqrt(2.0 * sc.model.energy(SupportElement(s0.x, s0.y)));
  c.max_abs = g.length_drift;
  c.max_rel = g.length_drift / std::max(1.0, l0);
  c.tolerance = tol.geodesic;
  c.passed = c.max_rel <= tol.geodesic;
  c.details["step"] = g.step;
  c.details["final"] = {{"t", g.states.back().t}, {"x", g.states.back().x}, {"y", g.states.back().y}};
  if (!g.complete()) c.note = "truncated: " + g.stop_reason;
  return c;
}

CheckResult jacobi_check(const Scenario& sc, const GeodesicTrajectory& g, const Tolerances& tol) {
  const auto& cv = *sc.curve;
  const int n = sc.model.dim();
  std::vector<double> zero(n, 0.0), e(n, 0.0);
  e[0] = 1.0;
  const auto a = jacobi_integrate(sc.model, g, cv.xi0, cv.dxi0, tol.geodesic);
  const auto b = jacobi_integrate(sc.model, g, e, zero, tol.geodesic);
  std::vector<double> xs(n), ds(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = cv.xi0[i] + e[i];
    ds[i] = cv.dxi0[i];
  }
  const auto s = jacobi_integrate(sc.model, g, xs, ds, tol.geodesic);

  Residual r;
  const std::size_t m = std::min({a.states.size(), b.states.size(), s.states.size()});
  for (std::size_t k = 0; k < m; ++k) {
    double d = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
      d = std::max(d, std::abs(s.states[k].xi[i] - a.states[k].xi[i] - b.states[k].xi[i]));
      d = std::max(d, std::abs(s.states[k].dxi[i] - a.states[k].dxi[i] - b.states[k].dxi[i]));
      scale = std::max({scale, std::abs(s.states[k].xi[i]), std::abs(s.states[k].dxi[i])});
    }
    r.add(d, scale, k);
  }
  CheckResult c;
  c.name = "jacobi_linearity";
  c.anchor = "D^2 xi / dt^2 + R(theta, xi) theta = 0 is linear in (xi0, D xi0)";
  c.take(r, tol.linearity);
  c.details["final"] = {{"t", a.states.back().t}, {"xi", a.states.back().xi}, {"dxi", a.states.back().dxi}};
  if (!a.complete()) c.note = a.stop_reason;
  return c;
}

CheckResult conformality_check(const Scenario& sc, const std::vector<SupportElement>& samples,
                               const Tolerances& tol) {
  if (sc.conformality_target) {
    const auto res = conformality_test(sc.model, *sc.conformality_target, samples, tol);
    CheckResult c = res.to_check();
    c.tolerance = tol.conformality;
    c.passed = res.conformal == sc.conformality_expected;
    c.note = std::string(res.conformal ? "conformal" : "not conformal") + ", expected " +
             (sc.conformality_expected ? "conformal" : "not conformal");
    c.details["conformal"] = res.conformal;
    c.details["sigma_estimate"] = res.sigma_estimate;
    return c;
  }
  // Round trip: the lift must be recognised and sigma recovered at base points.
  const FinslerModel lifted = conformal_lift(sc.model, sc.sigma);
  const auto res = conformality_test(sc.model, lifted, samples, tol);
  CheckResult c = res.to_check();
  c.name = "conformality_round_trip";
  c.anchor = "L~ = e^sigma L  =>  conformal, sigma = log(L~ / L)";
  c.tolerance = tol.conformality;
  double err = 0.0;
  for (std::size_t i = 0; i < res.base_points.size(); ++i) {
    err = std::max(err, std::abs(res.sigma_estimate[i] - sc.sigma.value(res.base_points[i])));
  }
  c.details["sigma_recovery_error"] = err;
  c.max_abs = std::max(c.max_abs, err);
  c.max_rel = c.max_abs;
  c.passed = res.conformal && err <= tol.conformality;
  if (!res.conformal) c.note = "lift not recognised as conformal";
  return c;
}

void add_checks(VerificationReport& out, const VerificationReport& part) {
  for (const auto& c : part.checks) out.checks.push_back(c);
  for (const auto& [k, v] : part.details.items()) out.details[k] = v;
}

}  // namespace

VerificationReport run_scenario(const Scenario& sc, const RunOptions& opt) {
  SampleSpec spec = sc.samples;
  if (opt.seed) spec.seed = *opt.seed;
  const Tolerances tol = sc.tolerances.scaled(opt.tol_scale);
  const std::vector<SupportElement> samples = draw_samples(spec);

  VerificationReport report;
  report.title = sc.name;
  report.details["model"] = {{"family", sc.model.family()}, {"dim", sc.model.dim()}};
  report.details["sigma"] = {{"family", sc.sigma.family()}, {"constant", sc.sigma.is_constant()}};
  report.details["samples"] = {{"count", spec.count}, {"seed", spec.seed}};
  report.details["tol_scale"] = opt.tol_scale;
  if (!sc.model.warnings().empty()) report.details["model_warnings"] = sc.model.warnings();

  std::optional<GeodesicTrajectory> curve;
  auto geodesic = [&]() -> const GeodesicTrajectory& {
    if (!curve) curve = integrate_curve(sc);
    return *curve;
  };

  const auto& list = opt.only ? *opt.only : sc.checks;
  for (CheckKind k : list) {
    switch (k) {
      case CheckKind::validate:
        add_checks(report, validate_structure(sc.model, samples, tol.structure));
        break;
      case CheckKind::transform_laws:
        add_checks(report, verify_transformation_laws(sc.model, sc.sigma, samples, tol));
        break;
      case CheckKind::invariants:
        add_checks(report, invariant_suite(sc.model, sc.sigma, samples, tol));
        break;
      case CheckKind::homothety: {
        CheckResult c = homothety_test(sc.model, sc.sigma, samples, tol).to_check();
        c.samples = samples.size();
        c.tolerance = tol.homothety;
        report.checks.push_back(std::move(c));
        break;
      }
      case CheckKind::conformality:
        report.checks.push_back(conformality_check(sc, samples, tol));
        break;
      case CheckKind::geodesic:
        report.checks.push_back(geodesic_check(sc, geodesic(), tol));
        break;
      case CheckKind::jacobi:
        report.checks.push_back(jacobi_check(sc, geodesic(), tol));
        break;
      case CheckKind::correspondence: {
        const auto& g = geodesic();
        CheckResult gc = geodesic_correspondence(sc.model, sc.sigma, g, tol.geodesic).to_check();
        gc.samples = g.states.size();
        report.checks.push_back(std::move(gc));
        CheckResult jc =
            jacobi_correspondence(sc.model, sc.sigma, g, sc.curve->xi0, sc.curve->dxi0, tol).to_check();
        jc.samples = g.states.size();
        report.checks.push_back(std::move(jc));
        break;
      }
    }
  }
  report.details["environment"] = report_environment(report);
  return report;
}

json report_environment(const VerificationReport& report) {
  json env;
  env["engine_version"] = kEngineVersion;
  env["jet_order"] = default_jet_order();
  env["jet_convention"] = "raw partial derivatives (coefficients are not divided by factorials)";
  env["curvature_convention"] =
      "K(X,Y)Z = -D_X D_Y Z + D_Y D_X Z + D_[X,Y] Z, stored K^h_kij; Ric_ij = K^h_jih";
  env["sign_probe"] = report.details.contains("sign_convention")
                          ? report.details["sign_convention"]
                          : json("not run (transform-laws disabled)");
  return env;
}

}  // namespace finsler
