#include "finsler/lagrangian.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "finsler/errors.hpp"

namespace finsler {

FinslerModel::FinslerModel(std::string family, int dim, FieldPtr squared_length)
    : family_(std::move(family)), dim_(dim), l2_(std::move(squared_length)) {
  if (dim < 1) throw ConfigError("model dimension must be >= 1");
  if (!l2_ || l2_->dim() != dim) throw ConfigError("model field dimension mismatch");
}

Jet FinslerModel::energy_jet(const SupportElement& u, int order) const {
  return 0.5 * jet_eval(*l2_, u, order);
}

double FinslerModel::energy(const SupportElement& u) const {
  return 0.5 * (*l2_)(std::span<const double>(u.x), std::span<const double>(u.y));
}

long double FinslerModel::energy(std::span<const long double> x,
                                 std::span<const long double> y) const {
  return 0.5L * (*l2_)(x, y);
}

namespace {

void check_entries(int n, const std::vector<FieldPtr>& f, std::size_t count, const char* what) {
  if (f.size() != count) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(count) + " entries, got " +
                      std::to_string(f.size()));
  }
  for (const auto& e : f) {
    if (!e || e->dim() != n) throw ConfigError(std::string(what) + ": entry dimension mismatch");
  }
}

// Shared quadratic form a_ij(x) y^i y^j for any scalar type.
template <class S>
auto quadratic(const std::vector<FieldPtr>& a, int n, S x, S y) {
  auto q = zero_like(y[0]);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) q += (*a[i * n + j])(x, y) * y[i] * y[j];
  }
  return q;
}

}  // namespace

FinslerModel euclidean_model(int n) {
  auto f = make_field(n, [n](auto x, auto y) {
    auto s = zero_like(x[0]);
    for (int i = 0; i < n; ++i) s += y[i] * y[i];
    return s;
  });
  return FinslerModel("euclidean", n, f);
}

FinslerModel riemannian_model(int n, std::vector<FieldPtr> a) {
  check_entries(n, a, static_cast<std::size_t>(n * n), "riemannian metric");
  auto f = make_field(n, [a, n](auto x, auto y) { return quadratic(a, n, x, y); });
  return FinslerModel("riemannian", n, f);
}

FinslerModel sphere_model() {
  auto one = make_field(2, [](auto x, auto) { return zero_like(x[0]) + 1.0; });
  auto zero = make_field(2, [](auto x, auto) { return zero_like(x[0]); });
  auto s2 = make_field(2, [](auto x, auto) {
    using std::sin;
    auto s = sin(x[0]);
    return s * s;
  });
  FinslerModel m = riemannian_model(2, {one, zero, zero, s2});
  return FinslerModel("sphere", 2, m.squared_length_ptr());
}

FinslerModel randers_model(int n, std::vector<FieldPtr> a, std::vector<FieldPtr> b,
                           const Box* check_box) {
  check_entries(n, a, static_cast<std::size_t>(n * n), "randers metric a");
  check_entries(n, b, static_cast<std::size_t>(n), "randers form b");
  auto f = make_field(n, [a, b, n](auto x, auto y) {
    using std::sqrt;
    auto beta = zero_like(x[0]);
    for (int i = 0; i < n; ++i) beta += (*b[i])(x, y) * y[i];
    auto l = sqrt(quadratic(a, n, x, y)) + beta;
    return l * l;
  });
  FinslerModel model("randers", n, f);

  if (check_box && check_box->dim() == n) {
    constexpr int per_axis = 5;
    int total = 1;
    for (int i = 0; i < n; ++i) total *= per_axis;
    double worst = 0.0;
    std::vector<double> worst_x;
    std::vector<double> x(n), dummy(n, 0.0);
    for (int k = 0; k < total; ++k) {
      int r = k;
      for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(r % per_axis) / (per_axis - 1);
        r /= per_axis;
        x[i] = check_box->lo[i] + t * (check_box->hi[i] - check_box->lo[i]);
      }
      Eigen::MatrixXd am(n, n);
      Eigen::VectorXd bv(n);
      for (int i = 0; i < n; ++i) {
        bv(i) = (*b[i])(std::span<const double>(x), std::span<const double>(dummy));
        for (int j = 0; j < n; ++j) {
          am(i, j) = (*a[i * n + j])(std::span<const double>(x), std::span<const double>(dummy));
        }
      }
      const double norm2 = bv.dot(am.ldlt().solve(bv));
      if (norm2 > worst) {
        worst = norm2;
        worst_x = x;
      }
    }
    if (!(std::sqrt(worst) < 1.0)) {
      std::ostringstream os;
      os << "randers form not admissible: ||b||_a = " << std::sqrt(worst) << " >= 1 at x = (";
      for (int i = 0; i < n; ++i) os << (i ? ", " : "") << worst_x[i];
      os << ")";
      model.add_warning(os.str());
    }
  }
  return model;
}

FinslerModel custom_model(int n, FieldPtr squared_length) {
  return FinslerModel("custom", n, std::move(squared_length));
}

// ---------------------------------------------------------------------------

ConformalFactor::ConformalFactor(std::string family, int dim, FieldPtr sigma, bool constant)
    : family_(std::move(family)), dim_(dim), sigma_(std::move(sigma)), constant_(constant) {
  if (!sigma_ || sigma_->dim() != dim) throw ConfigError("conformal factor dimension mismatch");
}

double ConformalFactor::value(std::span<const double> x) const {
  std::vector<double> y(dim_, 0.0);
  return (*sigma_)(x, std::span<const double>(y));
}

Jet ConformalFactor::jet(const SupportElement& u, int order) const {
  return jet_eval(*sigma_, u, order);
}

ConformalFactor constant_factor(int n, double c) {
  return ConformalFactor("constant", n,
                         make_field(n, [c](auto x, auto) { return zero_like(x[0]) + c; }), true);
}

ConformalFactor linear_factor(std::vector<double> a, double c0) {
  const int n = static_cast<int>(a.size());
  bool zero = true;
  for (double v : a) zero = zero && v == 0.0;
  auto f = make_field(n, [a, c0, n](auto x, auto) {
    auto s = zero_like(x[0]) + c0;
    for (int i = 0; i < n; ++i) s += a[i] * x[i];
    return s;
  });
  return ConformalFactor("linear", n, f, zero);
}

ConformalFactor gaussian_bump_factor(double amplitude, std::vector<double> center, double width) {
  const int n = static_cast<int>(center.size());
  if (!(width > 0.0)) throw ConfigError("gaussian bump width must be positive");
  auto f = make_field(n, [amplitude, center, width, n](auto x, auto) {
    using std::exp;
    auto r2 = zero_like(x[0]);
    for (int i = 0; i < n; ++i) {
      auto d = x[i] - center[i];
      r2 += d * d;
    }
    return amplitude * exp(r2 * (-0.5 / (width * width)));
  });
  return ConformalFactor("gaussian_bump", n, f, amplitude == 0.0);
}

ConformalFactor custom_factor(int n, FieldPtr sigma) {
  return ConformalFactor("custom", n, std::move(sigma), false);
}

FinslerModel conformal_lift(const FinslerModel& model, const ConformalFactor& sigma) {
  if (model.dim() != sigma.dim()) throw ConfigError("conformal factor and model dimensions differ");
  auto l2 = model.squared_length_ptr();
  auto s = sigma.field_ptr();
  auto f = make_field(model.dim(), [l2, s](auto x, auto y) {
    using std::exp;
    return exp(2.0 * (*s)(x, y)) * (*l2)(x, y);
  });
  FinslerModel lifted(model.family() + "+conformal(" + sigma.family() + ")", model.dim(), f);
  for (const auto& w : model.warnings()) lifted.add_warning(w);
  return lifted;
}

// ---------------------------------------------------------------------------

VerificationReport validate_structure(const FinslerModel& model,
                                      const std::vector<SupportElement>& samples,
                                      double homogeneity_tol) {
  const int n = model.dim();
  Residual euler;
  double min_eig = INFINITY;
  double min_l = INFINITY;
  std::size_t failures = 0;
  nlohmann::json failed = nlohmann::json::array();

  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& u = samples[s];
    try {
      Jet l2 = jet_eval(model.squared_length(), u, 2);
      const double l2v = l2.value();
      min_l = std::min(min_l, l2v > 0 ? std::sqrt(l2v) : l2v);
      if (l2v > 0) {
        const double l = std::sqrt(l2v);
        double euler_sum = 0.0;
        for (int i = 0; i < n; ++i) euler_sum += u.y[i] * l2.derivative(n + i).value() / (2 * l);
        euler.add(std::abs(euler_sum - l), l, s);
      }
      Eigen::MatrixXd g(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) g(i, j) = 0.5 * l2.derivative(n + i).derivative(n + j).value();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues()(0));
    } catch (const Error& e) {
      ++failures;
      failed.push_back({{"sample", s}, {"error", e.what()}});
    }
  }

  VerificationReport report;
  report.title = "structure validation: " + model.family();

  CheckResult h;
  h.name = "homogeneity";
  h.anchor = "y^i dL/dy^i = L";
  h.take(euler, homogeneity_tol);
  h.passed = h.passed && failures == 0 && euler.samples > 0;
  report.checks.push_back(h);

  CheckResult pd;
  pd.name = "positive_definite";
  pd.anchor = "g_ij = (1/2) d^2 L^2 / dy^i dy^j positive definite";
  pd.samples = samples.size() - failures;
  // Residual is the amount by which the smallest eigenvalue falls below zero.
  pd.max_abs = std::max(0.0, -min_eig);
  pd.max_rel = pd.max_abs;
  pd.passed = failures == 0 && min_eig > 0.0;
  pd.details["min_eigenvalue"] = min_eig;
  report.checks.push_back(pd);

  CheckResult pos;
  pos.name = "positive_length";
  pos.anchor = "L > 0 off the zero section";
  pos.samples = samples.size() - failures;
  pos.max_abs = std::max(0.0, -min_l);
  pos.max_rel = pos.max_abs;
  pos.passed = failures == 0 && min_l > 0.0;
  pos.details["min_L"] = min_l;
  report.checks.push_back(pos);

  if (failures) {
    report.details["evaluation_failures"] = failed;
  }
  for (const auto& w : model.warnings()) report.details["warnings"].push_back(w);
  return report;
}

}  // namespace finsler
