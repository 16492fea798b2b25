#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/report.hpp"
#include "finsler/support.hpp"

namespace finsler {

using FieldPtr = std::shared_ptr<const ScalarField>;

/// A Finsler structure given by its squared Lagrangian L^2(x, y).
class FinslerModel {
 public:
  FinslerModel(std::string family, int dim, FieldPtr squared_length);

  int dim() const { return dim_; }
  const std::string& family() const { return family_; }
  const ScalarField& squared_length() const { return *l2_; }
  const FieldPtr& squared_length_ptr() const { return l2_; }

  /// Jet of E = L^2 / 2 at u.
  Jet energy_jet(const SupportElement& u, int order) const;
  double energy(const SupportElement& u) const;
  long double energy(std::span<const long double> x, std::span<const long double> y) const;

  /// Non-fatal construction diagnostics (e.g. Randers admissibility).
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  std::string family_;
  int dim_;
  FieldPtr l2_;
  std::vector<std::string> warnings_;
};

/// L^2 = sum (y^i)^2.
FinslerModel euclidean_model(int n);
/// L^2 = a_ij(x) y^i y^j; `a` holds n*n fields of x, row-major.
FinslerModel riemannian_model(int n, std::vector<FieldPtr> a);
/// Unit 2-sphere in the chart (theta, phi): a = diag(1, sin^2 theta).
FinslerModel sphere_model();
/// L = sqrt(a_ij y^i y^j) + b_i y^i. When `check_box` is given, ||b||_a < 1
/// is checked on a grid over it and violations are recorded as warnings.
FinslerModel randers_model(int n, std::vector<FieldPtr> a, std::vector<FieldPtr> b,
                           const Box* check_box = nullptr);
/// User-supplied L^2.
FinslerModel custom_model(int n, FieldPtr squared_length);

/// Scalar field sigma(x) on the base manifold.
class ConformalFactor {
 public:
  ConformalFactor(std::string family, int dim, FieldPtr sigma, bool constant);

  const std::string& family() const { return family_; }
  int dim() const { return dim_; }
  bool is_constant() const { return constant_; }
  const ScalarField& field() const { return *sigma_; }
  const FieldPtr& field_ptr() const { return sigma_; }

  double value(std::span<const double> x) const;
  /// Jet of sigma over all 2n variables; every y-derivative is zero.
  Jet jet(const SupportElement& u, int order) const;

 private:
  std::string family_;
  int dim_;
  FieldPtr sigma_;
  bool constant_;
};

ConformalFactor constant_factor(int n, double c);
/// sigma = a . x + c0
ConformalFactor linear_factor(std::vector<double> a, double c0 = 0.0);
/// sigma = amplitude * exp(-|x - center|^2 / (2 width^2))
ConformalFactor gaussian_bump_factor(double amplitude, std::vector<double> center, double width);
/// `sigma` must not depend on y; expression-based factors enforce this at parse time.
ConformalFactor custom_factor(int n, FieldPtr sigma);

/// The model with L~^2 = e^{2 sigma(x)} L^2.
FinslerModel conformal_lift(const FinslerModel& model, const ConformalFactor& sigma);

/// Homogeneity (y^i dL/dy^i = L), positive definiteness of g and L > 0 at
/// every sample. Evaluation failures are recorded per sample.
VerificationReport validate_structure(const FinslerModel& model,
                                      const std::vector<SupportElement>& samples,
                                      double homogeneity_tol = 1e-10);

}  // namespace finsler
