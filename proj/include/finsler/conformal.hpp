#pragma once

// Difference tensors of a conformal change L~ = e^{sigma(x)} L, built from the
// base model and sigma alone, and the checks that compare them against the
// directly lifted model.
//
// Storage follows geometry.hpp / curvature.hpp:
//   B(h), B_j(h,j), U(h,i,j), A(h,i,j), Psi(h,i,j), H_barthel(h,i,j),
//   V, H, V_star, H_star (h,k,i,j).

#include <optional>
#include <string>
#include <vector>

#include "finsler/curvature.hpp"
#include "finsler/geometry.hpp"
#include "finsler/lagrangian.hpp"
#include "finsler/report.hpp"

namespace finsler {

struct SigmaSnapshot {
  double sigma = 0.0;
  std::vector<double> sigma_lower;  // sigma_j
  std::vector<double> sigma_upper;  // sigma^h = g^hj sigma_j
  double sigma_o = 0.0;             // sigma_j y^j
  double sigma_1 = 0.0;             // d_G sigma
};

struct ConformalDeltaJets {
  Jet sigma;
  std::vector<Jet> sigma_lower, sigma_upper;
  Jet sigma_o;
  JetTensor B, B_j, U, A, Psi, H_barthel, V, H, V_star, H_star;
};

struct ConformalDeltas {
  RealTensor B, B_j, U, A, Psi, H_barthel, V, H, V_star, H_star;
  /// The vertical coefficients of the Cartan connection do not change.
  bool cartan_vertical_difference_zero = true;
  SigmaSnapshot sigma;
  SupportElement site;
};

/// All difference tensors at the site of `base`. `cartan` must be the Cartan
/// curvature of the same geometry (computed when null). Requires jet order 6.
ConformalDeltaJets conformal_delta_jets(const SiteGeometry& base, const ConformalFactor& sigma,
                                        const CurvatureJets* cartan = nullptr);
/// Only sigma data, B, B_j, U, A and Psi (needs jet order 4).
ConformalDeltaJets connection_delta_jets(const SiteGeometry& base, const ConformalFactor& sigma);
ConformalDeltas conformal_deltas(const FinslerModel& model, const ConformalFactor& sigma,
                                 const SupportElement& u);

struct Tolerances {
  double connection = 1e-8;
  double curvature = 1e-5;
  double invariant = 1e-8;
  double sigma_invariant = 1e-7;
  double homothety = 1e-12;
  double conformality = 1e-9;
  double structure = 1e-10;
  double berwald_identity = 1e-8;
  double berwald_vertical = 1e-12;
  /// Threshold under which a hypothesis (e.g. Tr H = 0) counts as holding.
  double hypothesis = 1e-8;
  double geodesic = 1e-8;
  double jacobi = 1e-6;
  /// Superposition residual of the Jacobi solution map.
  double linearity = 1e-9;
  double max_condition = 1e10;

  Tolerances scaled(double s) const;
};

/// Direct (lifted model) versus predicted (base model plus deltas) for every
/// transformation law. Also runs the sign-orientation probe and records it in
/// report.details["sign_convention"]; throws ConventionError if the opposite
/// orientation fits.
VerificationReport verify_transformation_laws(const FinslerModel& model,
                                              const ConformalFactor& sigma,
                                              const std::vector<SupportElement>& samples,
                                              const Tolerances& tol = {});

VerificationReport invariant_suite(const FinslerModel& model, const ConformalFactor& sigma,
                                   const std::vector<SupportElement>& samples,
                                   const Tolerances& tol = {});

struct HomothetyPredicate {
  std::string name;
  std::string statement;
  double max_value = 0.0;
  std::size_t witness = 0;
  bool holds = false;
};

struct HomothetyReport {
  std::vector<HomothetyPredicate> predicates;
  bool all_agree = false;
  bool homothetic = false;
  CheckResult to_check() const;
};

HomothetyReport homothety_test(const FinslerModel& model, const ConformalFactor& sigma,
                               const std::vector<SupportElement>& samples,
                               const Tolerances& tol = {});

struct ConformalityResult {
  bool conformal = false;
  double max_residual = 0.0;
  std::optional<SupportElement> witness;
  /// sigma estimate per distinct base point, in sample order.
  std::vector<std::vector<double>> base_points;
  std::vector<double> sigma_estimate;
  double max_fiber_variation = 0.0;
  CheckResult to_check() const;
};

/// Whether `b` is conformal to `a` (d_J L_B / L_B = d_J L_A / L_A); when it is,
/// sigma = log(L_B / L_A) is estimated at each sample's base point and its
/// independence of the fiber direction is checked with `fiber_probes` extra
/// directions per base point.
ConformalityResult conformality_test(const FinslerModel& a, const FinslerModel& b,
                                     const std::vector<SupportElement>& samples,
                                     const Tolerances& tol = {}, int fiber_probes = 3);

}  // namespace finsler
