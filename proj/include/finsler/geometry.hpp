#pragma once

// Jet-valued geometric quantities at one support element.
//
// Index storage (first index slowest):
//   g(i,j) = g_ij, g_inv(i,j) = g^ij
//   cartan_lower(i,j,k) = C_ijk, cartan(h,i,j) = C^h_ij
//   christoffel(h,i,j) = gamma^h_ij
//   spray(h) = G^h, barthel(h,i) = G^h_i, berwald(h,i,j) = G^h_ij
//   cartan_h(h,i,j) = Gamma^h_ij
//
// Each quantity loses jet order as it is derived: with energy order K,
// g has order K-2, C and G^h order K-3, G^h_i and Gamma order K-4, G^h_ij
// order K-5. Quantities the order cannot support are absent and their
// accessors throw JetOrderError.

#include <optional>
#include <span>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/lagrangian.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

/// Jet order used when none is given: FINSLER_MAX_JET_ORDER, default 6.
int default_jet_order();

/// Orders required by the staged quantities.
inline constexpr int kOrderSpray = 3;
inline constexpr int kOrderCartanConnection = 4;
inline constexpr int kOrderCartanCurvature = 5;
inline constexpr int kOrderBerwaldCurvature = 6;

enum class Derivative { h_cartan, v_cartan, h_berwald };

class SiteGeometry {
 public:
  SiteGeometry(const FinslerModel& model, const SupportElement& u, int order = default_jet_order());
  /// From a jet of the energy E; the jet's center is the support element.
  explicit SiteGeometry(const Jet& energy);

  int dim() const { return n_; }
  int order() const { return energy_.order(); }
  const SupportElement& site() const { return *energy_.center(); }

  const Jet& energy() const { return energy_; }
  const std::vector<Jet>& x() const { return x_; }
  const std::vector<Jet>& y() const { return y_; }
  /// y_i = g_ij y^j, computed as dE/dy^i.
  const std::vector<Jet>& y_lower() const { return y_lower_; }
  const JetTensor& g() const { return g_; }
  const JetTensor& g_inv() const { return g_inv_; }
  /// Condition number of g at the site.
  double condition_number() const { return cond_; }
  double min_eigenvalue() const { return min_eig_; }

  const JetTensor& cartan_lower() const { return need(cartan_lower_, 3, "Cartan tensor"); }
  const JetTensor& cartan() const { return need(cartan_, 3, "Cartan tensor"); }
  const JetTensor& christoffel() const { return need(christoffel_, 3, "spray"); }
  const JetTensor& spray() const { return need(spray_, 3, "spray"); }
  const JetTensor& barthel() const { return need(barthel_, 4, "Barthel connection"); }
  const JetTensor& cartan_h() const { return need(cartan_h_, 4, "Cartan connection"); }
  const JetTensor& berwald() const { return need(berwald_, 5, "Berwald connection"); }

  /// d f / dx^k
  Jet partial(const Jet& f, int k) const { return f.derivative(k); }
  /// d f / dy^k
  Jet vdot(const Jet& f, int k) const { return f.derivative(n_ + k); }
  /// delta_k f = d f/dx^k - G^m_k d f/dy^m
  Jet delta(const Jet& f, int k) const;

  /// Covariant derivative of a tensor whose slots have the given variance;
  /// the new lower slot is appended last.
  JetTensor covariant(const JetTensor& t, std::span<const Variance> variance,
                      Derivative kind) const;

  /// R^h_ij = delta_j G^h_i - delta_i G^h_j, stored (h,i,j).
  JetTensor barthel_curvature() const;

 private:
  void build();
  const JetTensor& need(const std::optional<JetTensor>& t, int order, const char* what) const;

  int n_ = 0;
  Jet energy_;
  std::vector<Jet> x_, y_, y_lower_;
  JetTensor g_, g_inv_;
  double cond_ = 0.0;
  double min_eig_ = 0.0;
  std::optional<JetTensor> cartan_lower_, cartan_, christoffel_, spray_, barthel_, cartan_h_,
      berwald_;
};

/// Inverse of a symmetric positive-definite matrix of jets. Throws
/// DegenerateMetricError if the order-0 part is not positive definite.
JetTensor inverse_metric(const JetTensor& g, double* condition = nullptr,
                         double* min_eigenvalue = nullptr);

/// Jet tensor of the given rank filled with zeros like `proto`.
JetTensor zero_tensor(int n, int rank, const Jet& proto);

}  // namespace finsler
