#pragma once

#include <functional>
#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/lagrangian.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

/// Spray, Barthel and Berwald coefficients. G_i and G_ij are empty when only
/// the spray was requested.
struct SprayData {
  RealTensor G;     // G^h
  RealTensor G_i;   // G^h_i, stored (h,i)
  RealTensor G_ij;  // G^h_ij, stored (h,i,j)
  SupportElement site;
};

enum class ConnectionKind { cartan, berwald };

struct ConnectionCoeffs {
  ConnectionKind kind;
  RealTensor h_coeffs;  // Gamma^h_ij or G^h_ij, stored (h,i,j)
  RealTensor v_coeffs;  // C^h_ij, or zero for Berwald
  RealTensor barthel;   // G^h_i
  SupportElement site;
};

SprayData spray(const FinslerModel& model, const SupportElement& u);
SprayData barthel(const FinslerModel& model, const SupportElement& u);
ConnectionCoeffs cartan_coeffs(const FinslerModel& model, const SupportElement& u);
ConnectionCoeffs berwald_coeffs(const FinslerModel& model, const SupportElement& u);

SprayData spray_data(const SiteGeometry& geo);
ConnectionCoeffs cartan_coeffs(const SiteGeometry& geo);
ConnectionCoeffs berwald_coeffs(const SiteGeometry& geo);

/// A tensor field given by its jet components at a site.
struct TensorField {
  std::vector<Variance> variance;
  std::function<JetTensor(const SiteGeometry&)> components;
};

/// Covariant derivative of `field` at u; the new lower slot is last. The jet
/// order is chosen from `order` (default: engine maximum).
TensorBlock covariant_derivative(const FinslerModel& model, const TensorField& field,
                                 Derivative kind, const SupportElement& u,
                                 int order = default_jet_order());

/// C^h_ij|0 = C^h_ij|k y^k (horizontal Cartan derivative along y), jets.
JetTensor cartan_tensor_h_derivative_along_y(const SiteGeometry& geo);

}  // namespace finsler
