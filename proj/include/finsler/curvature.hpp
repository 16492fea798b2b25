#pragma once

// Curvature of a connection (G^h_i, F^h_ki, C^h_ki) in the pullback bundle,
// evaluated on the adapted frame (delta_i, d/dy^i). Storage is (h,k,i,j) for
// K(X_i, X_j) d_k = X^h_kij d_h, with
//   K(X,Y)Z = -nabla_X nabla_Y Z + nabla_Y nabla_X Z + nabla_[X,Y] Z,
// which is the negative of the usual Riemann convention. Lowered as
// R_ijkw = g_mw R^m_kij, the unit sphere has R_1212 = +sin^2(theta).
//
// Ricci tensors trace Z -> K(X,Z)Y: Ric_ij = X^h_jih.

#include <optional>
#include <string>

#include "finsler/connections.hpp"
#include "finsler/geometry.hpp"
#include "finsler/lagrangian.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

struct CurvatureJets {
  JetTensor R;  // horizontal
  JetTensor P;  // mixed
  JetTensor S;  // vertical
};

/// Curvature of the connection with horizontal coefficients `F` (h,k,i) and
/// vertical coefficients `C` (h,k,i); pass nullptr for C = 0.
CurvatureJets connection_curvature(const SiteGeometry& geo, const JetTensor& F,
                                   const JetTensor* C);
CurvatureJets cartan_curvature_jets(const SiteGeometry& geo);
CurvatureJets berwald_curvature_jets(const SiteGeometry& geo);

struct CurvatureSet {
  ConnectionKind kind;
  RealTensor R;
  RealTensor P;
  RealTensor S;
  SupportElement site;
};

CurvatureSet to_values(ConnectionKind kind, const CurvatureJets& c, const SupportElement& site);

struct RicciSet {
  RealTensor ric_h, ric_v;
  double sc_h = 0.0, sc_v = 0.0;
  RealTensor einstein_h, einstein_v;
  std::optional<RealTensor> f_h;
  std::optional<RealTensor> f_v;
  /// Why f_h / f_v is missing, if it is.
  std::string f_h_absent, f_v_absent;
  SupportElement site;
};

/// R^h_ij (h,i,j) of the Barthel connection.
RealTensor barthel_curvature(const FinslerModel& model, const SupportElement& u);
CurvatureSet cartan_curvatures(const FinslerModel& model, const SupportElement& u);
CurvatureSet berwald_curvatures(const FinslerModel& model, const SupportElement& u);

/// Ricci tensors, scalars, Einstein tensors and the F tensors from a
/// curvature set, using the metric at the same site.
RicciSet ricci_scalars(const SiteGeometry& geo, const CurvatureSet& set);
RicciSet ricci_scalars(const FinslerModel& model, const SupportElement& u, const CurvatureSet& set);

/// Trace Ric_ij = X^h_jih of a (h,k,i,j) block.
RealTensor ricci_trace(const RealTensor& x);

/// T_ijkl = C_jkl|_i (vertical Cartan derivative) plus the cyclic sum of
/// y_i C_jkl / L^2 over the four slots.
JetTensor t_tensor_jets(const SiteGeometry& geo);
TensorBlock t_tensor(const FinslerModel& model, const SupportElement& u);

/// R_ijkw = g_mw R^m_kij.
RealTensor lower_curvature(const RealTensor& r, const RealTensor& g);

}  // namespace finsler
