#pragma once

#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/lagrangian.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

TensorBlock make_block(std::string name, std::vector<Variance> variance, RealTensor components,
                       const SupportElement& site);

struct MetricData {
  TensorBlock g;      // g_ij
  TensorBlock g_inv;  // g^ij
  double condition = 0.0;
};

struct CartanData {
  TensorBlock mixed;    // C^h_ij
  TensorBlock lowered;  // C_ijk
  TensorBlock cform;    // C_i = C^h_ih
};

/// Components of Omega = d d_J E on the frame (d/dx^1..d/dx^n, d/dy^1..d/dy^n),
/// as a 2n x 2n antisymmetric matrix, with the residual of i_G Omega = -dE.
struct FundamentalForm {
  RealTensor omega;  // dim 2n, rank 2
  double spray_residual = 0.0;
};

MetricData metric_tensor(const FinslerModel& model, const SupportElement& u);
CartanData cartan_tensor(const FinslerModel& model, const SupportElement& u);
TensorBlock angular_metric(const FinslerModel& model, const SupportElement& u);
FundamentalForm fundamental_form(const FinslerModel& model, const SupportElement& u);

// The same quantities from an already-built site geometry.
MetricData metric_tensor(const SiteGeometry& geo);
CartanData cartan_tensor(const SiteGeometry& geo);
/// hbar_ij = g_ij - y_i y_j / L^2
RealTensor angular_metric(const SiteGeometry& geo);
FundamentalForm fundamental_form(const SiteGeometry& geo);
/// d_J L / L, i.e. (dL/dy^i) / L = y_i / L^2.
std::vector<double> normalized_vertical_differential(const SiteGeometry& geo);

}  // namespace finsler
