#include "finsler/connections.hpp"

#include "finsler/tensors.hpp"

namespace finsler {

SprayData spray_data(const SiteGeometry& geo) {
  SprayData out;
  out.site = geo.site();
  out.G = values(geo.spray());
  if (geo.order() >= kOrderCartanConnection) out.G_i = values(geo.barthel());
  if (geo.order() >= kOrderCartanCurvature) out.G_ij = values(geo.berwald());
  return out;
}

SprayData spray(const FinslerModel& model, const SupportElement& u) {
  return spray_data(SiteGeometry(model, u, kOrderSpray));
}

SprayData barthel(const FinslerModel& model, const SupportElement& u) {
  return spray_data(SiteGeometry(model, u, kOrderCartanCurvature));
}

ConnectionCoeffs cartan_coeffs(const SiteGeometry& geo) {
  return {ConnectionKind::cartan, values(geo.cartan_h()), values(geo.cartan()),
          values(geo.barthel()), geo.site()};
}

ConnectionCoeffs berwald_coeffs(const SiteGeometry& geo) {
  const int n = geo.dim();
  return {ConnectionKind::berwald, values(geo.berwald()), RealTensor(n, 3, 0.0),
          values(geo.barthel()), geo.site()};
}

ConnectionCoeffs cartan_coeffs(const FinslerModel& model, const SupportElement& u) {
  return cartan_coeffs(SiteGeometry(model, u, kOrderCartanConnection));
}

ConnectionCoeffs berwald_coeffs(const FinslerModel& model, const SupportElement& u) {
  return berwald_coeffs(SiteGeometry(model, u, kOrderCartanCurvature));
}

TensorBlock covariant_derivative(const FinslerModel& model, const TensorField& field,
                                 Derivative kind, const SupportElement& u, int order) {
  SiteGeometry geo(model, u, order);
  JetTensor comps = field.components(geo);
  JetTensor d = geo.covariant(comps, field.variance, kind);
  std::vector<Variance> variance = field.variance;
  variance.push_back(Variance::lower);
  const char* name = kind == Derivative::h_cartan   ? "h-cartan derivative"
                     : kind == Derivative::v_cartan ? "v-cartan derivative"
                                                    : "h-berwald derivative";
  return make_block(name, std::move(variance), values(d), u);
}

JetTensor cartan_tensor_h_derivative_along_y(const SiteGeometry& geo) {
  const int n = geo.dim();
  static const Variance mixed[] = {Variance::upper, Variance::lower, Variance::lower};
  JetTensor d = geo.covariant(geo.cartan(), mixed, Derivative::h_cartan);
  JetTensor out(n, 3, d(0, 0, 0).zero_like());
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Jet s = d(0, 0, 0).zero_like();
        for (int k = 0; k < n; ++k) s += d(h, i, j, k) * geo.y()[k];
        out(h, i, j) = std::move(s);
      }
    }
  }
  return out;
}

}  // namespace finsler
