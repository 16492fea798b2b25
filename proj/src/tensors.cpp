#include "finsler/tensors.hpp"

#include <cmath>

namespace finsler {

TensorBlock make_block(std::string name, std::vector<Variance> variance, RealTensor components,
                       const SupportElement& site) {
  return TensorBlock{std::move(name), std::move(variance), std::move(components), site};
}

MetricData metric_tensor(const SiteGeometry& geo) {
  using V = Variance;
  return {make_block("g", {V::lower, V::lower}, values(geo.g()), geo.site()),
          make_block("g_inv", {V::upper, V::upper}, values(geo.g_inv()), geo.site()),
          geo.condition_number()};
}

MetricData metric_tensor(const FinslerModel& model, const SupportElement& u) {
  return metric_tensor(SiteGeometry(model, u, 2));
}

CartanData cartan_tensor(const SiteGeometry& geo) {
  using V = Variance;
  const int n = geo.dim();
  RealTensor mixed = values(geo.cartan());
  RealTensor cform(n, 1, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < n; ++h) cform(i) += mixed(h, i, h);
  }
  return {make_block("C", {V::upper, V::lower, V::lower}, std::move(mixed), geo.site()),
          make_block("C_lower", {V::lower, V::lower, V::lower}, values(geo.cartan_lower()),
                     geo.site()),
          make_block("C_form", {V::lower}, std::move(cform), geo.site())};
}

CartanData cartan_tensor(const FinslerModel& model, const SupportElement& u) {
  return cartan_tensor(SiteGeometry(model, u, 3));
}

RealTensor angular_metric(const SiteGeometry& geo) {
  const int n = geo.dim();
  const double l2 = 2.0 * geo.energy().value();
  RealTensor h = values(geo.g());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      h(i, j) -= geo.y_lower()[i].value() * geo.y_lower()[j].value() / l2;
    }
  }
  return h;
}

TensorBlock angular_metric(const FinslerModel& model, const SupportElement& u) {
  SiteGeometry geo(model, u, 2);
  return make_block("hbar", {Variance::lower, Variance::lower}, angular_metric(geo), u);
}

FundamentalForm fundamental_form(const SiteGeometry& geo) {
  const int n = geo.dim();
  FundamentalForm out;
  out.omega = RealTensor(2 * n, 2, 0.0);
  RealTensor& w = out.omega;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // d_J E = y_i dx^i, so Omega = d(y_i) ^ dx^i.
      w(j, i) = geo.partial(geo.y_lower()[i], j).value() - geo.partial(geo.y_lower()[j], i).value();
      w(n + j, i) = geo.g()(i, j).value();
      w(i, n + j) = -geo.g()(i, j).value();
    }
  }

  // G = y^i d/dx^i - 2 G^h d/dy^h
  std::vector<double> gv(2 * n);
  const RealTensor spray = values(geo.spray());
  for (int i = 0; i < n; ++i) {
    gv[i] = geo.site().y[i];
    gv[n + i] = -2.0 * spray(i);
  }
  double res = 0.0;
  for (int b = 0; b < 2 * n; ++b) {
    double s = 0.0;
    for (int a = 0; a < 2 * n; ++a) s += gv[a] * w(a, b);
    const double de = b < n ? geo.partial(geo.energy(), b).value()
                            : geo.vdot(geo.energy(), b - n).value();
    res = std::max(res, std::abs(s + de));
  }
  out.spray_residual = res;
  return out;
}

FundamentalForm fundamental_form(const FinslerModel& model, const SupportElement& u) {
  return fundamental_form(SiteGeometry(model, u, kOrderSpray));
}

std::vector<double> normalized_vertical_differential(const SiteGeometry& geo) {
  const int n = geo.dim();
  const double l2 = 2.0 * geo.energy().value();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = geo.y_lower()[i].value() / l2;
  return out;
}

}  // namespace finsler
