#include "finsler/curvature.hpp"

#include "finsler/tensors.hpp"

namespace finsler {

CurvatureJets connection_curvature(const SiteGeometry& geo, const JetTensor& F,
                                   const JetTensor* C) {
  const int n = geo.dim();
  const Jet zero = F(0, 0, 0).zero_like();
  const JetTensor rb = C ? geo.barthel_curvature() : JetTensor();
  const JetTensor& gij = geo.berwald();

  CurvatureJets out{JetTensor(n, 4, zero), JetTensor(n, 4, zero), JetTensor(n, 4, zero)};
  for (int h = 0; h < n; ++h) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          // Horizontal: [delta_i, delta_j] = R^m_ij d/dy^m.
          Jet r = geo.delta(F(h, k, i), j) - geo.delta(F(h, k, j), i);
          for (int m = 0; m < n; ++m) r += F(m, k, i) * F(h, m, j) - F(m, k, j) * F(h, m, i);
          if (C) {
            for (int m = 0; m < n; ++m) r += (*C)(h, k, m) * rb(m, i, j);
          }
          out.R(h, k, i, j) = std::move(r);

          // Mixed: [delta_i, d/dy^j] = G^m_ij d/dy^m.
          Jet p = geo.vdot(F(h, k, i), j);
          if (C) {
            p -= geo.delta((*C)(h, k, j), i);
            for (int m = 0; m < n; ++m) {
              p += F(m, k, i) * (*C)(h, m, j) - (*C)(m, k, j) * F(h, m, i) +
                   gij(m, i, j) * (*C)(h, k, m);
            }
          }
          out.P(h, k, i, j) = std::move(p);

          if (C) {
            Jet s = geo.vdot((*C)(h, k, i), j) - geo.vdot((*C)(h, k, j), i);
            for (int m = 0; m < n; ++m) {
              s += (*C)(m, k, i) * (*C)(h, m, j) - (*C)(m, k, j) * (*C)(h, m, i);
            }
            out.S(h, k, i, j) = std::move(s);
          }
        }
      }
    }
  }
  return out;
}

CurvatureJets cartan_curvature_jets(const SiteGeometry& geo) {
  return connection_curvature(geo, geo.cartan_h(), &geo.cartan());
}

CurvatureJets berwald_curvature_jets(const SiteGeometry& geo) {
  return connection_curvature(geo, geo.berwald(), nullptr);
}

CurvatureSet to_values(ConnectionKind kind, const CurvatureJets& c, const SupportElement& site) {
  return {kind, values(c.R), values(c.P), values(c.S), site};
}

RealTensor barthel_curvature(const FinslerModel& model, const SupportElement& u) {
  return values(SiteGeometry(model, u, kOrderCartanCurvature).barthel_curvature());
}

CurvatureSet cartan_curvatures(const FinslerModel& model, const SupportElement& u) {
  SiteGeometry geo(model, u, kOrderCartanCurvature);
  return to_values(ConnectionKind::cartan, cartan_curvature_jets(geo), u);
}

CurvatureSet berwald_curvatures(const FinslerModel& model, const SupportElement& u) {
  SiteGeometry geo(model, u, kOrderBerwaldCurvature);
  return to_values(ConnectionKind::berwald, berwald_curvature_jets(geo), u);
}

RealTensor ricci_trace(const RealTensor& x) {
  const int n = x.dim();
  RealTensor ric(n, 2, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int h = 0; h < n; ++h) ric(i, j) += x(h, j, i, h);
    }
  }
  return ric;
}

namespace {

double raise_trace(const RealTensor& ric, const RealTensor& ginv) {
  double s = 0.0;
  for (std::size_t k = 0; k < ric.size(); ++k) s += ginv.data()[k] * ric.data()[k];
  return s;
}

}  // namespace

RicciSet ricci_scalars(const SiteGeometry& geo, const CurvatureSet& set) {
  const int n = geo.dim();
  const RealTensor g = values(geo.g());
  const RealTensor ginv = values(geo.g_inv());
  RicciSet out;
  out.site = geo.site();
  out.ric_h = ricci_trace(set.R);
  out.ric_v = ricci_trace(set.S);
  out.sc_h = raise_trace(out.ric_h, ginv);
  out.sc_v = raise_trace(out.ric_v, ginv);
  out.einstein_h = out.ric_h - (0.5 * out.sc_h) * g;
  out.einstein_v = out.ric_v - (0.5 * out.sc_v) * g;
  if (n - 1 != 0) {
    out.f_h = out.ric_h - (out.sc_h / (2.0 * (n - 1))) * g;
  } else {
    out.f_h_absent = "absent: n-1 = 0";
  }
  if (n - 2 != 0) {
    out.f_v = out.ric_v - (out.sc_v / (2.0 * (n - 2))) * angular_metric(geo);
  } else {
    out.f_v_absent = "absent: n-2 = 0";
  }
  return out;
}

RicciSet ricci_scalars(const FinslerModel& model, const SupportElement& u,
                       const CurvatureSet& set) {
  return ricci_scalars(SiteGeometry(model, u, 2), set);
}

JetTensor t_tensor_jets(const SiteGeometry& geo) {
  const int n = geo.dim();
  static const Variance lower3[] = {Variance::lower, Variance::lower, Variance::lower};
  // dc(j,k,l,i) = C_jkl|_i
  const JetTensor dc = geo.covariant(geo.cartan_lower(), lower3, Derivative::v_cartan);
  const JetTensor& c = geo.cartan_lower();
  const auto& yl = geo.y_lower();
  const Jet inv_l2 = 1.0 / (2.0 * geo.energy());
  JetTensor t(n, 4, dc(0, 0, 0, 0).zero_like());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          Jet cyc = yl[i] * c(j, k, l) + yl[j] * c(k, l, i) + yl[k] * c(l, i, j) +
                    yl[l] * c(i, j, k);
          t(i, j, k, l) = dc(j, k, l, i) + cyc * inv_l2;
        }
      }
    }
  }
  return t;
}

TensorBlock t_tensor(const FinslerModel& model, const SupportElement& u) {
  SiteGeometry geo(model, u, kOrderCartanConnection);
  using V = Variance;
  return make_block("T", {V::lower, V::lower, V::lower, V::lower}, values(t_tensor_jets(geo)), u);
}

RealTensor lower_curvature(const RealTensor& r, const RealTensor& g) {
  const int n = r.dim();
  RealTensor out(n, 4, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int w = 0; w < n; ++w) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) s += g(m, w) * r(m, k, i, j);
          out(i, j, k, w) = s;
        }
      }
    }
  }
  return out;
}

}  // namespace finsler
