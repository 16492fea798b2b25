#include "finsler/conformal.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "finsler/connections.hpp"
#include "finsler/errors.hpp"
#include "finsler/tensors.hpp"

namespace finsler {

Tolerances Tolerances::scaled(double s) const {
  Tolerances t = *this;
  for (double* v : {&t.connection, &t.curvature, &t.invariant, &t.sigma_invariant, &t.homothety,
                    &t.conformality, &t.structure, &t.berwald_identity, &t.berwald_vertical,
                    &t.hypothesis, &t.geodesic, &t.jacobi, &t.linearity}) {
    *v *= s;
  }
  return t;
}

namespace {

using V = Variance;

double delta_kr(int a, int b) { return a == b ? 1.0 : 0.0; }

// sigma data, B^h, B^h_j, U, A and Psi: everything below curvature level.
void fill_connection_deltas(const SiteGeometry& geo, const ConformalFactor& factor,
                            ConformalDeltaJets& d) {
  const int n = geo.dim();
  const Jet& E = geo.energy();
  const auto& y = geo.y();
  const auto& yl = geo.y_lower();
  const JetTensor& g = geo.g();
  const JetTensor& gi = geo.g_inv();
  const JetTensor& C = geo.cartan();
  const JetTensor& Cl = geo.cartan_lower();
  const Jet zero = E.zero_like();
  const Jet L2 = 2.0 * E;

  d.sigma = factor.jet(geo.site(), geo.order());
  d.sigma_lower.clear();
  d.sigma_upper.clear();
  for (int j = 0; j < n; ++j) d.sigma_lower.push_back(geo.partial(d.sigma, j));
  d.sigma_o = zero;
  for (int j = 0; j < n; ++j) d.sigma_o += d.sigma_lower[j] * y[j];
  for (int h = 0; h < n; ++h) {
    Jet s = zero;
    for (int j = 0; j < n; ++j) s += gi(h, j) * d.sigma_lower[j];
    d.sigma_upper.push_back(s);
  }
  const auto& sl = d.sigma_lower;
  const auto& su = d.sigma_upper;

  // B^h = (E g^hj - y^h y^j) sigma_j
  d.B = JetTensor(n, 1, zero);
  for (int h = 0; h < n; ++h) {
    Jet s = zero;
    for (int j = 0; j < n; ++j) s += (E * gi(h, j) - y[h] * y[j]) * sl[j];
    d.B(h) = s;
  }

  // B^h_j = y_j sigma^h - delta^h_j sigma_o - y^h sigma_j - L^2 C^h_j,
  // C^h_j = C^hr_j sigma_r = C^h_jk sigma^k.
  d.B_j = JetTensor(n, 2, zero);
  for (int h = 0; h < n; ++h) {
    for (int j = 0; j < n; ++j) {
      Jet chj = zero;
      for (int k = 0; k < n; ++k) chj += C(h, j, k) * su[k];
      d.B_j(h, j) = yl[j] * su[h] - delta_kr(h, j) * d.sigma_o - y[h] * sl[j] - L2 * chj;
    }
  }
  const JetTensor& Bj = d.B_j;

  // U^h_ij = g_ij sigma^h - delta^h_i sigma_j - delta^h_j sigma_i - C^h_im B^m_j
  //          - C^h_jm B^m_i + g^hr C_ijm B^m_r
  JetTensor cb(n, 3, zero);  // cb(h,i,j) = C^h_im B^m_j
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Jet s = zero;
        for (int m = 0; m < n; ++m) s += C(h, i, m) * Bj(m, j);
        cb(h, i, j) = s;
      }
    }
  }
  JetTensor clb(n, 3, zero);  // clb(i,j,r) = C_ijm B^m_r
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int r = 0; r < n; ++r) {
        Jet s = zero;
        for (int m = 0; m < n; ++m) s += Cl(i, j, m) * Bj(m, r);
        clb(i, j, r) = s;
      }
    }
  }
  d.U = JetTensor(n, 3, zero);
  d.A = JetTensor(n, 3, zero);
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Jet u = g(i, j) * su[h] - delta_kr(h, i) * sl[j] - delta_kr(h, j) * sl[i] - cb(h, i, j) -
                cb(h, j, i);
        for (int r = 0; r < n; ++r) u += gi(h, r) * clb(i, j, r);
        d.A(h, i, j) = u + cb(h, i, j);
        d.U(h, i, j) = std::move(u);
      }
    }
  }

  // Psi^h_ij = d B^h_i / dy^j
  d.Psi = JetTensor(n, 3, zero);
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) d.Psi(h, i, j) = geo.vdot(Bj(h, i), j);
    }
  }
}

void fill_curvature_deltas(const SiteGeometry& geo, const CurvatureJets& cartan,
                           ConformalDeltaJets& d) {
  const int n = geo.dim();
  const JetTensor& C = geo.cartan();
  const JetTensor& Gij = geo.berwald();
  const JetTensor& S = cartan.S;
  const JetTensor& P = cartan.P;
  const JetTensor& Bj = d.B_j;
  const JetTensor& U = d.U;
  const JetTensor& A = d.A;
  const JetTensor& Psi = d.Psi;
  const Jet zero = geo.energy().zero_like();

  // H^h_ij = -U_ij{ B^h_i|j + (Psi^h_im - P^h_im) B^m_j },  P^h_im = C^h_im|0
  static const Variance mixed2[] = {V::upper, V::lower};
  static const Variance mixed3[] = {V::upper, V::lower, V::lower};
  const JetTensor dB = geo.covariant(Bj, mixed2, Derivative::h_cartan);
  const JetTensor c0 = cartan_tensor_h_derivative_along_y(geo);
  JetTensor x(n, 3, zero);
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Jet s = dB(h, i, j);
        for (int m = 0; m < n; ++m) s += (Psi(h, i, m) - c0(h, i, m)) * Bj(m, j);
        x(h, i, j) = s;
      }
    }
  }
  d.H_barthel = JetTensor(n, 3, zero);
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) d.H_barthel(h, i, j) = x(h, j, i) - x(h, i, j);
    }
  }

  // V^h_kij = 2 B^m_i S^h_kjm + d A^h_ki / dy^j - U^h_im C^m_kj + U^m_ki C^h_jm
  d.V = JetTensor(n, 4, zero);
  for (int h = 0; h < n; ++h) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          Jet s = geo.vdot(A(h, k, i), j);
          for (int m = 0; m < n; ++m) {
            s += 2.0 * Bj(m, i) * S(h, k, j, m) - U(h, i, m) * C(m, k, j) + U(m, k, i) * C(h, j, m);
          }
          d.V(h, k, i, j) = std::move(s);
        }
      }
    }
  }

  // H^h_kij = 2 S^h_kml B^m_i B^l_j
  //           - U_ij{ A^h_ki|j + B^m_j dA^h_ki/dy^m + U^m_kj U^h_im - B^m_j P^h_kim }
  const JetTensor dA = geo.covariant(A, mixed3, Derivative::h_cartan);
  JetTensor yk(n, 4, zero);
  for (int h = 0; h < n; ++h) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        std::vector<Jet> va;
        for (int m = 0; m < n; ++m) va.push_back(geo.vdot(A(h, k, i), m));
        for (int j = 0; j < n; ++j) {
          Jet s = dA(h, k, i, j);
          for (int m = 0; m < n; ++m) {
            s += Bj(m, j) * va[m] + U(m, k, j) * U(h, i, m) - Bj(m, j) * P(h, k, i, m);
          }
          yk(h, k, i, j) = std::move(s);
        }
      }
    }
  }
  d.H = JetTensor(n, 4, zero);
  for (int h = 0; h < n; ++h) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          Jet s = yk(h, k, j, i) - yk(h, k, i, j);
          for (int m = 0; m < n; ++m) {
            for (int l = 0; l < n; ++l) s += 2.0 * S(h, k, m, l) * Bj(m, i) * Bj(l, j);
          }
          d.H(h, k, i, j) = std::move(s);
        }
      }
    }
  }

  // V*^h_kij = d Psi^h_ki / dy^j
  d.V_star = JetTensor(n, 4, zero);
  for (int h = 0; h < n; ++h) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) d.V_star(h, k, i, j) = geo.vdot(Psi(h, k, i), j);
      }
    }
  }

  // H*^h_kij = U_ij{ (dG^h_ik/dy^m) B^m_j - Psi^h_ik(j) - (dPsi^h_ik/dy^m) B^m_j
  //                  - Psi^h_im Psi^m_kj }
  const JetTensor dPsi = geo.covariant(Psi, mixed3, Derivative::h_berwald);
  JetTensor z(n, 4, zero);
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        std::vector<Jet> vg, vp;
        for (int m = 0; m < n; ++m) {
          vg.push_back(geo.vdot(Gij(h, i, k), m));
          vp.push_back(geo.vdot(Psi(h, i, k), m));
        }
        for (int j = 0; j < n; ++j) {
          Jet s = -dPsi(h, i, k, j);
          for (int m = 0; m < n; ++m) {
            s += (vg[m] - vp[m]) * Bj(m, j) - Psi(h, i, m) * Psi(m, k, j);
          }
          z(h, k, i, j) = std::move(s);
        }
      }
    }
  }
  d.H_star = JetTensor(n, 4, zero);
  for (int h = 0; h < n; ++h) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) d.H_star(h, k, i, j) = z(h, k, i, j) - z(h, k, j, i);
      }
    }
  }
}

SigmaSnapshot snapshot(const SiteGeometry& geo, const ConformalDeltaJets& d) {
  const int n = geo.dim();
  SigmaSnapshot s;
  s.sigma = d.sigma.value();
  for (int j = 0; j < n; ++j) {
    s.sigma_lower.push_back(d.sigma_lower[j].value());
    s.sigma_upper.push_back(d.sigma_upper[j].value());
  }
  s.sigma_o = d.sigma_o.value();
  // d_G sigma with G = y^i d/dx^i - 2 G^h d/dy^h
  double s1 = 0.0;
  for (int i = 0; i < n; ++i) {
    s1 += geo.site().y[i] * geo.partial(d.sigma, i).value() -
          2.0 * geo.spray()(i).value() * geo.vdot(d.sigma, i).value();
  }
  s.sigma_1 = s1;
  return s;
}

}  // namespace

ConformalDeltaJets conformal_delta_jets(const SiteGeometry& base, const ConformalFactor& sigma,
                                        const CurvatureJets* cartan) {
  if (base.order() < kOrderBerwaldCurvature) {
    throw JetOrderError("conformal difference tensors need jet order " +
                        std::to_string(kOrderBerwaldCurvature) + ", have " +
                        std::to_string(base.order()));
  }
  ConformalDeltaJets d;
  fill_connection_deltas(base, sigma, d);
  if (cartan) {
    fill_curvature_deltas(base, *cartan, d);
  } else {
    fill_curvature_deltas(base, cartan_curvature_jets(base), d);
  }
  return d;
}

ConformalDeltaJets connection_delta_jets(const SiteGeometry& base, const ConformalFactor& sigma) {
  if (base.order() < kOrderCartanConnection) {
    throw JetOrderError("conformal connection deltas need jet order " +
                        std::to_string(kOrderCartanConnection));
  }
  ConformalDeltaJets d;
  fill_connection_deltas(base, sigma, d);
  return d;
}

ConformalDeltas conformal_deltas(const FinslerModel& model, const ConformalFactor& sigma,
                                 const SupportElement& u) {
  SiteGeometry geo(model, u, std::max(default_jet_order(), kOrderBerwaldCurvature));
  ConformalDeltaJets d = conformal_delta_jets(geo, sigma);
  ConformalDeltas out;
  out.B = values(d.B);
  out.B_j = values(d.B_j);
  out.U = values(d.U);
  out.A = values(d.A);
  out.Psi = values(d.Psi);
  out.H_barthel = values(d.H_barthel);
  out.V = values(d.V);
  out.H = values(d.H);
  out.V_star = values(d.V_star);
  out.H_star = values(d.H_star);
  out.sigma = snapshot(geo, d);
  out.site = u;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Everything needed to compare a base model with its conformal lift at one
// support element.
struct ConformalPair {
  SiteGeometry base;
  SiteGeometry lifted;
  CurvatureJets cartan_base, cartan_lifted, berwald_base, berwald_lifted;
  ConformalDeltaJets deltas;
  SigmaSnapshot sigma;

  ConformalPair(const FinslerModel& model, const FinslerModel& lifted_model,
                const ConformalFactor& factor, const SupportElement& u, int order)
      : base(model, u, order),
        lifted(lifted_model, u, order),
        cartan_base(cartan_curvature_jets(base)),
        cartan_lifted(cartan_curvature_jets(lifted)),
        berwald_base(berwald_curvature_jets(base)),
        berwald_lifted(berwald_curvature_jets(lifted)) {
    fill_connection_deltas(base, factor, deltas);
    fill_curvature_deltas(base, cartan_base, deltas);
    sigma = snapshot(base, deltas);
  }
};

int pair_order() { return std::max(default_jet_order(), kOrderBerwaldCurvature); }

RealTensor scalar(double v) {
  RealTensor t(1, 0, v);
  return t;
}

RealTensor vec(const std::vector<double>& v) {
  RealTensor t(static_cast<int>(v.size()), 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) t.data()[i] = v[i];
  return t;
}

double block_scale(const RealTensor& a, const RealTensor& b) {
  return std::max(max_abs(a), max_abs(b));
}

enum class Level { connection, curvature, berwald_identity, berwald_vertical, invariant, sigma_invariant };

double level_tol(Level l, const Tolerances& t) {
  switch (l) {
    case Level::connection: return t.connection;
    case Level::curvature: return t.curvature;
    case Level::berwald_identity: return t.berwald_identity;
    case Level::berwald_vertical: return t.berwald_vertical;
    case Level::invariant: return t.invariant;
    case Level::sigma_invariant: return t.sigma_invariant;
  }
  return t.connection;
}

struct Law {
  std::string name;
  std::string anchor;
  Level level;
  // Returns {direct, predicted} blocks; may return several pairs.
  std::function<std::vector<std::pair<RealTensor, RealTensor>>(const ConformalPair&)> eval;
};

RealTensor omega_law_prediction(const ConformalPair& p) {
  const int n = p.base.dim();
  const RealTensor w = fundamental_form(p.base).omega;
  const double e2s = std::exp(2.0 * p.sigma.sigma);
  // i_C Omega = y_i dx^i, d sigma = sigma_i dx^i
  std::vector<double> ds(2 * n, 0.0), ic(2 * n, 0.0);
  for (int i = 0; i < n; ++i) {
    ds[i] = p.sigma.sigma_lower[i];
    ic[i] = p.base.y_lower()[i].value();
  }
  RealTensor out(2 * n, 2, 0.0);
  for (int a = 0; a < 2 * n; ++a) {
    for (int b = 0; b < 2 * n; ++b) {
      out(a, b) = e2s * (w(a, b) + 2.0 * (ds[a] * ic[b] - ds[b] * ic[a]));
    }
  }
  return out;
}

std::vector<Law> transformation_laws() {
  using Pairs = std::vector<std::pair<RealTensor, RealTensor>>;
  std::vector<Law> laws;
  laws.push_back({"energy", "E~ = e^{2 sigma} E", Level::connection, [](const ConformalPair& p) {
                    const double e2s = std::exp(2.0 * p.sigma.sigma);
                    return Pairs{{scalar(p.lifted.energy().value()),
                                  scalar(e2s * p.base.energy().value())}};
                  }});
  laws.push_back({"metric", "g~_ij = e^{2 sigma} g_ij", Level::connection,
                  [](const ConformalPair& p) {
                    const double e2s = std::exp(2.0 * p.sigma.sigma);
                    return Pairs{{values(p.lifted.g()), e2s * values(p.base.g())}};
                  }});
  laws.push_back({"spray", "G~^h = G^h - B^h,  B^h = (E g^hj - y^h y^j) sigma_j",
                  Level::connection, [](const ConformalPair& p) {
                    return Pairs{{values(p.lifted.spray()),
                                  values(p.base.spray()) - values(p.deltas.B)}};
                  }});
  laws.push_back({"spray_global", "G~ = G + 2 (E grad_v sigma - sigma_1 C)", Level::connection,
                  [](const ConformalPair& p) {
                    const int n = p.base.dim();
                    RealTensor direct = -2.0 * (values(p.lifted.spray()) - values(p.base.spray()));
                    RealTensor pred(n, 1, 0.0);
                    const double E = p.base.energy().value();
                    for (int h = 0; h < n; ++h) {
                      pred(h) = 2.0 * (E * p.sigma.sigma_upper[h] -
                                       p.sigma.sigma_1 * p.base.site().y[h]);
                    }
                    return Pairs{{direct, pred}};
                  }});
  laws.push_back({"barthel", "G~^h_j = G^h_j - B^h_j", Level::connection,
                  [](const ConformalPair& p) {
                    return Pairs{{values(p.lifted.barthel()),
                                  values(p.base.barthel()) - values(p.deltas.B_j)}};
                  }});
  laws.push_back(
      {"barthel_global",
       "Gamma~ = Gamma - 2 L,  L = sigma_j y^h + sigma_o delta^h_j - y_j sigma^h + L^2 C^h_j",
       Level::connection, [](const ConformalPair& p) {
         // C^h_j taken here as -1/2 d sigma^h / dy^j.
         const int n = p.base.dim();
         const double l2 = 2.0 * p.base.energy().value();
         RealTensor direct = values(p.lifted.barthel()) - values(p.base.barthel());
         RealTensor pred(n, 2, 0.0);
         for (int h = 0; h < n; ++h) {
           for (int j = 0; j < n; ++j) {
             const double chj = -0.5 * p.base.vdot(p.deltas.sigma_upper[h], j).value();
             pred(h, j) = p.sigma.sigma_lower[j] * p.base.site().y[h] +
                          (h == j ? p.sigma.sigma_o : 0.0) -
                          p.base.y_lower()[j].value() * p.sigma.sigma_upper[h] + l2 * chj;
           }
         }
         return Pairs{{direct, pred}};
       }});
  laws.push_back({"B_j_vertical_derivative", "B^h_j = dB^h / dy^j", Level::connection,
                  [](const ConformalPair& p) {
                    const int n = p.base.dim();
                    RealTensor d(n, 2, 0.0);
                    for (int h = 0; h < n; ++h) {
                      for (int j = 0; j < n; ++j) d(h, j) = p.base.vdot(p.deltas.B(h), j).value();
                    }
                    return Pairs{{d, values(p.deltas.B_j)}};
                  }});
  laws.push_back({"cartan_h", "Gamma~^h_ij = Gamma^h_ij - U^h_ij", Level::connection,
                  [](const ConformalPair& p) {
                    return Pairs{{values(p.lifted.cartan_h()),
                                  values(p.base.cartan_h()) - values(p.deltas.U)}};
                  }});
  laws.push_back({"cartan_v", "C~^h_ij = C^h_ij", Level::connection, [](const ConformalPair& p) {
                    return Pairs{{values(p.lifted.cartan()), values(p.base.cartan())}};
                  }});
  laws.push_back({"deflection_U", "U^h_ij y^j = B^h_i", Level::connection,
                  [](const ConformalPair& p) {
                    const int n = p.base.dim();
                    const RealTensor u = values(p.deltas.U);
                    RealTensor d(n, 2, 0.0);
                    for (int h = 0; h < n; ++h) {
                      for (int i = 0; i < n; ++i) {
                        for (int j = 0; j < n; ++j) d(h, i) += u(h, i, j) * p.base.site().y[j];
                      }
                    }
                    return Pairs{{d, values(p.deltas.B_j)}};
                  }});
  laws.push_back({"deflection_Psi", "Psi^h_ij y^j = B^h_i", Level::connection,
                  [](const ConformalPair& p) {
                    const int n = p.base.dim();
                    const RealTensor psi = values(p.deltas.Psi);
                    RealTensor d(n, 2, 0.0);
                    for (int h = 0; h < n; ++h) {
                      for (int i = 0; i < n; ++i) {
                        for (int j = 0; j < n; ++j) d(h, i) += psi(h, i, j) * p.base.site().y[j];
                      }
                    }
                    return Pairs{{d, values(p.deltas.B_j)}};
                  }});
  laws.push_back({"berwald_h", "G~^h_ij = G^h_ij - Psi^h_ij", Level::connection,
                  [](const ConformalPair& p) {
                    return Pairs{{values(p.lifted.berwald()),
                                  values(p.base.berwald()) - values(p.deltas.Psi)}};
                  }});
  laws.push_back({"berwald_v", "C~*^h_ij = C*^h_ij = 0", Level::berwald_vertical,
                  [](const ConformalPair& p) {
                    const int n = p.base.dim();
                    return Pairs{{berwald_coeffs(p.lifted).v_coeffs, RealTensor(n, 3, 0.0)}};
                  }});
  laws.push_back({"berwald_identity", "G^h_ij = Gamma^h_ij + C^h_ij|0", Level::berwald_identity,
                  [](const ConformalPair& p) {
                    Pairs out;
                    for (const SiteGeometry* g : {&p.base, &p.lifted}) {
                      out.push_back({values(g->berwald()),
                                     values(g->cartan_h()) +
                                         values(cartan_tensor_h_derivative_along_y(*g))});
                    }
                    return out;
                  }});
  laws.push_back({"fundamental_form",
                  "Omega~ = e^{2 sigma} Omega + 2 e^{2 sigma} d sigma ^ i_C Omega",
                  Level::connection, [](const ConformalPair& p) {
                    return Pairs{{fundamental_form(p.lifted).omega, omega_law_prediction(p)}};
                  }});
  laws.push_back({"barthel_curvature", "R~^h_ij = R^h_ij + H^h_ij", Level::curvature,
                  [](const ConformalPair& p) {
                    return Pairs{{values(p.lifted.barthel_curvature()),
                                  values(p.base.barthel_curvature()) + values(p.deltas.H_barthel)}};
                  }});
  laws.push_back({"cartan_S", "S~ = S", Level::curvature, [](const ConformalPair& p) {
                    return Pairs{{values(p.cartan_lifted.S), values(p.cartan_base.S)}};
                  }});
  laws.push_back({"cartan_P", "P~ = P - V", Level::curvature, [](const ConformalPair& p) {
                    return Pairs{{values(p.cartan_lifted.P),
                                  values(p.cartan_base.P) - values(p.deltas.V)}};
                  }});
  laws.push_back({"cartan_R", "R~ = R + H", Level::curvature, [](const ConformalPair& p) {
                    return Pairs{{values(p.cartan_lifted.R),
                                  values(p.cartan_base.R) + values(p.deltas.H)}};
                  }});
  laws.push_back({"berwald_S", "S~* = S* = 0", Level::berwald_vertical,
                  [](const ConformalPair& p) {
                    return Pairs{{values(p.berwald_lifted.S), values(p.berwald_base.S)},
                                 {values(p.berwald_base.S), RealTensor(p.base.dim(), 4, 0.0)}};
                  }});
  laws.push_back({"berwald_P", "P~* = P* - V*,  V*^h_kij = dPsi^h_ki / dy^j", Level::curvature,
                  [](const ConformalPair& p) {
                    return Pairs{{values(p.berwald_lifted.P),
                                  values(p.berwald_base.P) - values(p.deltas.V_star)}};
                  }});
  laws.push_back({"berwald_R", "R~* = R* + H*", Level::curvature, [](const ConformalPair& p) {
                    return Pairs{{values(p.berwald_lifted.R),
                                  values(p.berwald_base.R) + values(p.deltas.H_star)}};
                  }});
  return laws;
}

// Fits G~_j = G_j - B_j versus G~_j = G_j + B_j at one pair.
struct ProbeOutcome {
  double minus_fit, plus_fit, scale;
};

ProbeOutcome probe(const ConformalPair& p) {
  const RealTensor diff = values(p.lifted.barthel()) - values(p.base.barthel());
  const RealTensor b = values(p.deltas.B_j);
  return {max_abs(diff + b), max_abs(diff - b), max_abs(b)};
}

struct SampleLoop {
  std::size_t excluded = 0;
  nlohmann::json failures = nlohmann::json::array();

  template <class F>
  void run(const std::vector<SupportElement>& samples, const Tolerances& tol, F&& body) {
    for (std::size_t s = 0; s < samples.size(); ++s) {
      try {
        body(s, samples[s]);
      } catch (const Error& e) {
        ++excluded;
        if (failures.size() < 10) failures.push_back({{"sample", s}, {"error", e.what()}});
      }
    }
    (void)tol;
  }
};

bool ill_conditioned(const ConformalPair& p, const Tolerances& tol) {
  return p.base.condition_number() > tol.max_condition ||
         p.lifted.condition_number() > tol.max_condition;
}

}  // namespace

VerificationReport verify_transformation_laws(const FinslerModel& model,
                                              const ConformalFactor& sigma,
                                              const std::vector<SupportElement>& samples,
                                              const Tolerances& tol) {
  const FinslerModel lifted = conformal_lift(model, sigma);
  const std::vector<Law> laws = transformation_laws();
  std::vector<Residual> res(laws.size());
  SampleLoop loop;
  std::size_t ill = 0;
  std::string orientation = "not probed";
  bool probed = false;

  loop.run(samples, tol, [&](std::size_t s, const SupportElement& u) {
    ConformalPair p(model, lifted, sigma, u, pair_order());
    if (ill_conditioned(p, tol)) {
      ++ill;
      return;
    }
    if (!probed) {
      const ProbeOutcome o = probe(p);
      if (o.scale > 1e-6) {
        probed = true;
        const double fit_tol = tol.connection * std::max(1.0, o.scale);
        if (o.minus_fit <= fit_tol) {
          orientation = "G~^h_j = G^h_j - B^h_j (L = -B^h_j dx^j (x) d/dy^h)";
        } else if (o.plus_fit <= fit_tol) {
          std::ostringstream os;
          os << "sign probe at sample " << s << ": G~_j - G_j fits +B_j (residual " << o.plus_fit
             << ") rather than -B_j (residual " << o.minus_fit << ")";
          throw ConventionError(os.str());
        } else {
          std::ostringstream os;
          os << "inconclusive: neither orientation fits (residuals " << o.minus_fit << ", "
             << o.plus_fit << ")";
          orientation = os.str();
        }
      }
    }
    for (std::size_t k = 0; k < laws.size(); ++k) {
      for (const auto& [direct, predicted] : laws[k].eval(p)) {
        res[k].add(max_abs_diff(direct, predicted), block_scale(direct, predicted), s);
      }
    }
  });
  if (!probed && orientation == "not probed") orientation = "degenerate: B_j = 0 at every sample";

  VerificationReport report;
  report.title = "transformation laws: " + model.family() + " / sigma " + sigma.family();
  for (std::size_t k = 0; k < laws.size(); ++k) {
    CheckResult c;
    c.name = laws[k].name;
    c.anchor = laws[k].anchor;
    c.take(res[k], level_tol(laws[k].level, tol));
    c.excluded = loop.excluded + ill;
    c.passed = c.passed && c.samples > 0;
    c.details["worst_sample"] = res[k].worst_sample;
    report.checks.push_back(c);
  }
  report.details["sign_convention"] = orientation;
  report.details["ill_conditioned_samples"] = ill;
  if (!loop.failures.empty()) report.details["evaluation_failures"] = loop.failures;
  return report;
}

// ---------------------------------------------------------------------------

namespace {

struct ConditionalCheck {
  std::string name, anchor, hypothesis;
  std::size_t holds = 0, tested = 0;
  Residual res;
};

}  // namespace

VerificationReport invariant_suite(const FinslerModel& model, const ConformalFactor& sigma,
                                   const std::vector<SupportElement>& samples,
                                   const Tolerances& tol) {
  const FinslerModel lifted = conformal_lift(model, sigma);
  const int n = model.dim();
  struct Inv {
    std::string name, anchor;
    Level level;
    Residual res;
    bool absent = false;
    std::string absent_note;
  };
  std::vector<Inv> inv = {
      {"C_mixed", "C~^h_ij = C^h_ij", Level::invariant, {}, false, {}},
      {"S", "S~ = S", Level::invariant, {}, false, {}},
      {"Ric_v", "Ric~^v = Ric^v", Level::invariant, {}, false, {}},
      {"L2_Sc_v", "L~^2 Sc~^v = L^2 Sc^v", Level::invariant, {}, false, {}},
      {"F_v", "F~^v = F^v,  F^v = Ric^v - Sc^v hbar / (2(n-2))", Level::invariant, {}, false, {}},
      {"Einstein_v", "Ric~^v - Sc~^v g~ / 2 = Ric^v - Sc^v g / 2", Level::invariant, {}, false, {}},
      {"dJL_over_L", "d_J L~ / L~ = d_J L / L", Level::invariant, {}, false, {}},
      {"C_form_v_derivative", "C~_i|_j = C_i|_j (vertical Cartan derivative of the C-form)",
       Level::invariant, {}, false, {}},
      {"hbar", "hbar~ = e^{2 sigma} hbar", Level::sigma_invariant, {}, false, {}},
      {"T_tensor", "T~ = e^{2 sigma} T", Level::sigma_invariant, {}, false, {}},
      {"C_lower", "C~_ijk = e^{2 sigma} C_ijk", Level::sigma_invariant, {}, false, {}},
      {"E_sigma_invariant", "E~ = e^{2 sigma} E", Level::sigma_invariant, {}, false, {}},
  };
  enum { kC, kS, kRicV, kScV, kFv, kEv, kDjl, kCform, kHbar, kT, kCl, kE };
  if (n == 2) {
    inv[kFv].absent = true;
    inv[kFv].absent_note = "absent: n-2 = 0";
  }

  std::vector<ConditionalCheck> cond = {
      {"Ric_h_if_traceless_H", "Tr H = 0  =>  Ric~^h = Ric^h", "Tr H = 0", 0, 0, {}},
      {"L2_Sc_h_if_traceless_H", "Tr H = 0  =>  L~^2 Sc~^h = L^2 Sc^h", "Tr H = 0", 0, 0, {}},
      {"F_h_if_traceless_H", "Tr H = 0  =>  F~^h = F^h,  F^h = Ric^h - Sc^h g / (2(n-1))",
       "Tr H = 0", 0, 0, {}},
      {"Einstein_h_if_traceless_H", "Tr H = 0  =>  Ric~^h - Sc~^h g~ / 2 = Ric^h - Sc^h g / 2",
       "Tr H = 0", 0, 0, {}},
      {"P_star_if_V_star_zero", "V* = 0  =>  P~* = P*", "V* = 0", 0, 0, {}},
      {"Ric_star_h_if_traceless_H_star", "Tr H* = 0  =>  Ric~*^h = Ric*^h", "Tr H* = 0", 0, 0, {}},
      {"L2_Sc_star_h_if_traceless_H_star", "Tr H* = 0  =>  L~^2 Sc~*^h = L^2 Sc*^h",
       "Tr H* = 0", 0, 0, {}},
      {"Einstein_star_h_if_traceless_H_star",
       "Tr H* = 0  =>  Ric~*^h - Sc~*^h g~ / 2 = Ric*^h - Sc*^h g / 2", "Tr H* = 0", 0, 0, {}},
  };

  SampleLoop loop;
  std::size_t ill = 0;
  static const Variance lower1[] = {V::lower};
  loop.run(samples, tol, [&](std::size_t s, const SupportElement& u) {
    ConformalPair p(model, lifted, sigma, u, pair_order());
    if (ill_conditioned(p, tol)) {
      ++ill;
      return;
    }
    const double e2s = std::exp(2.0 * p.sigma.sigma);
    auto add = [&](Inv& c, const RealTensor& a, const RealTensor& b) {
      c.res.add(max_abs_diff(a, b), block_scale(a, b), s);
    };
    const CurvatureSet cb = to_values(ConnectionKind::cartan, p.cartan_base, u);
    const CurvatureSet cl = to_values(ConnectionKind::cartan, p.cartan_lifted, u);
    const CurvatureSet bb = to_values(ConnectionKind::berwald, p.berwald_base, u);
    const CurvatureSet bl = to_values(ConnectionKind::berwald, p.berwald_lifted, u);
    const RicciSet rb = ricci_scalars(p.base, cb);
    const RicciSet rl = ricci_scalars(p.lifted, cl);
    const RicciSet rbs = ricci_scalars(p.base, bb);
    const RicciSet rls = ricci_scalars(p.lifted, bl);
    const double l2b = 2.0 * p.base.energy().value();
    const double l2l = 2.0 * p.lifted.energy().value();

    add(inv[kC], values(p.lifted.cartan()), values(p.base.cartan()));
    add(inv[kS], cl.S, cb.S);
    add(inv[kRicV], rl.ric_v, rb.ric_v);
    add(inv[kScV], scalar(l2l * rl.sc_v), scalar(l2b * rb.sc_v));
    if (rb.f_v && rl.f_v) add(inv[kFv], *rl.f_v, *rb.f_v);
    add(inv[kEv], rl.einstein_v, rb.einstein_v);
    add(inv[kDjl], vec(normalized_vertical_differential(p.lifted)),
        vec(normalized_vertical_differential(p.base)));
    {
      auto cform = [&](const SiteGeometry& g) {
        JetTensor c(n, 1, g.energy().zero_like());
        for (int i = 0; i < n; ++i) {
          for (int h = 0; h < n; ++h) c(i) += g.cartan()(h, i, h);
        }
        return values(g.covariant(c, lower1, Derivative::v_cartan));
      };
      add(inv[kCform], cform(p.lifted), cform(p.base));
    }
    add(inv[kHbar], angular_metric(p.lifted), e2s * angular_metric(p.base));
    add(inv[kT], values(t_tensor_jets(p.lifted)), e2s * values(t_tensor_jets(p.base)));
    add(inv[kCl], values(p.lifted.cartan_lower()), e2s * values(p.base.cartan_lower()));
    add(inv[kE], scalar(p.lifted.energy().value()), scalar(e2s * p.base.energy().value()));

    // Conditional statements: test the conclusion only where the hypothesis holds.
    const double tr_h = max_abs(ricci_trace(values(p.deltas.H)));
    const double v_star = max_abs(values(p.deltas.V_star));
    const double tr_hs = max_abs(ricci_trace(values(p.deltas.H_star)));
    auto conditional = [&](ConditionalCheck& c, bool holds, const RealTensor& a,
                           const RealTensor& b) {
      ++c.tested;
      if (!holds) return;
      ++c.holds;
      c.res.add(max_abs_diff(a, b), block_scale(a, b), s);
    };
    const bool h0 = tr_h <= tol.hypothesis;
    conditional(cond[0], h0, rl.ric_h, rb.ric_h);
    conditional(cond[1], h0, scalar(l2l * rl.sc_h), scalar(l2b * rb.sc_h));
    if (rl.f_h && rb.f_h) {
      conditional(cond[2], h0, *rl.f_h, *rb.f_h);
    }
    conditional(cond[3], h0, rl.einstein_h, rb.einstein_h);
    conditional(cond[4], v_star <= tol.hypothesis, bl.P, bb.P);
    const bool hs0 = tr_hs <= tol.hypothesis;
    conditional(cond[5], hs0, rls.ric_h, rbs.ric_h);
    conditional(cond[6], hs0, scalar(l2l * rls.sc_h), scalar(l2b * rbs.sc_h));
    conditional(cond[7], hs0, rls.einstein_h, rbs.einstein_h);
  });

  VerificationReport report;
  report.title = "conformal invariants: " + model.family() + " / sigma " + sigma.family();
  for (const auto& c : inv) {
    CheckResult r;
    r.name = c.name;
    r.anchor = c.anchor;
    r.excluded = loop.excluded + ill;
    if (c.absent) {
      r.passed = true;
      r.note = c.absent_note;
      r.tolerance = level_tol(c.level, tol);
    } else {
      r.take(c.res, level_tol(c.level, tol));
      r.passed = r.passed && r.samples > 0;
    }
    report.checks.push_back(r);
  }
  for (const auto& c : cond) {
    CheckResult r;
    r.name = c.name;
    r.anchor = c.anchor;
    r.excluded = loop.excluded + ill;
    r.take(c.res, tol.curvature);
    r.details["hypothesis"] = c.hypothesis;
    r.details["hypothesis_holds"] = c.holds;
    r.details["hypothesis_tested"] = c.tested;
    r.details["hypothesis_rate"] = c.tested ? static_cast<double>(c.holds) / c.tested : 0.0;
    if (c.holds == 0) {
      r.passed = true;
      r.note = "hypothesis held at 0 of " + std::to_string(c.tested) +
               " samples; conclusion not tested";
    }
    report.checks.push_back(r);
  }
  report.details["ill_conditioned_samples"] = ill;
  if (!loop.failures.empty()) report.details["evaluation_failures"] = loop.failures;
  return report;
}

// ---------------------------------------------------------------------------

CheckResult HomothetyReport::to_check() const {
  CheckResult c;
  c.name = "homothety";
  c.anchor =
      "equivalent: B^h_j = 0, B^h = 0, G~^h_i = G^h_i, (Gamma~, C~) = (Gamma, C), d sigma = 0";
  c.passed = all_agree;
  double m = 0.0;
  for (const auto& p : predicates) {
    m = std::max(m, p.max_value);
    c.details["predicates"].push_back({{"name", p.name},
                                       {"statement", p.statement},
                                       {"max", p.max_value},
                                       {"witness_sample", p.witness},
                                       {"holds", p.holds}});
  }
  c.max_abs = m;
  c.details["homothetic"] = homothetic;
  c.note = all_agree ? (homothetic ? "all five hold" : "all five fail")
                     : "predicates disagree";
  return c;
}

HomothetyReport homothety_test(const FinslerModel& model, const ConformalFactor& sigma,
                               const std::vector<SupportElement>& samples,
                               const Tolerances& tol) {
  const FinslerModel lifted = conformal_lift(model, sigma);
  HomothetyReport out;
  out.predicates = {
      {"B_j_zero", "max |B^h_j| = 0"},
      {"B_zero", "max |B^h| = 0"},
      {"barthel_unchanged", "max |G~^h_i - G^h_i| = 0"},
      {"cartan_unchanged", "max |Gamma~ - Gamma| + |C~ - C| = 0"},
      {"sigma_constant", "max |d sigma| = 0"},
  };
  auto update = [](HomothetyPredicate& p, double v, std::size_t s) {
    if (v > p.max_value || (s == 0 && v >= p.max_value)) {
      p.max_value = v;
      p.witness = s;
    }
  };
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const SiteGeometry base(model, samples[s], kOrderCartanConnection);
    const SiteGeometry lift(lifted, samples[s], kOrderCartanConnection);
    ConformalDeltaJets d;
    fill_connection_deltas(base, sigma, d);
    update(out.predicates[0], max_abs(values(d.B_j)), s);
    update(out.predicates[1], max_abs(values(d.B)), s);
    update(out.predicates[2], max_abs_diff(values(lift.barthel()), values(base.barthel())), s);
    update(out.predicates[3],
           max_abs_diff(values(lift.cartan_h()), values(base.cartan_h())) +
               max_abs_diff(values(lift.cartan()), values(base.cartan())),
           s);
    double ds = 0.0;
    for (const Jet& j : d.sigma_lower) ds = std::max(ds, std::abs(j.value()));
    update(out.predicates[4], ds, s);
  }
  for (auto& p : out.predicates) p.holds = p.max_value <= tol.homothety;
  out.all_agree = true;
  for (const auto& p : out.predicates) out.all_agree = out.all_agree && p.holds == out.predicates[0].holds;
  out.homothetic = out.all_agree && out.predicates[0].holds;
  return out;
}

// ---------------------------------------------------------------------------

CheckResult ConformalityResult::to_check() const {
  CheckResult c;
  c.name = "conformality";
  c.anchor = "g, g~ conformal  <=>  d_J L~ / L~ = d_J L / L";
  c.samples = sigma_estimate.size();
  c.max_abs = max_residual;
  c.max_rel = max_residual;
  c.passed = conformal;
  c.details["max_fiber_variation"] = max_fiber_variation;
  if (witness) c.details["witness"] = {{"x", witness->x}, {"y", witness->y}};
  return c;
}

ConformalityResult conformality_test(const FinslerModel& a, const FinslerModel& b,
                                     const std::vector<SupportElement>& samples,
                                     const Tolerances& tol, int fiber_probes) {
  if (a.dim() != b.dim()) throw ConfigError("conformality test: model dimensions differ");
  const int n = a.dim();
  ConformalityResult out;
  double worst = 0.0;
  for (const auto& u : samples) {
    const SiteGeometry ga(a, u, 2), gb(b, u, 2);
    const auto ra = normalized_vertical_differential(ga);
    const auto rb = normalized_vertical_differential(gb);
    double r = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
      r = std::max(r, std::abs(ra[i] - rb[i]));
      scale = std::max({scale, std::abs(ra[i]), std::abs(rb[i])});
    }
    const double rel = r / std::max(1.0, scale);
    if (rel > worst) worst = rel;
    if (rel > tol.conformality && !out.witness) out.witness = u;

    const double sig = 0.5 * std::log(gb.energy().value() / ga.energy().value());
    out.base_points.push_back(u.x);
    out.sigma_estimate.push_back(sig);
    for (int k = 0; k < fiber_probes; ++k) {
      std::vector<double> y(n, 0.0);
      for (int i = 0; i < n; ++i) y[i] = std::cos(1.3 * (k + 1) * (i + 1)) + (i == k % n ? 1.0 : 0.0);
      const SupportElement v(u.x, y);
      const double sv = 0.5 * std::log(b.energy(v) / a.energy(v));
      out.max_fiber_variation = std::max(out.max_fiber_variation, std::abs(sv - sig));
    }
  }
  out.max_residual = worst;
  out.conformal = !out.witness && out.max_fiber_variation <= tol.conformality;
  return out;
}

}  // namespace finsler
