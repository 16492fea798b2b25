#include "finsler/geometry.hpp"

#include <Eigen/Dense>
#include <cstdlib>
#include <string>

#include "finsler/errors.hpp"

namespace finsler {

int default_jet_order() {
  static const int order = [] {
    const char* env = std::getenv("FINSLER_MAX_JET_ORDER");
    if (!env || !*env) return 6;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 2 || v > 12) {
      throw ConfigError("FINSLER_MAX_JET_ORDER must be an integer in [2, 12], got '" +
                        std::string(env) + "'");
    }
    return static_cast<int>(v);
  }();
  return order;
}

JetTensor zero_tensor(int n, int rank, const Jet& proto) {
  return JetTensor(n, rank, proto.zero_like());
}

JetTensor inverse_metric(const JetTensor& g, double* condition, double* min_eigenvalue) {
  const int n = g.dim();
  const Jet& proto = g(0, 0);
  const int order = proto.order();
  const auto& center = proto.center();

  Eigen::MatrixXd g0(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g0(i, j) = g(i, j).value();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g0, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(n - 1);
  if (min_eigenvalue) *min_eigenvalue = lo;
  if (!(lo > 0.0)) {
    throw DegenerateMetricError("metric tensor not positive definite (smallest eigenvalue " +
                                    std::to_string(lo) + ")",
                                lo);
  }
  if (condition) *condition = hi / lo;
  const Eigen::MatrixXd m0inv = g0.partialPivLu().inverse();

  // g = g0 + N with N vanishing at the center, so
  // g^-1 = sum_k (-g0^-1 N)^k g0^-1, truncated after `order` terms.
  JetTensor p(n, 2, proto.zero_like());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Jet s = proto.zero_like();
      for (int k = 0; k < n; ++k) {
        Jet nkj = g(k, j) - g0(k, j);
        s += m0inv(i, k) * nkj;
      }
      p(i, j) = s;
    }
  }
  JetTensor x(n, 2, proto.zero_like());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) x(i, j) = Jet::constant(m0inv(i, j), center, order);
  }
  for (int it = 0; it < order; ++it) {
    JetTensor next(n, 2, proto.zero_like());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Jet s = Jet::constant(m0inv(i, j), center, order);
        for (int k = 0; k < n; ++k) s -= p(i, k) * x(k, j);
        next(i, j) = s;
      }
    }
    x = std::move(next);
  }
  return x;
}

SiteGeometry::SiteGeometry(const FinslerModel& model, const SupportElement& u, int order)
    : SiteGeometry(model.energy_jet(u, order)) {}

SiteGeometry::SiteGeometry(const Jet& energy) : energy_(energy) {
  if (energy_.empty()) throw JetMismatchError("empty energy jet");
  if (energy_.order() < 2) throw JetOrderError("energy jet needs order >= 2 for the metric");
  n_ = energy_.nvars() / 2;
  build();
}

const JetTensor& SiteGeometry::need(const std::optional<JetTensor>& t, int order,
                                    const char* what) const {
  if (!t) {
    throw JetOrderError(std::string(what) + " needs energy jet order " + std::to_string(order) +
                        ", have " + std::to_string(energy_.order()));
  }
  return *t;
}

void SiteGeometry::build() {
  const int n = n_;
  const int K = energy_.order();
  const auto& center = energy_.center();
  for (int i = 0; i < n; ++i) {
    x_.push_back(Jet::variable(i, center, K));
    y_.push_back(Jet::variable(n + i, center, K));
  }
  for (int i = 0; i < n; ++i) y_lower_.push_back(vdot(energy_, i));

  g_ = JetTensor(n, 2, energy_.zero_like());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      g_(i, j) = vdot(y_lower_[i], j);
      g_(j, i) = g_(i, j);
    }
  }
  g_inv_ = inverse_metric(g_, &cond_, &min_eig_);
  if (K < 3) return;

  // C_ijk = 1/2 d g_ij / dy^k; symmetric, so compute i <= j <= k once.
  JetTensor cl(n, 3, energy_.zero_like());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        Jet c = 0.5 * vdot(g_(i, j), k);
        cl(i, j, k) = c;
        cl(i, k, j) = c;
        cl(j, i, k) = c;
        cl(j, k, i) = c;
        cl(k, i, j) = c;
        cl(k, j, i) = c;
      }
    }
  }
  JetTensor c(n, 3, energy_.zero_like());
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Jet s = energy_.zero_like();
        for (int l = 0; l < n; ++l) s += g_inv_(h, l) * cl(l, i, j);
        c(h, i, j) = s;
        c(h, j, i) = s;
      }
    }
  }
  cartan_lower_ = std::move(cl);
  cartan_ = std::move(c);

  // gamma^h_ij = 1/2 g^hl (d_i g_lj + d_j g_il - d_l g_ij)
  JetTensor dg(n, 3, energy_.zero_like());  // dg(l,j,i) = d_i g_lj
  for (int l = 0; l < n; ++l) {
    for (int j = l; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        dg(l, j, i) = partial(g_(l, j), i);
        dg(j, l, i) = dg(l, j, i);
      }
    }
  }
  JetTensor gam(n, 3, energy_.zero_like());
  JetTensor spray(n, 1, energy_.zero_like());
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Jet s = energy_.zero_like();
        for (int l = 0; l < n; ++l) s += g_inv_(h, l) * (dg(l, j, i) + dg(i, l, j) - dg(i, j, l));
        s *= 0.5;
        gam(h, i, j) = s;
        gam(h, j, i) = s;
      }
    }
    Jet gh = energy_.zero_like();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) gh += gam(h, i, j) * y_[i] * y_[j];
    }
    spray(h) = 0.5 * gh;
  }
  christoffel_ = std::move(gam);
  spray_ = std::move(spray);
  if (K < 4) return;

  JetTensor gi(n, 2, energy_.zero_like());
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) gi(h, i) = vdot((*spray_)(h), i);
  }
  barthel_ = std::move(gi);

  // Gamma^h_ij = 1/2 g^hl (delta_i g_lj + delta_j g_il - delta_l g_ij)
  JetTensor dd(n, 3, energy_.zero_like());  // dd(l,j,i) = delta_i g_lj
  for (int l = 0; l < n; ++l) {
    for (int j = l; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        dd(l, j, i) = delta(g_(l, j), i);
        dd(j, l, i) = dd(l, j, i);
      }
    }
  }
  JetTensor ch(n, 3, energy_.zero_like());
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Jet s = energy_.zero_like();
        for (int l = 0; l < n; ++l) s += g_inv_(h, l) * (dd(l, j, i) + dd(i, l, j) - dd(i, j, l));
        s *= 0.5;
        ch(h, i, j) = s;
        ch(h, j, i) = s;
      }
    }
  }
  cartan_h_ = std::move(ch);
  if (K < 5) return;

  JetTensor gij(n, 3, energy_.zero_like());
  for (int h = 0; h < n; ++h) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) gij(h, i, j) = vdot((*barthel_)(h, i), j);
    }
  }
  berwald_ = std::move(gij);
}

Jet SiteGeometry::delta(const Jet& f, int k) const {
  const JetTensor& gi = barthel();
  Jet out = partial(f, k);
  for (int m = 0; m < n_; ++m) out -= gi(m, k) * vdot(f, m);
  return out;
}

JetTensor SiteGeometry::covariant(const JetTensor& t, std::span<const Variance> variance,
                                  Derivative kind) const {
  const int n = n_;
  const int r = t.rank();
  if (static_cast<int>(variance.size()) != r) {
    throw std::invalid_argument("covariant derivative: variance list does not match rank");
  }
  const JetTensor& coef = kind == Derivative::h_cartan   ? cartan_h()
                          : kind == Derivative::v_cartan ? cartan()
                                                         : berwald();
  JetTensor out(n, r + 1, t.data()[0].zero_like());
  std::vector<int> idx(r + 1), src(r);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    std::vector<int> base = t.index_of(flat);
    for (int k = 0; k < n; ++k) {
      Jet v = kind == Derivative::v_cartan ? vdot(t.data()[flat], k) : delta(t.data()[flat], k);
      for (int a = 0; a < r; ++a) {
        src = base;
        for (int m = 0; m < n; ++m) {
          src[a] = m;
          if (variance[a] == Variance::upper) {
            v += coef(base[a], m, k) * t.at(src);
          } else {
            v -= coef(m, base[a], k) * t.at(src);
          }
        }
      }
      std::copy(base.begin(), base.end(), idx.begin());
      idx[r] = k;
      out.at(idx) = std::move(v);
    }
  }
  return out;
}

JetTensor SiteGeometry::barthel_curvature() const {
  const JetTensor& gi = barthel();
  JetTensor out(n_, 3, energy_.zero_like());
  for (int h = 0; h < n_; ++h) {
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        Jet r = delta(gi(h, i), j) - delta(gi(h, j), i);
        out(h, j, i) = -r;
        out(h, i, j) = std::move(r);
      }
    }
  }
  for (int h = 0; h < n_; ++h) {
    for (int i = 0; i < n_; ++i) out(h, i, i) = energy_.zero_like().truncated(std::max(0, order() - 5));
  }
  return out;
}

}  // namespace finsler
