#include "finsler/dynamics.hpp"

#include <cmath>
#include <ostream>

#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/geometry.hpp"

namespace finsler {

namespace {

using State = std::vector<double>;

template <class F>
State rk4_step(F&& f, double t, const State& z, double h) {
  const std::size_t m = z.size();
  State tmp(m);
  const State k1 = f(t, z);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
  const State k2 = f(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
  const State k3 = f(t + 0.5 * h, tmp);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = z[i] + h * k3[i];
  const State k4 = f(t + h, tmp);
  State out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = z[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

// x' = y, y' = -2 G(x, y), written into out[0..2n).
void geodesic_rhs(const FinslerModel& model, int n, const State& z, State& out) {
  SupportElement u(State(z.begin(), z.begin() + n), State(z.begin() + n, z.begin() + 2 * n));
  SiteGeometry geo(model, u, kOrderSpray);
  for (int i = 0; i < n; ++i) {
    out[i] = z[n + i];
    out[n + i] = -2.0 * geo.spray()(i).value();
  }
}

double norm(const double* v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

bool finite(const State& z) {
  for (double v : z) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

int step_count(double t0, double t1, double step) {
  if (!(step > 0.0)) throw ConfigError("integration step must be positive");
  if (!(t1 > t0)) throw ConfigError("integration span must satisfy t1 > t0");
  return static_cast<int>(std::ceil((t1 - t0) / step - 1e-9));
}

}  // namespace

GeodesicTrajectory geodesic_integrate(const FinslerModel& model, std::vector<double> x0,
                                      std::vector<double> y0, const GeodesicOptions& opt) {
  const int n = model.dim();
  if (static_cast<int>(x0.size()) != n || static_cast<int>(y0.size()) != n) {
    throw ConfigError("geodesic initial data must have dimension " + std::to_string(n));
  }
  const int steps = step_count(opt.t0, opt.t1, opt.step);
  const double h = (opt.t1 - opt.t0) / steps;

  GeodesicTrajectory traj;
  traj.step = h;
  State z(2 * n);
  std::copy(x0.begin(), x0.end(), z.begin());
  std::copy(y0.begin(), y0.end(), z.begin() + n);
  if (norm(z.data() + n, n) < opt.min_speed) {
    traj.stop_reason = "initial velocity below minimum speed";
    return traj;
  }
  auto length = [&](const State& s) {
    return std::sqrt(2.0 * model.energy(SupportElement(State(s.begin(), s.begin() + n),
                                                       State(s.begin() + n, s.end()))));
  };
  const double l0 = length(z);
  traj.states.push_back({opt.t0, x0, y0});

  auto f = [&](double, const State& s) {
    State out(2 * n);
    geodesic_rhs(model, n, s, out);
    return out;
  };
  double t = opt.t0;
  for (int k = 0; k < steps; ++k) {
    State next;
    try {
      next = rk4_step(f, t, z, h);
    } catch (const Error& e) {
      traj.stop_reason = std::string("evaluation failed at t = ") + std::to_string(t) + ": " + e.what();
      break;
    }
    t = opt.t0 + (k + 1) * h;
    if (!finite(next)) {
      traj.stop_reason = "non-finite state at t = " + std::to_string(t);
      break;
    }
    if (norm(next.data() + n, n) < opt.min_speed) {
      traj.stop_reason = "velocity fell below minimum speed at t = " + std::to_string(t);
      break;
    }
    if (opt.chart && !opt.chart->contains(std::span<const double>(next.data(), n))) {
      traj.stop_reason = "left chart box at t = " + std::to_string(t);
      break;
    }
    z = std::move(next);
    traj.states.push_back({t, State(z.begin(), z.begin() + n), State(z.begin() + n, z.end())});
    traj.length_drift = std::max(traj.length_drift, std::abs(length(z) - l0));
  }
  return traj;
}

JacobiTrajectory jacobi_integrate(const FinslerModel& model, const GeodesicTrajectory& geodesic,
                                  std::vector<double> xi0, std::vector<double> dxi0,
                                  double geodesic_tol) {
  const int n = model.dim();
  if (geodesic.states.empty()) throw Error("jacobi: empty geodesic");
  if (static_cast<int>(xi0.size()) != n || static_cast<int>(dxi0.size()) != n) {
    throw ConfigError("jacobi initial data must have dimension " + std::to_string(n));
  }
  const double h = geodesic.step;

  // State (x, y, xi, eta) with eta = D xi / dt:
  //   xi'  = eta - Gamma^h_jk xi^j y^k
  //   eta' = -R^h_kij y^k y^i xi^j - Gamma^h_jk eta^j y^k
  auto f = [&](double, const State& z) {
    State out(4 * n, 0.0);
    SupportElement u(State(z.begin(), z.begin() + n), State(z.begin() + n, z.begin() + 2 * n));
    SiteGeometry geo(model, u, kOrderCartanCurvature);
    const RealTensor gam = values(geo.cartan_h());
    const RealTensor r = values(connection_curvature(geo, geo.cartan_h(), &geo.cartan()).R);
    const double* y = z.data() + n;
    const double* xi = z.data() + 2 * n;
    const double* eta = z.data() + 3 * n;
    for (int a = 0; a < n; ++a) {
      out[a] = y[a];
      out[n + a] = -2.0 * geo.spray()(a).value();
      double dxi = eta[a], deta = 0.0;
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          dxi -= gam(a, j, k) * xi[j] * y[k];
          deta -= gam(a, j, k) * eta[j] * y[k];
          for (int i = 0; i < n; ++i) deta -= r(a, k, i, j) * y[k] * y[i] * xi[j];
        }
      }
      out[2 * n + a] = dxi;
      out[3 * n + a] = deta;
    }
    return out;
  };

  State z(4 * n);
  const auto& s0 = geodesic.states.front();
  std::copy(s0.x.begin(), s0.x.end(), z.begin());
  std::copy(s0.y.begin(), s0.y.end(), z.begin() + n);
  std::copy(xi0.begin(), xi0.end(), z.begin() + 2 * n);
  std::copy(dxi0.begin(), dxi0.end(), z.begin() + 3 * n);

  JacobiTrajectory out;
  out.states.push_back({s0.t, xi0, dxi0});
  for (std::size_t k = 1; k < geodesic.states.size(); ++k) {
    const double t = geodesic.states[k - 1].t;
    State next;
    try {
      next = rk4_step(f, t, z, h);
    } catch (const Error& e) {
      out.stop_reason = std::string("evaluation failed at t = ") + std::to_string(t) + ": " + e.what();
      return out;
    }
    // The supplied curve must be the geodesic through its initial point.
    const auto& ref = geodesic.states[k];
    double dev = 0.0, scale = 1.0;
    for (int i = 0; i < n; ++i) {
      dev = std::max({dev, std::abs(next[i] - ref.x[i]), std::abs(next[n + i] - ref.y[i])});
      scale = std::max({scale, std::abs(ref.x[i]), std::abs(ref.y[i])});
    }
    if (dev > geodesic_tol * scale) {
      throw Error("jacobi: curve is not a geodesic of the model (deviation " + std::to_string(dev) +
                  " at t = " + std::to_string(ref.t) + ")");
    }
    if (!finite(next)) {
      out.stop_reason = "non-finite state at t = " + std::to_string(ref.t);
      return out;
    }
    z = std::move(next);
    out.states.push_back({ref.t, State(z.begin() + 2 * n, z.begin() + 3 * n),
                          State(z.begin() + 3 * n, z.end())});
  }
  if (!geodesic.complete()) out.stop_reason = "geodesic truncated: " + geodesic.stop_reason;
  return out;
}

// ---------------------------------------------------------------------------

CheckResult GeodesicCorrespondence::to_check() const {
  CheckResult c;
  c.name = "geodesic_correspondence";
  c.anchor = "a geodesic of L stays a geodesic of L~  <=>  B(theta, theta) = 0";
  c.max_abs = std::abs(max_B - 0.5 * lifted_residual);
  c.max_rel = c.max_abs / std::max(1.0, max_B);
  c.tolerance = tolerance;
  c.passed = consistent;
  c.details["max_B"] = max_B;
  c.details["lifted_geodesic_residual"] = lifted_residual;
  c.note = max_B > tolerance ? "B(theta, theta) != 0: curve is not a lifted geodesic"
                             : "B(theta, theta) = 0: curve is a lifted geodesic";
  return c;
}

GeodesicCorrespondence geodesic_correspondence(const FinslerModel& model,
                                               const ConformalFactor& sigma,
                                               const GeodesicTrajectory& geodesic, double tol) {
  const FinslerModel lifted = conformal_lift(model, sigma);
  const int n = model.dim();
  GeodesicCorrespondence out;
  out.tolerance = tol;
  for (const auto& s : geodesic.states) {
    const SupportElement u(s.x, s.y);
    const SiteGeometry base(model, u, kOrderCartanConnection);
    const SiteGeometry lift(lifted, u, kOrderSpray);
    const ConformalDeltaJets d = connection_delta_jets(base, sigma);
    for (int h = 0; h < n; ++h) {
      out.max_B = std::max(out.max_B, std::abs(d.B(h).value()));
      // Along the base geodesic y' = -2 G, so D~ theta / dt = 2 (G~ - G).
      const double r = 2.0 * (lift.spray()(h).value() - base.spray()(h).value());
      out.lifted_residual = std::max(out.lifted_residual, std::abs(r));
    }
  }
  out.consistent = (out.max_B > tol) == (out.lifted_residual > tol);
  return out;
}

CheckResult JacobiCorrespondence::to_check() const {
  CheckResult c;
  c.name = "jacobi_correspondence";
  c.anchor = "H(theta, X) theta = 0 and i_theta B = 0  =>  Jacobi fields of L and L~ coincide";
  c.max_abs = max_difference;
  c.max_rel = max_difference;
  c.tolerance = tolerance;
  c.passed = !hypotheses_hold || max_difference <= tolerance;
  c.details["max_i_theta_B"] = max_i_theta_B;
  c.details["max_H_theta"] = max_H_theta;
  c.details["hypotheses_hold"] = hypotheses_hold;
  c.note = note;
  return c;
}

JacobiCorrespondence jacobi_correspondence(const FinslerModel& model, const ConformalFactor& sigma,
                                           const GeodesicTrajectory& geodesic,
                                           const std::vector<double>& xi0,
                                           const std::vector<double>& dxi0,
                                           const Tolerances& tol) {
  const FinslerModel lifted = conformal_lift(model, sigma);
  const int n = model.dim();
  JacobiCorrespondence out;
  out.tolerance = tol.jacobi;
  const std::size_t stride = std::max<std::size_t>(1, geodesic.states.size() / 200);
  for (std::size_t k = 0; k < geodesic.states.size(); k += stride) {
    const auto& s = geodesic.states[k];
    const SupportElement u(s.x, s.y);
    const SiteGeometry base(model, u, kOrderBerwaldCurvature);
    const ConformalDeltaJets d = conformal_delta_jets(base, sigma);
    const RealTensor B = values(d.B), Bj = values(d.B_j), C = values(base.cartan());
    const RealTensor H = values(d.H);
    for (int h = 0; h < n; ++h) {
      for (int j = 0; j < n; ++j) {
        // i_theta B has components -(B^h_j + 2 C^h_jm B^m).
        double ib = Bj(h, j);
        for (int m = 0; m < n; ++m) ib += 2.0 * C(h, j, m) * B(m);
        out.max_i_theta_B = std::max(out.max_i_theta_B, std::abs(ib));
        double ht = 0.0;
        for (int kk = 0; kk < n; ++kk) {
          for (int i = 0; i < n; ++i) ht += H(h, kk, i, j) * s.y[kk] * s.y[i];
        }
        out.max_H_theta = std::max(out.max_H_theta, std::abs(ht));
      }
    }
  }
  out.hypotheses_hold = out.max_i_theta_B <= tol.hypothesis && out.max_H_theta <= tol.hypothesis;
  if (!out.hypotheses_hold) {
    out.note = "hypotheses violated, equivalence not asserted";
    return out;
  }
  const JacobiTrajectory a = jacobi_integrate(model, geodesic, xi0, dxi0, tol.geodesic);
  const JacobiTrajectory b = jacobi_integrate(lifted, geodesic, xi0, dxi0, tol.geodesic);
  const std::size_t m = std::min(a.states.size(), b.states.size());
  for (std::size_t k = 0; k < m; ++k) {
    for (int i = 0; i < n; ++i) {
      out.max_difference = std::max({out.max_difference,
                                     std::abs(a.states[k].xi[i] - b.states[k].xi[i]),
                                     std::abs(a.states[k].dxi[i] - b.states[k].dxi[i])});
    }
  }
  out.note = "hypotheses hold; base and lifted Jacobi fields compared";
  return out;
}

// ---------------------------------------------------------------------------

void write_jsonl(std::ostream& os, const GeodesicTrajectory& g, const JacobiTrajectory* j) {
  for (std::size_t k = 0; k < g.states.size(); ++k) {
    nlohmann::json line = {{"t", g.states[k].t}, {"x", g.states[k].x}, {"y", g.states[k].y}};
    if (j && k < j->states.size()) {
      line["xi"] = j->states[k].xi;
      line["dxi"] = j->states[k].dxi;
    }
    os << line.dump() << '\n';
  }
}

void write_csv(std::ostream& os, const GeodesicTrajectory& g, const JacobiTrajectory* j) {
  if (g.states.empty()) return;
  const std::size_t n = g.states.front().x.size();
  os << 't';
  for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) os << ",y" << i;
  if (j) {
    for (std::size_t i = 1; i <= n; ++i) os << ",xi" << i;
    for (std::size_t i = 1; i <= n; ++i) os << ",dxi" << i;
  }
  os << '\n';
  os.precision(17);
  for (std::size_t k = 0; k < g.states.size(); ++k) {
    os << g.states[k].t;
    for (double v : g.states[k].x) os << ',' << v;
    for (double v : g.states[k].y) os << ',' << v;
    if (j && k < j->states.size()) {
      for (double v : j->states[k].xi) os << ',' << v;
      for (double v : j->states[k].dxi) os << ',' << v;
    }
    os << '\n';
  }
}

}  // namespace finsler
