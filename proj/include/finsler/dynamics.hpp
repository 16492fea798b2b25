#pragma once

// Geodesics x'' + 2 G(x, x') = 0 and Jacobi fields D^2 xi/dt^2 + R(x', xi) x' = 0
// along them, integrated with fixed-step classical RK4. Covariant derivatives
// along a geodesic use the Cartan h-coefficients Gamma^h_jk(x, x') x'^k.

#include <iosfwd>
#include <string>
#include <vector>

#include "finsler/conformal.hpp"
#include "finsler/lagrangian.hpp"
#include "finsler/support.hpp"

namespace finsler {

struct GeodesicState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> y;
};

struct GeodesicTrajectory {
  std::vector<GeodesicState> states;
  double step = 0.0;
  /// Empty when the full span was integrated.
  std::string stop_reason;
  /// max |L(t) - L(0)|
  double length_drift = 0.0;
  bool complete() const { return stop_reason.empty(); }
};

struct GeodesicOptions {
  double t0 = 0.0;
  double t1 = 1.0;
  double step = 1e-3;
  double min_speed = 1e-8;
  /// Optional chart box; leaving it aborts the integration.
  const Box* chart = nullptr;
};

GeodesicTrajectory geodesic_integrate(const FinslerModel& model, std::vector<double> x0,
                                      std::vector<double> y0, const GeodesicOptions& opt);

struct JacobiState {
  double t = 0.0;
  std::vector<double> xi;
  std::vector<double> dxi;  // D xi / dt
};

struct JacobiTrajectory {
  std::vector<JacobiState> states;
  std::string stop_reason;
  bool complete() const { return stop_reason.empty(); }
};

/// Integrates the Jacobi equation along `geodesic`, which is first re-integrated
/// with the same step and rejected (finsler::Error) if it is not a geodesic of
/// `model` to within `geodesic_tol` (relative to the curve's scale).
JacobiTrajectory jacobi_integrate(const FinslerModel& model, const GeodesicTrajectory& geodesic,
                                  std::vector<double> xi0, std::vector<double> dxi0,
                                  double geodesic_tol = 1e-8);

struct GeodesicCorrespondence {
  /// max |B^h| along the curve (B(theta, theta) = -2 B^h).
  double max_B = 0.0;
  /// max |D~ theta / dt| along the curve, i.e. 2 |G~^h - G^h| for the lifted spray.
  double lifted_residual = 0.0;
  double tolerance = 0.0;
  bool consistent = false;
  CheckResult to_check() const;
};

GeodesicCorrespondence geodesic_correspondence(const FinslerModel& model,
                                               const ConformalFactor& sigma,
                                               const GeodesicTrajectory& geodesic,
                                               double tol = 1e-8);

struct JacobiCorrespondence {
  /// max |i_theta B| and max |H(theta, .) theta| along the curve.
  double max_i_theta_B = 0.0;
  double max_H_theta = 0.0;
  bool hypotheses_hold = false;
  /// max |xi~(t) - xi(t)| and |D xi~ - D xi| when the hypotheses hold.
  double max_difference = 0.0;
  double tolerance = 0.0;
  std::string note;
  CheckResult to_check() const;
};

JacobiCorrespondence jacobi_correspondence(const FinslerModel& model, const ConformalFactor& sigma,
                                           const GeodesicTrajectory& geodesic,
                                           const std::vector<double>& xi0,
                                           const std::vector<double>& dxi0,
                                           const Tolerances& tol = {});

void write_jsonl(std::ostream& os, const GeodesicTrajectory& g, const JacobiTrajectory* j = nullptr);
void write_csv(std::ostream& os, const GeodesicTrajectory& g, const JacobiTrajectory* j = nullptr);

}  // namespace finsler
