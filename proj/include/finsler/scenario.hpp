#pragma once

// JSON scenario files: model, conformal factor, samples, checks and tolerance
// overrides. docs/schema.json describes the format.

#include <optional>
#include <string>
#include <vector>

#include "finsler/conformal.hpp"
#include "finsler/dynamics.hpp"
#include "finsler/lagrangian.hpp"
#include "finsler/report.hpp"
#include "finsler/support.hpp"

namespace finsler {

inline constexpr const char* kEngineVersion = "1.0.0";

enum class CheckKind {
  validate,
  transform_laws,
  invariants,
  homothety,
  conformality,
  geodesic,
  jacobi,
  correspondence,
};

const char* check_kind_name(CheckKind k);

struct CurveSpec {
  std::vector<double> x0, y0;
  double t0 = 0.0;
  double t1 = 1.0;
  double step = 1e-2;
  std::optional<Box> chart;
  std::vector<double> xi0, dxi0;  // empty when not given
};

struct Scenario {
  std::string name;
  FinslerModel model;
  ConformalFactor sigma;
  SampleSpec samples;
  std::vector<CheckKind> checks;
  Tolerances tolerances;
  std::optional<CurveSpec> curve;
  /// Second model for the conformality check; the conformal lift of `model`
  /// by `sigma` when absent.
  std::optional<FinslerModel> conformality_target;
  bool conformality_expected = true;
};

/// Throws ConfigError naming the offending field path (e.g. "model.a[1][0]").
Scenario parse_scenario(const nlohmann::json& config);
Scenario load_scenario(const std::string& path);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
  /// Restrict to these checks (in this order) instead of the scenario's list.
  std::optional<std::vector<CheckKind>> only;
};

/// Runs every enabled check in list order. Evaluation errors propagate.
VerificationReport run_scenario(const Scenario& scenario, const RunOptions& opt = {});

/// The report environment block: engine version, jet order and conventions.
nlohmann::json report_environment(const VerificationReport& report);

}  // namespace finsler
