// finsler: run verification scenarios and integrate geodesics / Jacobi fields.
//
//   finsler check      --config s.json [--out report.json] [--seed N] [--tol-scale s]
//   finsler invariants --config s.json [...]
//   finsler geodesic   --config s.json [--out traj.jsonl] [--format jsonl|csv]
//   finsler jacobi     --config s.json [--out traj.jsonl] [--format jsonl|csv]
//
// Exit codes: 0 all checks pass, 1 configuration or evaluation error,
// 2 at least one check failed.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "finsler/errors.hpp"
#include "finsler/scenario.hpp"

namespace {

using namespace finsler;

struct Args {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
  std::string format = "jsonl";
};

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream os;
  os << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot write");
  out << text;
}

int run_report(const Args& a, std::optional<std::vector<CheckKind>> only) {
  const Scenario sc = load_scenario(a.config);
  RunOptions opt;
  opt.seed = a.seed;
  opt.tol_scale = a.tol_scale;
  opt.only = std::move(only);
  const VerificationReport report = run_scenario(sc, opt);

  nlohmann::json j = report.to_json();
  j["generated_at"] = timestamp();
  emit(a.out, j.dump(2) + "\n");

  std::size_t failed = 0;
  for (const auto& c : report.checks) {
    if (!c.passed) {
      ++failed;
      std::cerr << "FAIL " << c.name << ": max_rel " << c.max_rel << " > tol " << c.tolerance;
      if (!c.note.empty()) std::cerr << " (" << c.note << ")";
      std::cerr << "\n";
    }
  }
  std::cerr << report.checks.size() - failed << "/" << report.checks.size() << " checks passed\n";
  return report.passed() ? 0 : 2;
}

int run_trajectory(const Args& a, bool jacobi) {
  const Scenario sc = load_scenario(a.config);
  if (!sc.curve) throw ConfigError(a.config + ": geodesic: missing 'geodesic' block");
  const CurveSpec& cv = *sc.curve;
  if (jacobi && (cv.xi0.empty() || cv.dxi0.empty())) {
    throw ConfigError(a.config + ": geodesic: jacobi requires xi0 and dxi0");
  }
  GeodesicOptions o;
  o.t0 = cv.t0;
  o.t1 = cv.t1;
  o.step = cv.step;
  o.chart = cv.chart ? &*cv.chart : nullptr;
  const GeodesicTrajectory g = geodesic_integrate(sc.model, cv.x0, cv.y0, o);
  std::optional<JacobiTrajectory> j;
  if (jacobi) j = jacobi_integrate(sc.model, g, cv.xi0, cv.dxi0, sc.tolerances.geodesic);

  std::ostringstream os;
  os.precision(17);
  if (a.format == "csv") {
    write_csv(os, g, j ? &*j : nullptr);
  } else {
    write_jsonl(os, g, j ? &*j : nullptr);
  }
  emit(a.out, os.str());
  if (!g.complete()) std::cerr << "geodesic truncated: " << g.stop_reason << "\n";
  if (j && !j->complete()) std::cerr << "jacobi truncated: " << j->stop_reason << "\n";
  std::cerr << "length drift " << g.length_drift << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler geometry engine: conformal change verification and dynamics"};
  app.require_subcommand(1);
  Args args;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output file (default stdout)");
  };
  auto report_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", args.seed, "override the scenario's sample seed");
    sub->add_option("--tol-scale", args.tol_scale, "multiply every tolerance")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* check = app.add_subcommand("check", "run every check listed in the scenario");
  common(check);
  report_flags(check);
  CLI::App* inv = app.add_subcommand("invariants", "run the conformal invariant suite only");
  common(inv);
  report_flags(inv);
  CLI::App* geo = app.add_subcommand("geodesic", "integrate the scenario's geodesic");
  common(geo);
  geo->add_option("--format", args.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  CLI::App* jac = app.add_subcommand("jacobi", "integrate a Jacobi field along the geodesic");
  common(jac);
  jac->add_option("--format", args.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (check->parsed()) return run_report(args, std::nullopt);
    if (inv->parsed()) return run_report(args, std::vector<CheckKind>{CheckKind::invariants});
    if (geo->parsed()) return run_trajectory(args, false);
    if (jac->parsed()) return run_trajectory(args, true);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
