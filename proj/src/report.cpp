#include "finsler/report.hpp"

#include <algorithm>
#include <cmath>

namespace finsler {

void Residual::add(double abs_residual, double scale, std::size_t sample_index) {
  if (std::isnan(abs_residual)) abs_residual = INFINITY;
  const double rel = abs_residual / std::max(1.0, std::abs(scale));
  if (samples == 0 || rel > max_rel) worst_sample = sample_index;
  max_abs = std::max(max_abs, abs_residual);
  max_rel = std::max(max_rel, rel);
  ++samples;
}

void Residual::merge(const Residual& o) {
  if (o.max_rel > max_rel) worst_sample = o.worst_sample;
  max_abs = std::max(max_abs, o.max_abs);
  max_rel = std::max(max_rel, o.max_rel);
  samples += o.samples;
}

void CheckResult::take(const Residual& r, double tol) {
  samples = r.samples;
  max_abs = r.max_abs;
  max_rel = r.max_rel;
  tolerance = tol;
  passed = r.max_rel <= tol;
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void VerificationReport::append(const VerificationReport& o) {
  checks.insert(checks.end(), o.checks.begin(), o.checks.end());
}

nlohmann::json to_json(const CheckResult& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["anchor"] = c.anchor;
  j["samples"] = c.samples;
  if (c.excluded) j["excluded"] = c.excluded;
  j["max_abs"] = c.max_abs;
  j["max_rel"] = c.max_rel;
  j["tolerance"] = c.tolerance;
  j["passed"] = c.passed;
  if (!c.note.empty()) j["note"] = c.note;
  if (!c.details.empty()) j["details"] = c.details;
  return j;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["title"] = title;
  j["passed"] = passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) j["checks"].push_back(finsler::to_json(c));
  if (!details.empty()) j["details"] = details;
  return j;
}

}  // namespace finsler
