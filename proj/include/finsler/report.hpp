#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

namespace finsler {

/// Running maxima of a residual over samples. The relative residual divides
/// the absolute one by max(1, scale), where scale is the magnitude of the
/// quantity being compared, so that near-zero blocks are judged absolutely.
struct Residual {
  double max_abs = 0.0;
  double max_rel = 0.0;
  std::size_t samples = 0;
  std::size_t worst_sample = 0;

  void add(double abs_residual, double scale, std::size_t sample_index);
  void merge(const Residual& o);
};

struct CheckResult {
  std::string name;
  /// Statement being checked, written as a formula.
  std::string anchor;
  std::size_t samples = 0;
  std::size_t excluded = 0;
  double max_abs = 0.0;
  double max_rel = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
  nlohmann::json details = nlohmann::json::object();

  /// Fill samples/max_abs/max_rel from `r` and decide pass on max_rel.
  void take(const Residual& r, double tol);
};

struct VerificationReport {
  std::string title;
  std::vector<CheckResult> checks;
  nlohmann::json details = nlohmann::json::object();

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
  void append(const VerificationReport& o);
  nlohmann::json to_json() const;
};

nlohmann::json to_json(const CheckResult& c);

}  // namespace finsler
