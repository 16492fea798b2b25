#include "finsler/support.hpp"

#include <cmath>
#include <random>
#include <string>

#include "finsler/errors.hpp"

namespace finsler {

SupportElement::SupportElement(std::vector<double> base, std::vector<double> fiber)
    : x(std::move(base)), y(std::move(fiber)) {
  if (x.size() != y.size()) {
    throw Error("support element: base and fiber dimensions differ");
  }
  if (fiber_norm() <= 0.0) {
    throw Error("support element: fiber vector must be nonzero");
  }
}

double SupportElement::fiber_norm() const {
  double s = 0.0;
  for (double v : y) s += v * v;
  return std::sqrt(s);
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  }
  return true;
}

std::vector<SupportElement> draw_samples(const SampleSpec& spec) {
  const int n = spec.box.dim();
  if (n < 1 || spec.box.hi.size() != spec.box.lo.size()) {
    throw ConfigError("sample box must have matching lo/hi of dimension >= 1");
  }
  if (!(spec.rmin > 0.0) || spec.rmax < spec.rmin) {
    throw ConfigError("fiber radii must satisfy 0 < rmin <= rmax");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<SupportElement> out;
  out.reserve(spec.count);
  while (out.size() < spec.count) {
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = spec.box.lo[i] + (spec.box.hi[i] - spec.box.lo[i]) * unit(rng);
    }
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] = normal(rng);
      norm += y[i] * y[i];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    const double r = spec.rmin + (spec.rmax - spec.rmin) * unit(rng);
    for (double& v : y) v *= r / norm;
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

}  // namespace finsler
