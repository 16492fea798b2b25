#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace finsler {

/// A point (x, y) of the slit tangent bundle. Every tensor is evaluated at one.
struct SupportElement {
  std::vector<double> x;
  std::vector<double> y;

  SupportElement() = default;
  SupportElement(std::vector<double> base, std::vector<double> fiber);

  int dim() const { return static_cast<int>(x.size()); }
  double fiber_norm() const;

  friend bool operator==(const SupportElement&, const SupportElement&) = default;
};

/// Axis-aligned box in base coordinates.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> x) const;
};

/// Random support elements: base points uniform in `box`, fiber directions
/// uniform on the unit sphere scaled by a radius uniform in [rmin, rmax].
struct SampleSpec {
  std::size_t count = 50;
  std::uint64_t seed = 42;
  Box box;
  double rmin = 0.5;
  double rmax = 2.0;
};

std::vector<SupportElement> draw_samples(const SampleSpec& spec);

}  // namespace finsler
