#include "finsler/tensor.hpp"

namespace finsler {

namespace {

double swap_defect(const RealTensor& t, int a, int b, double sign) {
  double m = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<int> idx = t.index_of(k);
    std::swap(idx[a], idx[b]);
    m = std::max(m, std::abs(t.data()[k] - sign * t.at(idx)));
  }
  return m;
}

}  // namespace

double TensorBlock::asymmetry(int slot_a, int slot_b) const {
  return swap_defect(components, slot_a, slot_b, 1.0);
}

double TensorBlock::antisymmetry_defect(int slot_a, int slot_b) const {
  return swap_defect(components, slot_a, slot_b, -1.0);
}

}  // namespace finsler
