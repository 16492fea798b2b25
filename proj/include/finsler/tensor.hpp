#pragma once

// Dense n^k component arrays. Component (i1, ..., ik) is stored row-major,
// first index slowest.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/support.hpp"

namespace finsler {

enum class Variance { upper, lower };

template <class T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int rank, T fill = T{}) : n_(n), rank_(rank) {
    std::size_t size = 1;
    for (int r = 0; r < rank; ++r) size *= static_cast<std::size_t>(n);
    d_.assign(size, fill);
  }

  int dim() const { return n_; }
  int rank() const { return rank_; }
  std::size_t size() const { return d_.size(); }
  bool empty() const { return d_.empty(); }

  template <class... I>
  T& operator()(I... idx) {
    return d_[offset(idx...)];
  }
  template <class... I>
  const T& operator()(I... idx) const {
    return d_[offset(idx...)];
  }

  T& at(std::span<const int> idx) { return d_[offset_span(idx)]; }
  const T& at(std::span<const int> idx) const { return d_[offset_span(idx)]; }

  std::vector<T>& data() { return d_; }
  const std::vector<T>& data() const { return d_; }

  /// Multi-index of flat position k.
  std::vector<int> index_of(std::size_t k) const {
    std::vector<int> idx(rank_);
    for (int r = rank_ - 1; r >= 0; --r) {
      idx[r] = static_cast<int>(k % n_);
      k /= n_;
    }
    return idx;
  }

  template <class F>
  auto map(F f) const -> Tensor<decltype(f(std::declval<const T&>()))> {
    using U = decltype(f(std::declval<const T&>()));
    Tensor<U> out;
    out.n_ = n_;
    out.rank_ = rank_;
    out.d_.reserve(d_.size());
    for (const T& v : d_) out.d_.push_back(f(v));
    return out;
  }

 private:
  template <class... I>
  std::size_t offset(I... idx) const {
    assert(static_cast<int>(sizeof...(I)) == rank_);
    std::size_t k = 0;
    ((k = k * n_ + static_cast<std::size_t>(idx)), ...);
    return k;
  }
  std::size_t offset_span(std::span<const int> idx) const {
    std::size_t k = 0;
    for (int i : idx) k = k * n_ + static_cast<std::size_t>(i);
    return k;
  }

  int n_ = 0;
  int rank_ = 0;
  std::vector<T> d_;

  template <class U>
  friend class Tensor;
};

using JetTensor = Tensor<Jet>;
using RealTensor = Tensor<double>;

inline RealTensor values(const JetTensor& t) {
  return t.map([](const Jet& j) { return j.value(); });
}

inline double max_abs(const RealTensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const RealTensor& a, const RealTensor& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

inline RealTensor operator-(const RealTensor& a, const RealTensor& b) {
  RealTensor out = a;
  for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] -= b.data()[k];
  return out;
}

inline RealTensor operator+(const RealTensor& a, const RealTensor& b) {
  RealTensor out = a;
  for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] += b.data()[k];
  return out;
}

inline RealTensor operator*(double s, const RealTensor& a) {
  RealTensor out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

/// Components at one support element together with their index variance.
struct TensorBlock {
  std::string name;
  std::vector<Variance> variance;
  RealTensor components;
  SupportElement site;

  int rank() const { return components.rank(); }
  /// max |T(..a..b..) - T(..b..a..)| over all components.
  double asymmetry(int slot_a, int slot_b) const;
  /// max |T(..a..b..) + T(..b..a..)| over all components.
  double antisymmetry_defect(int slot_a, int slot_b) const;
};

}  // namespace finsler
