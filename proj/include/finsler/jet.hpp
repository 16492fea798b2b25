#pragma once

// Truncated multivariate Taylor arithmetic over the 2n coordinates
// (x^1..x^n, y^1..y^n) of the slit tangent bundle.
//
// Coefficient convention: a jet stores raw partial derivatives, i.e. the
// coefficient for multi-index a is d^|a| f / dz^a evaluated at the center,
// with no factorial scaling. Products use the Leibniz weights
// prod_v C(a_v, b_v) so the convention is preserved by every operation.
//
// Variables are numbered 0..n-1 for x and n..2n-1 for y.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "finsler/support.hpp"

namespace finsler {

/// Per-variable differentiation orders. Total order is the sum of entries.
struct MultiIndex {
  std::vector<int> orders;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> o) : orders(std::move(o)) {}

  int total() const;
  std::string str() const;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// Monomial enumeration and product/derivative tables for one (nvars, order).
/// Monomials are graded: every monomial of degree < d precedes those of
/// degree d, so a lower-order layout is a prefix of a higher-order one.
/// Layouts are created once and never destroyed.
class JetLayout {
 public:
  struct ProductTerm {
    std::uint32_t a;
    std::uint32_t b;
    std::uint32_t out;
    double weight;
  };

  static const JetLayout& get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  std::size_t size() const { return monomials_.size(); }
  /// Number of monomials of total degree <= d.
  std::size_t prefix(int d) const { return prefix_[d]; }

  const MultiIndex& monomial(std::size_t k) const { return monomials_[k]; }
  /// Position of `m`; throws std::out_of_range for unknown or too-deep indices.
  std::size_t position(const MultiIndex& m) const;

  /// Sorted by `out`; entries with out < prefix(d) form a prefix of the span.
  std::span<const ProductTerm> products() const { return products_; }
  /// Number of product entries contributing to outputs of degree <= d.
  std::size_t products_up_to(int d) const { return product_prefix_[d]; }

  /// For the layout of order-1: source positions in this layout for d/dz_var.
  std::span<const std::uint32_t> derivative_sources(int var) const {
    return derivative_sources_[var];
  }

 private:
  JetLayout(int nvars, int order);

  int nvars_;
  int order_;
  std::vector<MultiIndex> monomials_;
  std::vector<std::size_t> prefix_;
  std::vector<ProductTerm> products_;
  std::vector<std::size_t> product_prefix_;
  std::vector<std::vector<std::uint32_t>> derivative_sources_;
  std::map<std::vector<int>, std::size_t> index_;
  std::vector<const JetLayout*> siblings_;  // layouts of order 0..order_

  friend class Jet;
};

/// All mixed partial derivatives of a scalar field at a support element, up to
/// a fixed total order. Jets are values; combining jets with different centers
/// or variable counts throws JetMismatchError, combining jets of different
/// orders truncates to the smaller order.
class Jet {
 public:
  using Center = std::shared_ptr<const SupportElement>;

  Jet() = default;

  static Jet constant(double value, Center center, int order);
  /// The coordinate function z_var (x^i for var < n, y^(var-n) otherwise).
  static Jet variable(int var, Center center, int order);

  bool empty() const { return layout_ == nullptr; }
  int nvars() const { return layout_->nvars(); }
  int order() const { return layout_->order(); }
  const Center& center() const { return center_; }
  const JetLayout& layout() const { return *layout_; }

  double value() const { return c_[0]; }
  /// Raw partial derivative for `m`; throws JetOrderError beyond order().
  double partial(const MultiIndex& m) const;
  std::span<const double> coefficients() const { return c_; }

  /// d/dz_var, one order lower. Throws JetOrderError on an order-0 jet.
  Jet derivative(int var) const;
  Jet truncated(int order) const;
  Jet zero_like() const { return constant(0.0, center_, order()); }
  bool is_finite() const;
  /// First non-finite coefficient's multi-index, or nullptr.
  const MultiIndex* first_non_finite() const;

  Jet reciprocal() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o) { return *this *= o.reciprocal(); }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s);
  Jet& operator/=(double s) { return *this *= 1.0 / s; }

  friend Jet operator-(Jet a);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(double s, const Jet& a) { return a.reciprocal() * s; }

  /// f(a) for a univariate f given its Taylor coefficients f^(k)(a0)/k! at
  /// a0 = value(); `taylor` must hold order()+1 entries.
  Jet compose(std::span<const double> taylor) const;

 private:
  Jet(const JetLayout* layout, Center center, std::vector<double> c)
      : layout_(layout), center_(std::move(center)), c_(std::move(c)) {}

  void check_compatible(const Jet& o) const;

  const JetLayout* layout_ = nullptr;
  Center center_;
  std::vector<double> c_;
};

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet tanh(const Jet& a);
Jet pow(const Jet& a, int k);
Jet pow(const Jet& a, double r);

/// Zero and constants of the same scalar type as a sample value, for use
/// inside generic field lambdas.
inline double zero_like(double) { return 0.0; }
inline long double zero_like(long double) { return 0.0L; }
inline Jet zero_like(const Jet& j) { return j.zero_like(); }

/// Scalar field on the slit tangent bundle, evaluable on jets (for
/// derivatives), doubles, and long doubles (for finite-difference oracles).
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual int dim() const = 0;
  virtual Jet operator()(std::span<const Jet> x, std::span<const Jet> y) const = 0;
  virtual double operator()(std::span<const double> x, std::span<const double> y) const = 0;
  virtual long double operator()(std::span<const long double> x,
                                 std::span<const long double> y) const = 0;
};

namespace detail {
template <class F>
class LambdaField final : public ScalarField {
 public:
  LambdaField(int dim, F f) : dim_(dim), f_(std::move(f)) {}
  int dim() const override { return dim_; }
  Jet operator()(std::span<const Jet> x, std::span<const Jet> y) const override {
    return f_(x, y);
  }
  double operator()(std::span<const double> x, std::span<const double> y) const override {
    return f_(x, y);
  }
  long double operator()(std::span<const long double> x,
                         std::span<const long double> y) const override {
    return f_(x, y);
  }

 private:
  int dim_;
  F f_;
};
}  // namespace detail

/// Wrap a generic lambda `[](auto x, auto y) { ... }` taking spans of the
/// scalar type. Inside, call math functions unqualified after
/// `using std::sqrt;` etc. so that jets resolve through ADL.
template <class F>
std::shared_ptr<const ScalarField> make_field(int dim, F f) {
  return std::make_shared<detail::LambdaField<F>>(dim, std::move(f));
}

/// All mixed partials of `f` at `u` up to `order`. Throws JetDomainError naming
/// the first offending multi-index if any coefficient is non-finite.
Jet jet_eval(const ScalarField& f, const SupportElement& u, int order);

/// Coordinate jets (x^1..x^n, y^1..y^n) centered at `u`.
struct CoordinateJets {
  std::vector<Jet> x;
  std::vector<Jet> y;
};
CoordinateJets coordinate_jets(const SupportElement& u, int order);

}  // namespace finsler
