#include "finsler/jet.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "finsler/errors.hpp"

namespace finsler {

int MultiIndex::total() const {
  int s = 0;
  for (int o : orders) s += o;
  return s;
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (i) os << ',';
    os << orders[i];
  }
  os << ')';
  return os.str();
}

namespace {

// All compositions of `degree` into `nvars` non-negative parts, first variable
// varying slowest.
void compositions(int nvars, int degree, std::vector<int>& cur, int var,
                  std::vector<MultiIndex>& out) {
  if (var == nvars - 1) {
    cur[var] = degree;
    out.emplace_back(cur);
    return;
  }
  for (int k = degree; k >= 0; --k) {
    cur[var] = k;
    compositions(nvars, degree - k, cur, var + 1, out);
  }
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
  std::vector<int> cur(nvars, 0);
  prefix_.resize(order + 1);
  for (int d = 0; d <= order; ++d) {
    compositions(nvars, d, cur, 0, monomials_);
    prefix_[d] = monomials_.size();
  }
  for (std::size_t k = 0; k < monomials_.size(); ++k) {
    index_.emplace(monomials_[k].orders, k);
  }

  // Leibniz: d^c(fg) = sum_{a <= c} C(c, a) d^a f d^(c-a) g.
  product_prefix_.resize(order + 1);
  std::vector<int> a(nvars), b(nvars);
  for (std::size_t out = 0; out < monomials_.size(); ++out) {
    const auto& c = monomials_[out].orders;
    std::fill(a.begin(), a.end(), 0);
    while (true) {
      double w = 1.0;
      for (int v = 0; v < nvars; ++v) {
        b[v] = c[v] - a[v];
        w *= binomial(c[v], a[v]);
      }
      products_.push_back({static_cast<std::uint32_t>(index_.at(a)),
                           static_cast<std::uint32_t>(index_.at(b)),
                           static_cast<std::uint32_t>(out), w});
      int v = nvars - 1;
      while (v >= 0 && a[v] == c[v]) {
        a[v] = 0;
        --v;
      }
      if (v < 0) break;
      ++a[v];
    }
    const int deg = monomials_[out].total();
    product_prefix_[deg] = products_.size();
  }

  derivative_sources_.resize(nvars);
  if (order > 0) {
    const std::size_t lower = prefix_[order - 1];
    for (int v = 0; v < nvars; ++v) {
      auto& src = derivative_sources_[v];
      src.resize(lower);
      for (std::size_t k = 0; k < lower; ++k) {
        std::vector<int> m = monomials_[k].orders;
        ++m[v];
        src[k] = static_cast<std::uint32_t>(index_.at(m));
      }
    }
  }
}

const JetLayout& JetLayout::get(int nvars, int order) {
  if (nvars < 1 || order < 0) {
    throw std::invalid_argument("jet layout needs nvars >= 1 and order >= 0");
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> registry;
  std::lock_guard<std::mutex> lock(mutex);
  for (int d = 0; d <= order; ++d) {
    auto& slot = registry[{nvars, d}];
    if (!slot) {
      slot.reset(new JetLayout(nvars, d));
      for (int e = 0; e <= d; ++e) slot->siblings_.push_back(registry[{nvars, e}].get());
    }
  }
  return *registry[{nvars, order}];
}

std::size_t JetLayout::position(const MultiIndex& m) const {
  if (static_cast<int>(m.orders.size()) != nvars_) {
    throw std::out_of_range("multi-index has " + std::to_string(m.orders.size()) +
                            " entries, layout has " + std::to_string(nvars_) + " variables");
  }
  auto it = index_.find(m.orders);
  if (it == index_.end()) throw std::out_of_range("multi-index " + m.str() + " not in layout");
  return it->second;
}

// ---------------------------------------------------------------------------

Jet Jet::constant(double value, Center center, int order) {
  const int nvars = 2 * center->dim();
  const JetLayout& layout = JetLayout::get(nvars, order);
  std::vector<double> c(layout.size(), 0.0);
  c[0] = value;
  return Jet(&layout, std::move(center), std::move(c));
}

Jet Jet::variable(int var, Center center, int order) {
  const int n = center->dim();
  if (var < 0 || var >= 2 * n) throw std::out_of_range("jet variable index out of range");
  const double v = var < n ? center->x[var] : center->y[var - n];
  Jet j = constant(v, std::move(center), order);
  if (order >= 1) j.c_[1 + var] = 1.0;  // degree-1 monomials follow the constant, in variable order
  return j;
}

double Jet::partial(const MultiIndex& m) const {
  if (m.total() > order()) {
    throw JetOrderError("partial " + m.str() + " exceeds jet order " + std::to_string(order()));
  }
  return c_[layout_->position(m)];
}

Jet Jet::derivative(int var) const {
  if (order() == 0) {
    throw JetOrderError("jet order exhausted: cannot differentiate an order-0 jet");
  }
  const JetLayout* lower = layout_->siblings_[order() - 1];
  auto src = layout_->derivative_sources(var);
  std::vector<double> c(lower->size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = c_[src[k]];
  return Jet(lower, center_, std::move(c));
}

Jet Jet::truncated(int order) const {
  if (order >= this->order()) return *this;
  if (order < 0) throw JetOrderError("negative truncation order");
  const JetLayout* lower = layout_->siblings_[order];
  return Jet(lower, center_, std::vector<double>(c_.begin(), c_.begin() + lower->size()));
}

bool Jet::is_finite() const { return first_non_finite() == nullptr; }

const MultiIndex* Jet::first_non_finite() const {
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (!std::isfinite(c_[k])) return &layout_->monomial(k);
  }
  return nullptr;
}

void Jet::check_compatible(const Jet& o) const {
  if (empty() || o.empty()) throw JetMismatchError("operation on an empty jet");
  if (layout_->nvars() != o.layout_->nvars()) {
    throw JetMismatchError("jets over different variable counts");
  }
  if (center_ != o.center_ && !(*center_ == *o.center_)) {
    throw JetMismatchError("jets centered at different support elements");
  }
}

Jet& Jet::operator+=(const Jet& o) {
  check_compatible(o);
  if (o.order() < order()) *this = truncated(o.order());
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(o);
  if (o.order() < order()) *this = truncated(o.order());
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet operator-(Jet a) {
  for (double& v : a.c_) v = -v;
  return a;
}

Jet operator*(const Jet& a, const Jet& b) {
  a.check_compatible(b);
  const JetLayout* layout = a.order() <= b.order() ? a.layout_ : b.layout_;
  std::vector<double> c(layout->size(), 0.0);
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  for (const auto& t : layout->products()) c[t.out] += t.weight * pa[t.a] * pb[t.b];
  return Jet(layout, a.center_, std::move(c));
}

Jet Jet::compose(std::span<const double> taylor) const {
  const int K = order();
  if (static_cast<int>(taylor.size()) < K + 1) {
    throw std::invalid_argument("compose: need order+1 Taylor coefficients");
  }
  for (int k = 0; k <= K; ++k) {
    if (!std::isfinite(taylor[k])) {
      throw JetDomainError("univariate function not finite at " + std::to_string(value()));
    }
  }
  Jet h = *this;
  h.c_[0] = 0.0;
  Jet r = constant(taylor[K], center_, K);
  for (int k = K - 1; k >= 0; --k) {
    r = r * h;
    r.c_[0] += taylor[k];
  }
  return r;
}

Jet Jet::reciprocal() const {
  const double a0 = value();
  if (a0 == 0.0) throw JetDomainError("reciprocal of a jet with zero value");
  std::vector<double> t(order() + 1);
  double p = 1.0 / a0;
  for (int k = 0; k <= order(); ++k) {
    t[k] = (k % 2 == 0 ? p : -p);
    p /= a0;
  }
  return compose(t);
}

Jet exp(const Jet& a) {
  std::vector<double> t(a.order() + 1);
  double f = std::exp(a.value());
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = f;
    f /= (k + 1);
  }
  return a.compose(t);
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw JetDomainError("log of non-positive value " + std::to_string(a0));
  std::vector<double> t(a.order() + 1);
  t[0] = std::log(a0);
  double p = 1.0;
  for (int k = 1; k <= a.order(); ++k) {
    p /= a0;
    t[k] = (k % 2 == 1 ? 1.0 : -1.0) * p / k;
  }
  return a.compose(t);
}

Jet pow(const Jet& a, double r) {
  if (r == std::floor(r) && std::abs(r) < 64) return pow(a, static_cast<int>(r));
  const double a0 = a.value();
  if (!(a0 > 0.0)) {
    throw JetDomainError("non-integer power of non-positive value " + std::to_string(a0));
  }
  std::vector<double> t(a.order() + 1);
  double coef = 1.0;  // binom(r, k)
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = coef * std::pow(a0, r - k);
    coef *= (r - k) / (k + 1);
  }
  return a.compose(t);
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {s, c, -s, -c};
  std::vector<double> t(a.order() + 1);
  double fact = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k) fact *= k;
    t[k] = cyc[k % 4] / fact;
  }
  return a.compose(t);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {c, -s, -c, s};
  std::vector<double> t(a.order() + 1);
  double fact = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k) fact *= k;
    t[k] = cyc[k % 4] / fact;
  }
  return a.compose(t);
}

Jet tan(const Jet& a) { return sin(a) / cos(a); }

Jet tanh(const Jet& a) {
  Jet e = exp(2.0 * a);
  return (e - 1.0) / (e + 1.0);
}

Jet pow(const Jet& a, int k) {
  if (k < 0) return pow(a.reciprocal(), -k);
  Jet result = Jet::constant(1.0, a.center(), a.order());
  Jet base = a;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

// ---------------------------------------------------------------------------

CoordinateJets coordinate_jets(const SupportElement& u, int order) {
  auto center = std::make_shared<const SupportElement>(u);
  const int n = u.dim();
  CoordinateJets out;
  out.x.reserve(n);
  out.y.reserve(n);
  for (int i = 0; i < n; ++i) out.x.push_back(Jet::variable(i, center, order));
  for (int i = 0; i < n; ++i) out.y.push_back(Jet::variable(n + i, center, order));
  return out;
}

Jet jet_eval(const ScalarField& f, const SupportElement& u, int order) {
  if (f.dim() != u.dim()) {
    throw JetMismatchError("field dimension " + std::to_string(f.dim()) +
                           " does not match support element dimension " +
                           std::to_string(u.dim()));
  }
  auto coords = coordinate_jets(u, order);
  Jet out = f(coords.x, coords.y);
  if (const MultiIndex* bad = out.first_non_finite()) {
    throw JetDomainError("non-finite jet coefficient at multi-index " + bad->str());
  }
  return out;
}

}  // namespace finsler
