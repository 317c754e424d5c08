/**
 * @file gradient_series.hpp
 * @brief Truncated polynomials in amplitude symbols U_m, V_m and their
 *        macroscale derivatives, with cell-function or scalar coefficients.
 */
#pragma once

#include "micromorph/errors.hpp"
#include "micromorph/rational.hpp"
#include "micromorph/trig_poly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace micromorph {

enum class AmpKind : std::uint8_t { amplitude = 0, velocity = 1 };
enum class Axis { x, y };

/// One amplitude factor: U_m or V_m differentiated dx times in x, dy in y.
struct DerivKey {
  std::uint8_t mode = 0;
  std::uint8_t dx = 0;
  std::uint8_t dy = 0;
  AmpKind kind = AmpKind::amplitude;

  int order() const { return dx + dy; }
  auto operator<=>(const DerivKey&) const = default;
  bool operator==(const DerivKey&) const = default;
};

/// Parameter symbols carried in monomials: heterogeneity strength a,
/// nonlinearity gamma, then up to four free symbols (e.g. c1, c2).
inline constexpr int kMaxParams = 6;
inline constexpr int kParamA = 0;
inline constexpr int kParamGamma = 1;

using ParamNames = std::array<std::string, kMaxParams>;
ParamNames default_param_names();

struct Monomial {
  std::array<std::uint8_t, kMaxParams> powers{};
  std::vector<DerivKey> factors;  // sorted, repeated for powers

  static Monomial amp(int mode, int dx = 0, int dy = 0, AmpKind kind = AmpKind::amplitude);
  static Monomial param(int index, int power = 1);

  int deriv_order() const;
  int degree() const { return static_cast<int>(factors.size()); }
  bool has_velocity() const;

  /// Parameter part only (amplitude factors stripped) and vice versa.
  Monomial param_part() const;
  Monomial amp_part() const;

  friend Monomial operator*(const Monomial& x, const Monomial& y);
  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;
};

/// "U0xx*U1", "V0*V0x"; "1" for the empty product.
std::string amp_string(const Monomial& m);
/// "a^2*gamma"; empty when no parameter powers.
std::string param_string(const Monomial& m, const ParamNames& names);
/// Inverse of amp_string / param_string; merges into one monomial.
Monomial parse_monomial(const std::string& amp, const std::string& params,
                        const ParamNames& names);

/// Keep derivative count < grad and parameter powers < param[i].
struct Truncation {
  static constexpr int kUnbounded = 1 << 20;
  int grad = kUnbounded;
  std::array<int, kMaxParams> param;

  Truncation() { param.fill(kUnbounded); }
  static Truncation make(int grad, int order_a = kUnbounded, int order_gamma = kUnbounded);

  bool admits(const Monomial& m) const {
    if (m.deriv_order() >= grad) return false;
    for (int i = 0; i < kMaxParams; ++i)
      if (m.powers[i] >= param[i]) return false;
    return true;
  }
  /// Cheap pre-check for a product x*y.
  bool admits_product(const Monomial& x, const Monomial& y) const {
    if (x.deriv_order() + y.deriv_order() >= grad) return false;
    for (int i = 0; i < kMaxParams; ++i)
      if (x.powers[i] + y.powers[i] >= param[i]) return false;
    return true;
  }
  bool operator==(const Truncation&) const = default;
};

// ---------------------------------------------------------------------------
// Coefficient domains

template <class C>
struct CoefOps;

template <>
struct CoefOps<Rational> {
  using Scalar = Rational;
  static constexpr bool exact = true;
  static bool is_zero(const Rational& c) { return sgn(c) == 0; }
  static void check(const Rational&, const Rational&) {}
  static Rational mul(const Rational& x, const Rational& y) { return x * y; }
  static Rational scaled(const Rational& c, const Scalar& s) { return c * s; }
  static double norm(const Rational& c) { return std::fabs(c.get_d()); }
};

template <>
struct CoefOps<double> {
  using Scalar = double;
  static constexpr bool exact = false;
  static bool is_zero(double c) { return c == 0.0; }
  static void check(double, double) {}
  static double mul(double x, double y) { return x * y; }
  static double scaled(double c, double s) { return c * s; }
  static double norm(double c) { return std::fabs(c); }
};

template <>
struct CoefOps<TrigPoly> {
  using Scalar = Rational;
  static constexpr bool exact = true;
  static bool is_zero(const TrigPoly& c) { return c.is_zero(); }
  static void check(const TrigPoly&, const TrigPoly&) {}
  static TrigPoly mul(const TrigPoly& x, const TrigPoly& y) { return x * y; }
  static TrigPoly scaled(const TrigPoly& c, const Scalar& s) {
    TrigPoly r = c;
    r *= s;
    return r;
  }
  static double norm(const TrigPoly& c) {
    double m = 0;
    for (int n = 0; n <= c.degree(); ++n)
      m = std::max({m, std::fabs(c.coeff(n, Parity::cos).get_d()),
                    std::fabs(c.coeff(n, Parity::sin).get_d())});
    return m;
  }
};

template <>
struct CoefOps<Eigen::VectorXd> {
  using Scalar = double;
  static constexpr bool exact = false;
  static bool is_zero(const Eigen::VectorXd& c) { return (c.array() == 0.0).all(); }
  static void check(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size())
      throw DomainError("grid coefficient length mismatch (" + std::to_string(x.size()) +
                        " vs " + std::to_string(y.size()) + ")");
  }
  static Eigen::VectorXd mul(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    check(x, y);
    return x.cwiseProduct(y);
  }
  static Eigen::VectorXd scaled(const Eigen::VectorXd& c, double s) { return c * s; }
  static double norm(const Eigen::VectorXd& c) {
    return c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0;
  }
};

// ---------------------------------------------------------------------------

template <class C>
class GradientSeries {
 public:
  using Coef = C;
  using Ops = CoefOps<C>;
  using Scalar = typename Ops::Scalar;
  using Map = std::map<Monomial, C>;

  GradientSeries() = default;
  explicit GradientSeries(const Truncation& t) : trunc_(t) {}

  static GradientSeries term(const Monomial& m, const C& c, const Truncation& t) {
    GradientSeries s(t);
    s.add_term(m, c);
    return s;
  }

  const Truncation& trunc() const { return trunc_; }
  const Map& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Replaces the truncation, dropping terms it no longer admits.
  void set_trunc(const Truncation& t) {
    trunc_ = t;
    std::erase_if(terms_, [&](const auto& kv) { return !t.admits(kv.first); });
  }

  const C* find(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? nullptr : &it->second;
  }

  /// Accumulates c into the coefficient of m; drops at insertion.
  void add_term(const Monomial& m, const C& c) {
    if (!trunc_.admits(m) || Ops::is_zero(c)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, c);
      return;
    }
    Ops::check(it->second, c);
    it->second += c;
    if (Ops::is_zero(it->second)) terms_.erase(it);
  }

  void erase(const Monomial& m) { terms_.erase(m); }

  /// Drops terms for which pred(monomial, coef) holds.
  template <class Pred>
  void prune(Pred pred) {
    std::erase_if(terms_, [&](const auto& kv) { return pred(kv.first, kv.second); });
  }

  GradientSeries& operator+=(const GradientSeries& o) {
    require_same_trunc(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  GradientSeries& operator-=(const GradientSeries& o) {
    require_same_trunc(o);
    for (const auto& [m, c] : o.terms_) add_term(m, Ops::scaled(c, Scalar(-1)));
    return *this;
  }
  GradientSeries& operator*=(const Scalar& s) {
    if (CoefOps<Scalar>::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c = Ops::scaled(c, s);
    return *this;
  }

  /// Applies f to every coefficient, keeping the monomials.
  template <class F>
  auto map_coeffs(F f) const {
    using R = std::decay_t<decltype(f(std::declval<const C&>()))>;
    GradientSeries<R> out(trunc_);
    for (const auto& [m, c] : terms_) out.add_term(m, f(c));
    return out;
  }

  void require_same_trunc(const GradientSeries& o) const {
    if (!(trunc_ == o.trunc_)) throw DomainError("truncation mismatch between series");
  }
  template <class D>
  void require_same_trunc(const GradientSeries<D>& o) const {
    if (!(trunc_ == o.trunc())) throw DomainError("truncation mismatch between series");
  }

  friend bool operator==(const GradientSeries& x, const GradientSeries& y) {
    if (x.terms_.size() != y.terms_.size()) return false;
    auto it = y.terms_.begin();
    for (const auto& [m, c] : x.terms_) {
      if (!(m == it->first)) return false;
      if constexpr (std::is_same_v<C, Eigen::VectorXd>) {
        if (c.size() != it->second.size() || c != it->second) return false;
      } else {
        if (!(c == it->second)) return false;
      }
      ++it;
    }
    return true;
  }

 private:
  Truncation trunc_;
  Map terms_;
};

template <class C>
GradientSeries<C> operator+(GradientSeries<C> x, const GradientSeries<C>& y) {
  x += y;
  return x;
}
template <class C>
GradientSeries<C> operator-(GradientSeries<C> x, const GradientSeries<C>& y) {
  x -= y;
  return x;
}
template <class C>
GradientSeries<C> operator-(GradientSeries<C> x) {
  x *= typename CoefOps<C>::Scalar(-1);
  return x;
}
template <class C>
GradientSeries<C> operator*(const typename CoefOps<C>::Scalar& s, GradientSeries<C> x) {
  x *= s;
  return x;
}

/// Generic product: coefficients combined by f(cx, cy) -> C.
template <class C, class D, class F>
GradientSeries<C> multiply_with(const GradientSeries<C>& x, const GradientSeries<D>& y, F f) {
  x.require_same_trunc(y);
  const Truncation& t = x.trunc();
  GradientSeries<C> out(t);
  for (const auto& [mx, cx] : x.terms()) {
    for (const auto& [my, cy] : y.terms()) {
      if (!t.admits_product(mx, my)) continue;
      out.add_term(mx * my, f(cx, cy));
    }
  }
  return out;
}

/// Product of two series over the same coefficient domain.
template <class C>
GradientSeries<C> operator*(const GradientSeries<C>& x, const GradientSeries<C>& y) {
  return multiply_with(x, y, [](const C& a, const C& b) { return CoefOps<C>::mul(a, b); });
}

/// Product of a cell-function series by a scalar-coefficient series.
template <class C>
  requires(!std::is_same_v<C, typename CoefOps<C>::Scalar>)
GradientSeries<C> operator*(const GradientSeries<C>& x,
                            const GradientSeries<typename CoefOps<C>::Scalar>& y) {
  return multiply_with(x, y, [](const C& a, const auto& s) { return CoefOps<C>::scaled(a, s); });
}

enum class CombineOp { add, mul };

template <class C>
GradientSeries<C> series_combine(const GradientSeries<C>& x, const GradientSeries<C>& y,
                                 CombineOp op) {
  return op == CombineOp::add ? x + y : x * y;
}

/// Leibniz derivative of a monomial's amplitude factors: list of
/// (multiplicity, differentiated monomial).
std::vector<std::pair<int, Monomial>> differentiate_monomial(const Monomial& m, Axis axis);

template <class C>
GradientSeries<C> apply_gradient(const GradientSeries<C>& x, Axis axis) {
  GradientSeries<C> out(x.trunc());
  for (const auto& [m, c] : x.terms()) {
    if (m.deriv_order() + 1 >= x.trunc().grad) continue;
    for (const auto& [mult, dm] : differentiate_monomial(m, axis)) {
      if (mult == 1)
        out.add_term(dm, c);
      else
        out.add_term(dm, CoefOps<C>::scaled(c, typename CoefOps<C>::Scalar(mult)));
    }
  }
  return out;
}

/// max over terms of |coef| * R^{-derivative order}.
template <class C>
double weighted_norm(const GradientSeries<C>& x, double R = 1.0) {
  double n = 0;
  for (const auto& [m, c] : x.terms())
    n = std::max(n, CoefOps<C>::norm(c) * std::pow(R, -m.deriv_order()));
  return n;
}

}  // namespace micromorph
