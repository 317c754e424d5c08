#pragma once

#include "micromorph/rational.hpp"

#include <string>
#include <vector>

namespace micromorph {

enum class Parity { cos, sin };

/// Exact trigonometric polynomial  sum_n c_n cos(n q) + s_n sin(n q).
class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(const Rational& constant);

  static TrigPoly harmonic(int n, Parity p, const Rational& coeff = 1);

  const Rational& coeff(int n, Parity p) const;
  void set(int n, Parity p, const Rational& value);
  void add(int n, Parity p, const Rational& value);

  /// Highest harmonic present; -1 when identically zero.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }

  /// d/dq.
  TrigPoly derivative() const;
  double eval(double q) const;

  TrigPoly& operator+=(const TrigPoly& o);
  TrigPoly& operator-=(const TrigPoly& o);
  TrigPoly& operator*=(const Rational& s);
  friend TrigPoly operator*(const TrigPoly& x, const TrigPoly& y);
  friend bool operator==(const TrigPoly& x, const TrigPoly& y) {
    return x.c_ == y.c_ && x.s_ == y.s_;
  }

  std::string str() const;

 private:
  void grow(int n);
  void trim();

  std::vector<Rational> c_;  // cos coefficients, index n
  std::vector<Rational> s_;  // sin coefficients, s_[0] stays zero
};

}  // namespace micromorph
