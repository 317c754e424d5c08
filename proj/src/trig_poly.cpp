#include "micromorph/trig_poly.hpp"

#include "micromorph/errors.hpp"

#include <cmath>
#include <cstdlib>

namespace micromorph {

namespace {
const Rational kZero(0);
}

TrigPoly::TrigPoly(const Rational& constant) {
  if (!micromorph::is_zero(constant)) {
    c_.push_back(constant);
    s_.push_back(Rational(0));
  }
}

TrigPoly TrigPoly::harmonic(int n, Parity p, const Rational& coeff) {
  TrigPoly t;
  t.set(n, p, coeff);
  return t;
}

const Rational& TrigPoly::coeff(int n, Parity p) const {
  if (n < 0 || n > degree()) return kZero;
  return p == Parity::cos ? c_[n] : s_[n];
}

void TrigPoly::grow(int n) {
  if (n > degree()) {
    c_.resize(n + 1);
    s_.resize(n + 1);
  }
}

void TrigPoly::trim() {
  while (!c_.empty() && micromorph::is_zero(c_.back()) && micromorph::is_zero(s_.back())) {
    c_.pop_back();
    s_.pop_back();
  }
}

void TrigPoly::set(int n, Parity p, const Rational& value) {
  if (n < 0) throw DomainError("negative harmonic index");
  if (n == 0 && p == Parity::sin) {
    if (!micromorph::is_zero(value)) throw DomainError("sin(0q) coefficient must be zero");
    return;
  }
  grow(n);
  (p == Parity::cos ? c_[n] : s_[n]) = value;
  trim();
}

void TrigPoly::add(int n, Parity p, const Rational& value) {
  if (micromorph::is_zero(value)) return;
  if (n == 0 && p == Parity::sin) return;
  grow(n);
  (p == Parity::cos ? c_[n] : s_[n]) += value;
  trim();
}

TrigPoly TrigPoly::derivative() const {
  TrigPoly d;
  d.c_.resize(c_.size());
  d.s_.resize(s_.size());
  for (int n = 1; n <= degree(); ++n) {
    d.c_[n] = n * s_[n];
    d.s_[n] = -n * c_[n];
  }
  d.trim();
  return d;
}

double TrigPoly::eval(double q) const {
  double v = 0;
  for (int n = 0; n <= degree(); ++n)
    v += c_[n].get_d() * std::cos(n * q) + s_[n].get_d() * std::sin(n * q);
  return v;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& o) {
  grow(o.degree());
  for (int n = 0; n <= o.degree(); ++n) {
    c_[n] += o.c_[n];
    s_[n] += o.s_[n];
  }
  trim();
  return *this;
}

TrigPoly& TrigPoly::operator-=(const TrigPoly& o) {
  grow(o.degree());
  for (int n = 0; n <= o.degree(); ++n) {
    c_[n] -= o.c_[n];
    s_[n] -= o.s_[n];
  }
  trim();
  return *this;
}

TrigPoly& TrigPoly::operator*=(const Rational& s) {
  if (micromorph::is_zero(s)) {
    c_.clear();
    s_.clear();
    return *this;
  }
  for (auto& v : c_) v *= s;
  for (auto& v : s_) v *= s;
  return *this;
}

// Product-to-sum:
//   cos a cos b = (cos(a-b) + cos(a+b))/2
//   sin a sin b = (cos(a-b) - cos(a+b))/2
//   sin a cos b = (sin(a+b) + sin(a-b))/2
TrigPoly operator*(const TrigPoly& x, const TrigPoly& y) {
  TrigPoly r;
  if (x.is_zero() || y.is_zero()) return r;
  int top = x.degree() + y.degree();
  r.c_.assign(top + 1, Rational(0));
  r.s_.assign(top + 1, Rational(0));
  Rational t;
  for (int i = 0; i <= x.degree(); ++i) {
    const Rational& xc = x.c_[i];
    const Rational& xs = x.s_[i];
    bool xcz = micromorph::is_zero(xc), xsz = micromorph::is_zero(xs);
    if (xcz && xsz) continue;
    for (int j = 0; j <= y.degree(); ++j) {
      const Rational& yc = y.c_[j];
      const Rational& ys = y.s_[j];
      bool ycz = micromorph::is_zero(yc), ysz = micromorph::is_zero(ys);
      if (ycz && ysz) continue;
      int sum = i + j;
      int dif = std::abs(i - j);
      int sgn = i >= j ? 1 : -1;  // sin(i-j) = sgn * sin|i-j|
      if (!xcz && !ycz) {
        t = xc * yc;
        t /= 2;
        r.c_[dif] += t;
        r.c_[sum] += t;
      }
      if (!xsz && !ysz) {
        t = xs * ys;
        t /= 2;
        r.c_[dif] += t;
        r.c_[sum] -= t;
      }
      if (!xsz && !ycz) {  // sin i cos j
        t = xs * yc;
        t /= 2;
        r.s_[sum] += t;
        if (sgn > 0) r.s_[dif] += t; else r.s_[dif] -= t;
      }
      if (!xcz && !ysz) {  // cos i sin j = (sin(i+j) - sin(i-j))/2
        t = xc * ys;
        t /= 2;
        r.s_[sum] += t;
        if (sgn > 0) r.s_[dif] -= t; else r.s_[dif] += t;
      }
    }
  }
  r.s_[0] = 0;
  r.trim();
  return r;
}

std::string TrigPoly::str() const {
  std::string out;
  auto put = [&](const Rational& v, const std::string& fn) {
    if (micromorph::is_zero(v)) return;
    std::string num = to_string(v);
    if (!out.empty() && num[0] != '-') out += "+";
    out += fn.empty() ? num : num + "*" + fn;
  };
  for (int n = 0; n <= degree(); ++n) {
    std::string arg = n == 1 ? "q" : std::to_string(n) + "q";
    put(c_[n], n == 0 ? "" : "cos(" + arg + ")");
    put(s_[n], n == 0 ? "" : "sin(" + arg + ")");
  }
  return out.empty() ? "0" : out;
}

}  // namespace micromorph
