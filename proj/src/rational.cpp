#include "micromorph/rational.hpp"

#include "micromorph/errors.hpp"

#include <algorithm>

namespace micromorph {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  if (s.empty()) throw ValidationError("empty rational");
  auto dot = s.find('.');
  auto exp = s.find_first_of("eE");
  if (dot == std::string::npos && exp == std::string::npos) {
    Rational q;
    if (q.set_str(s, 10) != 0) throw ValidationError("bad rational '" + s + "'");
    if (q.get_den() == 0) throw ValidationError("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
  }
  // Decimal literal: mantissa digits over a power of ten.
  std::string mant = exp == std::string::npos ? s : s.substr(0, exp);
  long e10 = 0;
  if (exp != std::string::npos) {
    try {
      e10 = std::stol(s.substr(exp + 1));
    } catch (...) {
      throw ValidationError("bad exponent in '" + s + "'");
    }
  }
  bool neg = !mant.empty() && (mant[0] == '-' || mant[0] == '+');
  bool minus = neg && mant[0] == '-';
  if (neg) mant.erase(0, 1);
  auto d = mant.find('.');
  if (d != std::string::npos) {
    e10 -= static_cast<long>(mant.size() - d - 1);
    mant.erase(d, 1);
  }
  if (mant.empty() || !std::all_of(mant.begin(), mant.end(), ::isdigit))
    throw ValidationError("bad decimal '" + s + "'");
  mpz_class num(mant, 10);
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(e10 < 0 ? -e10 : e10));
  Rational q = e10 < 0 ? Rational(num, p10) : Rational(num * p10);
  q.canonicalize();
  return minus ? Rational(-q) : q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace micromorph
