#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace micromorph {

using Rational = mpq_class;

/// Parses "p", "p/q" or a plain decimal such as "-0.125" exactly.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

inline bool is_zero(const Rational& q) { return sgn(q) == 0; }

}  // namespace micromorph
