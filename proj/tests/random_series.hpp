// Randomised gradient series and the algebra laws they must satisfy; shared
// by the unit tests and the acceptance run.
#pragma once

#include "micromorph/gradient_series.hpp"

#include <random>

namespace micromorph::testing {

inline GradientSeries<Rational> random_series(std::mt19937& rng, const Truncation& t) {
  std::uniform_int_distribution<int> nterms(0, 4), deg(0, 2), mode(0, 2), dx(0, 2), dy(0, 1),
      ap(0, 2), num(-5, 5), den(1, 4);
  GradientSeries<Rational> s(t);
  const int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    Monomial m = Monomial::param(kParamA, ap(rng));
    const int d = deg(rng);
    for (int k = 0; k < d; ++k) m = m * Monomial::amp(mode(rng), dx(rng), dy(rng));
    Rational c(num(rng), den(rng));
    c.canonicalize();
    s.add_term(m, c);
  }
  return s;
}

struct LawReport {
  int cases = 0;
  int failures = 0;
};

/// Commutativity, associativity, distributivity, truncation commuting with
/// products, and the Leibniz rule, each checked once per case.
inline LawReport check_series_laws(int cases, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> grad(2, 6), pa(1, 5);
  LawReport r;
  for (int c = 0; c < cases; ++c, ++r.cases) {
    const Truncation full;
    const Truncation t = Truncation::make(grad(rng), pa(rng));
    const auto x = random_series(rng, full), y = random_series(rng, full), z = random_series(rng, full);
    const Axis axis = c % 2 ? Axis::x : Axis::y;
    bool ok = x * y == y * x;
    ok = ok && (x * y) * z == x * (y * z);
    ok = ok && x * (y + z) == x * y + x * z;

    auto xt = x, yt = y, xy = x * y;
    xt.set_trunc(t);
    yt.set_trunc(t);
    xy.set_trunc(t);
    ok = ok && xt * yt == xy;
    ok = ok && apply_gradient(xt * yt, axis) ==
                   apply_gradient(xt, axis) * yt + xt * apply_gradient(yt, axis);
    if (!ok) ++r.failures;
  }
  return r;
}

}  // namespace micromorph::testing
