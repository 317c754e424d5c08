#include <doctest.h>

#include "micromorph/analysis.hpp"
#include "micromorph/homog1d.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace micromorph;
using std::numbers::pi;

namespace {

HomogenisedModel<Rational> diffusion_model() {
  HomogenisedModel<Rational> m(1, 1, Truncation::make(5));
  m.rhs[0].add_term(Monomial::amp(0, 2), Rational(1));
  m.rhs[0].add_term(Monomial::amp(0, 4), Rational(-1, 12));
  return m;
}

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("one-mode sheet reads off the symbol") {
  const auto d = dispersion_exact(diffusion_model(), 6, ParamValues<Rational>{});
  REQUIRE(d.sheets.size() == 1);
  const auto& s = d.sheets[0];
  CHECK(s[0] == 0);
  CHECK(s[2] == 1);
  CHECK(s[4] == q(-1, 12));
  CHECK(s[1] == 0);
  CHECK(s[3] == 0);
}

TEST_CASE("parameter substitution enters the symbol") {
  HomogenisedModel<Rational> m(1, 1, Truncation::make(3, 3));
  m.rhs[0].add_term(Monomial::amp(0, 2), Rational(1));
  m.rhs[0].add_term(Monomial::param(kParamA, 2) * Monomial::amp(0, 2), q(1, 2));
  ParamValues<Rational> p;
  p[kParamA] = Rational(2);
  const auto d = dispersion_exact(m, 4, p);
  CHECK(d.sheets[0][2] == 3);
}

TEST_CASE("sampled branches match the exact sheet") {
  HomogenisedModel<double> m(1, 1, Truncation::make(5));
  m.rhs[0].add_term(Monomial::amp(0, 2), 1.0);
  const auto s = dispersion_grid(m, {0.0, 0.5, 1.0}, {});
  REQUIRE(s.branches.size() == 3);
  CHECK(s.branches[1][0].real() == doctest::Approx(-0.25));
  CHECK(std::fabs(s.branches[2][0].imag()) < 1e-14);
  CHECK(s.csv().find("k") != std::string::npos);
}

TEST_CASE("simple root required for a sheet") {
  CharPoly<double> p;
  p.order = 1;
  p.c = {{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}};  // lambda^2
  CHECK_THROWS(sheet_series(p, 0.0));
}

TEST_CASE("Bloch operator reduces to the cell operator at k = 0") {
  const auto f = sample_function([](double x) { return 1 / (1 + 0.4 * std::cos(x)); }, 2 * pi, 32);
  const Eigen::MatrixXcd B = bloch_matrix(f, 0.3);
  CHECK((B - B.adjoint()).norm() < 1e-12 * B.norm());
  const Eigen::MatrixXcd B0 = bloch_matrix(f, 0.0);
  const auto op = assemble_cell_operator(f);
  CHECK((B0.real() - op.matrix).norm() < 1e-12 * op.norm());
  const auto ev = bloch_oracle(f, 0.0, 2);
  CHECK(std::fabs(ev[0]) < 1e-12);
}

TEST_CASE("Domb-Sykes finds a real singularity") {
  std::vector<double> c;
  for (int n = 0; n < 30; ++n) c.push_back((n + 1) * std::pow(0.5, n));  // 1/(1 - x/2)^2
  // Ratios are 2n/(n+1): the 1/n^2 part biases a linear fit slightly.
  CHECK(domb_sykes(c).radius == doctest::Approx(2.0).epsilon(5e-3));
  std::vector<double> alt;
  for (int n = 0; n < 30; ++n) alt.push_back(std::pow(-0.5, n));
  CHECK_THROWS_AS(domb_sykes(alt), DomainError);
  // Series in z = x^2 with its pole at z = 4 sits at x = 2.
  std::vector<double> z;
  for (int n = 0; n < 30; ++n) z.push_back(std::pow(0.25, n));
  CHECK(domb_sykes(z, 2).radius == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("Mercer-Roberts locates a conjugate pair") {
  const double R = 1.3, th = 0.7;
  std::vector<double> c;
  for (int n = 0; n < 30; ++n) c.push_back(std::pow(R, -n) * std::sin((n + 1) * th) / std::sin(th));
  const auto e = mercer_roberts(c);
  CHECK(e.radius == doctest::Approx(R).epsilon(1e-6));
  CHECK(e.angle == doctest::Approx(th * 180 / pi).epsilon(1e-6));
  CHECK_THROWS_AS(mercer_roberts({1, 2, 3}), ValidationError);
}

TEST_CASE("regularisation reproduces the exponential Pade approximant") {
  DerivOp<Rational> g;
  Rational f(1);
  for (int n = 0; n < 5; ++n) {
    g[{n, 0}] = f;
    f /= n + 1;
  }
  const auto r = regularise(g, {{1, 0}, {2, 0}}, 5);
  CHECK(r.den.at({1, 0}) == q(-1, 2));
  CHECK(r.den.at({2, 0}) == q(1, 12));
  CHECK(r.num.at({1, 0}) == q(1, 2));
  CHECK(r.num.at({2, 0}) == q(1, 12));
  const auto back = reexpand(r);
  for (const auto& [k, c] : g) CHECK(back.at(k) == c);
  CHECK_THROWS_AS(regularise(g, {{4, 0}}, 5), ValidationError);
}

TEST_CASE("nonlocal form closes on the tri-continuum model") {
  TrigEmbeddedSpec s;
  s.modes = 3;
  s.N = 11;
  s.order_a = 4;
  auto [b, gap] = eigen_select(harmonic_cell_operator(), 3, 1);
  const auto r = construct(s, b);
  // The U2 equation carries one sixth-order term; nothing survives above that.
  const auto nl = nonlocal_transform(r.model, q(4, 9), 6);
  CHECK(nl.leftover.empty());
  const auto nl5 = nonlocal_transform(r.model, q(4, 9));
  REQUIRE(nl5.leftover.size() == 1);
  CHECK(nl5.leftover[0].first == 2);
  CHECK(*nl.rhs[2].find(Monomial::param(kParamA, 3) * Monomial::amp(0, 6)) == q(-1, 72));
  const Monomial a3 = Monomial::param(kParamA, 3);
  CHECK(nl.rhs[0].find(a3 * Monomial::amp(1, 1)) != nullptr);
  CHECK(*nl.rhs[0].find(a3 * Monomial::amp(1, 1)) == q(-15, 72));
  CHECK(*nl.rhs[0].find(a3 * Monomial::amp(1, 3)) == q(-11, 72));
}

TEST_CASE("fine-grid rate in a uniform medium") {
  CHECK(dns_cell_count(0.25, 2 * pi) == 4);
  CHECK_THROWS_AS(dns_cell_count(0.3 * std::sqrt(2.0), 2 * pi), ValidationError);
  const auto f = sample_function([](double) { return 1.0; }, 2 * pi, 64);
  auto [b, gap] = eigen_select(assemble_cell_operator(f), 1, 1);
  GridEmbeddedSpec s;
  s.kappa = f;
  s.N = 3;
  const auto m = construct(s, b);
  DnsSpec d;
  d.cell = f;
  d.k0 = 0.25;
  const auto rep = dns_validate(d, m.model);
  CHECK(rep.cells == 4);
  CHECK(rep.measured == doctest::Approx(-0.0625).epsilon(1e-3));
  CHECK(rep.predicted == doctest::Approx(-0.0625));
}

}
