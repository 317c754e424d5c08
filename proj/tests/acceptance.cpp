/**
 * @file acceptance.cpp
 * @brief End-to-end acceptance run: one PASS/FAIL line per criterion.
 *
 * Usage: acceptance [criterion ...]   (default: all)
 * Exit status is 1 when any selected criterion fails.
 */
#include "micromorph/analysis.hpp"
#include "micromorph/fracmod.hpp"
#include "micromorph/homog1d.hpp"
#include "micromorph/homog2d.hpp"
#include "random_series.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace micromorph;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  /// Records one comparison; the first few failures are kept in the detail.
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "mismatch:";
      detail << " " << what;
    }
    pass = pass && ok;
  }
  void note(const std::string& s) { detail << (detail.tellp() > 0 ? "; " : "") << s; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

Monomial amp(int mode, int dx = 0, int dy = 0) { return Monomial::amp(mode, dx, dy); }
Monomial vel(int mode, int dx = 0) { return Monomial::amp(mode, dx, 0, AmpKind::velocity); }
Monomial ap(int k) { return Monomial::param(kParamA, k); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double v, double ref, double tol) { return std::fabs(v - ref) <= tol; }

/// Agreement to `digits` significant digits: |v - ref| at most half a unit
/// in the last quoted digit.
bool sig_match(double v, double ref, int digits) {
  const double unit = std::pow(10.0, std::floor(std::log10(std::fabs(ref))) - digits + 1);
  return std::fabs(v - ref) <= 0.5 * unit * (1 + 1e-9);
}

std::string term_name(int mode, const Monomial& m) {
  std::string p = param_string(m, default_param_names());
  return "G" + std::to_string(mode) + "[" + (p.empty() ? "" : p + "*") + amp_string(m.amp_part()) + "]";
}

void expect_exact(Outcome& o, const HomogenisedModel<Rational>& model, int mode, const Monomial& m,
                  const Rational& ref) {
  const Rational got = model.coeff(mode, m);
  o.expect(got == ref, term_name(mode, m) + "=" + to_string(got) + " (want " + to_string(ref) + ")");
}

void expect_near(Outcome& o, const HomogenisedModel<double>& model, int mode, const Monomial& m,
                 double ref, double tol) {
  const double got = model.coeff(mode, m);
  o.expect(within(got, ref, tol), term_name(mode, m) + "=" + fmt("%.5g", got) + " (want " + fmt("%g", ref) + ")");
}

void expect_sig(Outcome& o, const HomogenisedModel<double>& model, int mode, const Monomial& m,
                double ref, int digits) {
  const double got = model.coeff(mode, m);
  o.expect(sig_match(got, ref, digits), term_name(mode, m) + "=" + fmt("%.5g", got) + " (want " + fmt("%g", ref) + ")");
}

// ---------------------------------------------------------------------------
// Shared constructions

EigenBasis harmonic_basis(int M, int alpha = 1) { return eigen_select(harmonic_cell_operator(), M, alpha).first; }

ConstructResult<TrigPoly, Rational> trig(int M, int N, int order_a, int alpha = 1) {
  TrigEmbeddedSpec s;
  s.modes = M;
  s.N = N;
  s.order_a = order_a;
  s.alpha = alpha;
  return construct(s, harmonic_basis(M, alpha));
}

/// Tri-continuum model to high gradient order, used by criteria 4 and 5.
const HomogenisedModel<Rational>& high_gradient_model() {
  static const HomogenisedModel<Rational> m = trig(3, 23, 4).model;
  return m;
}

GridField1D laminate(int n = 128) { return sample_laminate(2 * pi, 0.06 * 2 * pi, 1.0, n); }

ConstructResult<Eigen::VectorXd, double> grid(const GridField1D& f, int M, int N, bool y = true) {
  auto [b, gap] = eigen_select(assemble_cell_operator(f), M, 1);
  GridEmbeddedSpec s;
  s.kappa = f;
  s.modes = M;
  s.N = N;
  s.y_diffusion = y;
  return construct(s, b, 100, 1e-8);
}

const ElasticCell& elastic_cell() {
  static const ElasticCell c = build_elastic_cell(sinpattern, [](double, double) { return 0.4; }, 10, 10);
  return c;
}

Elastic2dResult elastic(int M, int N) {
  Elastic2dOptions o;
  o.modes = M;
  o.N = N;
  return construct_2d(elastic_cell(), o);
}

// ---------------------------------------------------------------------------
// Criteria

Outcome c1_tri_continuum() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = trig(3, 3, 3).model;
  const double secs = seconds_since(t0);
  expect_exact(o, m, 0, amp(1, 1) * ap(1), q(-1, 2));
  expect_exact(o, m, 0, amp(0, 2), q(1));
  expect_exact(o, m, 0, amp(0, 2) * ap(2), q(1, 2));
  expect_exact(o, m, 0, amp(2, 2) * ap(1), q(-1, 2));
  expect_exact(o, m, 1, amp(1) * ap(2), q(-5, 12));
  expect_exact(o, m, 1, amp(2, 1) * ap(2), q(-2, 9));
  expect_exact(o, m, 1, amp(1, 2) * ap(2), q(-17, 54));
  expect_exact(o, m, 2, amp(2) * ap(2), q(1, 12));
  expect_exact(o, m, 2, amp(1, 1) * ap(2), q(2, 9));
  expect_exact(o, m, 2, amp(2, 2) * ap(2), q(5, 27));
  o.expect(secs < 10, "runtime " + fmt("%.1f s", secs));
  o.note("runtime " + fmt("%.2f s", secs));
  return o;
}

Outcome c2_high_order_in_a() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = trig(3, 3, 11).model;
  const double secs = seconds_since(t0);
  expect_exact(o, m, 0, amp(0, 2), q(1));
  expect_exact(o, m, 0, amp(0, 2) * ap(2), q(1, 2));
  expect_exact(o, m, 0, amp(0, 2) * ap(4), q(5, 24));
  expect_exact(o, m, 1, amp(1), q(-1));
  expect_exact(o, m, 1, amp(1) * ap(2), q(-5, 12));
  expect_exact(o, m, 1, amp(1) * ap(4), q(-437, 3456));
  expect_exact(o, m, 2, amp(2), q(-1));
  expect_exact(o, m, 2, amp(2) * ap(2), q(1, 12));
  expect_exact(o, m, 2, amp(2) * ap(4), q(-53, 3456));
  o.expect(secs < 60, "runtime " + fmt("%.1f s", secs));
  o.note("runtime " + fmt("%.2f s", secs));
  return o;
}

Outcome c3_mercer_roberts() {
  Outcome o;
  const int order_a = 32;
  const auto m = trig(3, 3, order_a).model;
  bool oblique = false, imaginary = false;
  for (int mode = 0; mode < 3; ++mode) {
    const Monomial target = mode == 0 ? amp(0, 2) : amp(mode);
    std::vector<double> c;
    for (int k = 0; k < order_a; k += 2) c.push_back(to_double(m.coeff(mode, ap(k) * target)));
    const auto e = mercer_roberts(c, 2);
    o.note("G" + std::to_string(mode) + ": R=" + fmt("%.4f", e.radius) + " at " + fmt("%.2f deg", e.angle));
    if (within(e.angle, 23, 3)) {
      oblique = true;
      o.expect(within(e.radius, 1.21, 0.05), "oblique radius " + fmt("%.4f", e.radius));
    } else if (within(e.angle, 90, 3)) {
      imaginary = true;
      o.expect(within(e.radius, 1.57, 0.05), "imaginary radius " + fmt("%.4f", e.radius));
    } else {
      o.expect(false, "angle " + fmt("%.2f", e.angle) + " matches neither singularity");
    }
  }
  o.expect(oblique && imaginary, "both singularities found");
  return o;
}

Outcome c4_domb_sykes() {
  Outcome o;
  const auto& m = high_gradient_model();
  // a^2 U1 d_x^(2j) coefficients as a series in k^2 (d_x^2 -> -k^2); the
  // first two belong to the numerator polynomial and are skipped.
  std::vector<double> c;
  for (int j = 2; 2 * j < m.trunc.grad; ++j)
    c.push_back(to_double(m.coeff(1, ap(2) * amp(1, 2 * j))) * (j % 2 ? -1 : 1));
  const auto e = domb_sykes(c, 2);
  o.expect(within(e.radius, 1.5, 0.015), "radius " + fmt("%.5f", e.radius));
  o.note("pole radius in k " + fmt("%.5f", e.radius) + " from " + std::to_string(c.size()) + " coefficients");
  return o;
}

Outcome c5_nonlocal_closure() {
  Outcome o;
  const auto nl = nonlocal_transform(high_gradient_model(), q(4, 9), 6);
  o.expect(nl.leftover.empty(), "terms above sixth order survive");
  struct Displayed {
    int mode;
    int a_power;
    int amp_mode;
    int dx;
    Rational coef;
  };
  // Displayed coefficients of the a^2 and a^3 parts after multiplying by (1 + 4/9 d_x^2).
  const std::vector<Displayed> shown = {
      {0, 3, 1, 1, q(-15, 72)}, {0, 3, 1, 3, q(-11, 72)}, {0, 3, 1, 5, q(-3, 72)},
      {0, 3, 2, 2, q(-11, 72)}, {0, 3, 2, 4, q(-5, 72)},
      {1, 2, 1, 0, q(-15, 36)}, {1, 2, 1, 2, q(-18, 36)}, {1, 2, 1, 4, q(-5, 36)},
      {1, 2, 2, 1, q(-4, 18)},  {1, 2, 2, 3, q(-4, 18)},  {1, 2, 2, 5, q(-1, 18)},
      {1, 3, 0, 1, q(60, 144)}, {1, 3, 0, 3, q(56, 144)}, {1, 3, 0, 5, q(13, 144)},
      {2, 2, 2, 0, q(3, 36)},   {2, 2, 2, 2, q(8, 36)},   {2, 2, 2, 4, q(3, 36)},
      {2, 2, 1, 1, q(4, 18)},   {2, 2, 1, 3, q(4, 18)},   {2, 2, 1, 5, q(1, 18)},
      {2, 3, 0, 2, q(-22, 72)}, {2, 3, 0, 4, q(-12, 72)}, {2, 3, 0, 6, q(-1, 72)},
  };
  int matched = 0;
  for (const auto& d : shown) {
    const Monomial mono = ap(d.a_power) * amp(d.amp_mode, d.dx);
    const Rational* got = nl.rhs[d.mode].find(mono);
    const Rational v = got ? *got : Rational(0);
    o.expect(v == d.coef, term_name(d.mode, mono) + "=" + to_string(v) + " (want " + to_string(d.coef) + ")");
    matched += v == d.coef;
  }
  o.note(std::to_string(matched) + "/" + std::to_string(shown.size()) + " displayed coefficients match");
  return o;
}

Outcome c6_nonlinear() {
  Outcome o;
  const Monomial g = Monomial::param(kParamGamma);
  const Monomial c1 = Monomial::param(2), c2 = Monomial::param(3);
  for (int alpha : {1, 2}) {
    TrigEmbeddedSpec s;
    s.alpha = alpha;
    s.N = 3;
    s.order_a = 3;
    s.order_gamma = 2;
    s.eta = std::vector<FieldTerm>{{1, Parity::cos, 1, 0, 2}, {2, Parity::sin, 1, 0, 3}};
    const auto m = construct(s, harmonic_basis(1, alpha)).model;
    // -1/4 gamma d_x(c1 a U0^2 + c2 a^2 U0 U0x), expanded.
    HomogenisedModel<Rational> want(1, alpha, m.trunc);
    auto& w = want.rhs[0];
    w.add_term(amp(0, 2), q(1));
    w.add_term(g * c1 * ap(1) * amp(0) * amp(0, 1), q(-1, 2));
    w.add_term(g * c2 * ap(2) * amp(0) * amp(0, 2), q(-1, 4));
    w.add_term(g * c2 * ap(2) * amp(0, 1) * amp(0, 1), q(-1, 4));
    if (alpha == 2) {
      // +1/2 gamma d_x(c1 a V0^2 + 3 c2 a^2 V0 V0x), expanded.
      w.add_term(g * c1 * ap(1) * vel(0) * vel(0, 1), q(1));
      w.add_term(g * c2 * ap(2) * vel(0) * vel(0, 2), q(3, 2));
      w.add_term(g * c2 * ap(2) * vel(0, 1) * vel(0, 1), q(3, 2));
    }
    o.expect(m.rhs[0] == want.rhs[0], "alpha=" + std::to_string(alpha) + " model differs");
    o.note("alpha=" + std::to_string(alpha) + ": " + std::to_string(m.rhs[0].size()) + " terms");
  }
  return o;
}

Outcome c7_laminate() {
  Outcome o;
  const auto f = laminate();
  auto [b2, gap] = eigen_select(assemble_cell_operator(f), 2, 1);
  o.expect(within(b2.lambda[1], -0.4597, 5e-4), "lambda_1=" + fmt("%.5f", b2.lambda[1]));

  const auto one = grid(f, 1, 5);
  expect_near(o, one.model, 0, amp(0, 2), 0.5386, 5e-4);
  expect_near(o, one.model, 0, amp(0, 0, 2), 0.9486, 5e-4);
  expect_near(o, one.model, 0, amp(0, 4), 0.3379, 5e-4);
  expect_near(o, one.model, 0, amp(0, 2, 2), -0.1381, 5e-4);
  expect_near(o, one.model, 0, amp(0, 0, 4), 0.0145, 5e-4);

  const auto bi = grid(f, 2, 5);
  struct Ref {
    int mode;
    Monomial m;
    double v;
  };
  const std::vector<Ref> refs = {
      {1, amp(1), -0.4597},       {0, amp(1, 1), 0.3552},      {1, amp(0, 1), -0.3552},
      {0, amp(0, 2), 0.8130},     {0, amp(0, 0, 2), 0.9486},   {0, amp(1, 0, 2), 0.0087},
      {0, amp(1, 3), 1.063},      {0, amp(1, 1, 2), 0.2159},   {1, amp(1, 2), -2.620},
      {1, amp(1, 0, 2), 0.9742},  {1, amp(0, 3), -1.736},      {1, amp(1, 4), -17.11},
  };
  for (const auto& r : refs) {
    const double got = bi.model.coeff(r.mode, r.m);
    o.expect(within(got, r.v, 0.002) || sig_match(got, r.v, 3),
             term_name(r.mode, r.m) + "=" + fmt("%.5g", got) + " (want " + fmt("%g", r.v) + ")");
  }
  const int it1 = one.model.meta.iterations, it2 = bi.model.meta.iterations;
  o.expect(it1 <= 40 && it2 <= 40, "iterations " + std::to_string(it1) + "/" + std::to_string(it2));
  o.note("iterations one-mode " + std::to_string(it1) + ", bi-continuum " + std::to_string(it2));
  return o;
}

Outcome c8_thin_layer() {
  Outcome o;
  const double chis[] = {1.0 / 3, 1.0, 3.0, 9.0};
  const double K1[] = {2.46, 2.03, 1.74, 1.63}, K3[] = {5.23, 4.91, 4.78, 4.74};
  for (int i = 0; i < 4; ++i) {
    const auto s = thin_layer_spectrum(chis[i], 3);
    o.expect(within(s[1].K, K1[i], 0.01), "K1(chi=" + fmt("%.3g", chis[i]) + ")=" + fmt("%.4f", s[1].K));
    o.expect(within(s[3].K, K3[i], 0.01), "K3(chi=" + fmt("%.3g", chis[i]) + ")=" + fmt("%.4f", s[3].K));
  }
  return o;
}

Outcome c9_regularisation() {
  Outcome o;
  const auto one = grid(laminate(), 1, 7);
  const auto g = one_mode_operator(one.model);
  const auto r = regularise(g, {{2, 0}, {0, 2}}, 5);
  auto chk = [&](const DerivOp<double>& op, std::pair<int, int> k, double ref, double tol, const char* what) {
    const auto it = op.find(k);
    const double v = it == op.end() ? 0.0 : it->second;
    o.expect(within(v, ref, tol), std::string(what) + "(" + std::to_string(k.first) + "," +
                                      std::to_string(k.second) + ")=" + fmt("%.4f", v));
  };
  chk(r.den, {2, 0}, -0.63, 0.01, "den");
  chk(r.den, {0, 2}, -0.02, 0.01, "den");
  chk(r.num, {2, 0}, 0.54, 0.01, "num");
  chk(r.num, {0, 2}, 0.95, 0.01, "num");
  chk(r.num, {2, 2}, -0.74, 0.01, "num");
  const auto h = regularise(g, {{2, 0}, {0, 2}, {4, 0}, {2, 2}, {0, 4}}, 7);
  chk(h.den, {4, 0}, 2.07, 0.02, "den");
  chk(h.num, {4, 2}, 2.33, 0.02, "num");
  o.note("den 1 " + fmt("%+.4f", r.den.at({2, 0})) + " dx2 " + fmt("%+.4f", r.den.at({0, 2})) + " dy2; higher dx4 " +
         fmt("%.4f", h.den.at({4, 0})) + ", num dx4dy2 " + fmt("%.4f", h.num.at({4, 2})));
  return o;
}

Outcome c10_elasticity() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_cell_operator(elastic_cell()).matrix,
                                                    Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues().reverse();
  const double want_ev[] = {-0.6431, -1.2653, -1.2886};
  for (int i = 0; i < 3; ++i)
    o.expect(within(ev[i + 2], want_ev[i], 0.002), "eigenvalue " + fmt("%.5f", ev[i + 2]));

  const auto m2 = elastic(2, 3).model;
  expect_near(o, m2, 0, amp(0, 2), 0.144, 0.001);
  expect_near(o, m2, 0, amp(0, 0, 2), 0.020, 0.001);
  expect_near(o, m2, 0, amp(1, 1, 1), 0.092, 0.001);

  const auto m4 = elastic(2, 5).model;
  expect_sig(o, m4, 0, amp(0, 4), 0.0037, 2);
  expect_sig(o, m4, 0, amp(0, 2, 2), 0.0042, 2);

  const auto m3 = elastic(3, 3).model;
  expect_sig(o, m3, 2, amp(2), -0.643, 2);
  expect_sig(o, m3, 0, amp(2, 2), 0.0021, 2);
  expect_sig(o, m3, 0, amp(2, 1, 1), -0.0024, 2);
  expect_sig(o, m3, 2, amp(0, 2), 0.0032, 2);
  expect_sig(o, m3, 2, amp(0, 1, 1), -0.0023, 2);
  expect_sig(o, m3, 2, amp(2, 2), -0.031, 2);

  const auto red = adiabatic_reduce(m3, {0, 1}, 2);
  const auto& slaved = red.slaved.at(0);  // the one dropped mode, U2
  auto sl = [&](const Monomial& m) {
    const double* c = slaved.find(m);
    return c ? *c : 0.0;
  };
  const double s_xx = sl(amp(0, 2)), s_xy = sl(amp(0, 1, 1));
  o.expect(within(s_xx, 0.0049, 0.00049), "U2 <- U0xx " + fmt("%.5f", s_xx));
  o.expect(within(s_xy, -0.0035, 0.00035), "U2 <- U0xy " + fmt("%.5f", s_xy));
  const double secs = seconds_since(t0);
  o.expect(secs < 300, "runtime " + fmt("%.0f s", secs));
  o.note("U2 ~ " + fmt("%.5f", s_xx) + " U0xx " + fmt("%+.5f", s_xy) + " U0xy; runtime " + fmt("%.1f s", secs));
  return o;
}

Outcome c11_transitivity() {
  Outcome o;
  // Harmonic cells retain sin/cos pairs together, so the exact multi-mode
  // model is M=3.  Quasi-static elimination is exact through d_x^2, the
  // order both models share.
  const auto red3 = adiabatic_reduce(trig(3, 3, 3).model, {0}, 2);
  o.expect(red3.model.rhs[0] == trig(1, 3, 3).model.rhs[0], "exact reduction");
  const auto f = laminate();
  const auto direct = grid(f, 1, 3).model;
  const auto bi = adiabatic_reduce(grid(f, 2, 5).model, {0}, 2);
  const auto& red = bi.model;
  const double* slave = bi.slaved.at(0).find(amp(0, 1));
  o.expect(slave && within(*slave, -0.77, 0.005), "U1 <- U0x");
  for (auto [m, ref] : {std::pair{amp(0, 2), 0.54}, std::pair{amp(0, 0, 2), 0.95}}) {
    const double r = red.coeff(0, m), d = direct.coeff(0, m);
    o.expect(within(r, d, 0.005) && within(r, ref, 0.005),
             term_name(0, m) + " reduced " + fmt("%.4f", r) + " direct " + fmt("%.4f", d));
  }
  o.note("laminate U1 ~ " + fmt("%.4f", slave ? *slave : 0.0) + " U0x, U0xx reduced " + fmt("%.4f", red.coeff(0, amp(0, 2))) + " vs direct " +
         fmt("%.4f", direct.coeff(0, amp(0, 2))));
  return o;
}

Outcome c12_eigen_sheet() {
  Outcome o;
  // u1t = -u1x - u1 + u2, u2t = u2x + u1 - u2.
  HomogenisedModel<Rational> m(2, 1, Truncation::make(12, 1, 1));
  m.rhs[0].add_term(amp(0, 1), q(-1));
  m.rhs[0].add_term(amp(0), q(-1));
  m.rhs[0].add_term(amp(1), q(1));
  m.rhs[1].add_term(amp(1, 1), q(1));
  m.rhs[1].add_term(amp(0), q(1));
  m.rhs[1].add_term(amp(1), q(-1));
  const auto d = dispersion_exact(m, 8, ParamValues<Rational>{});
  int slow = -1;
  for (std::size_t i = 0; i < d.lambda0.size(); ++i)
    if (d.lambda0[i] == 0) slow = static_cast<int>(i);
  o.expect(slow >= 0, "no sheet through lambda = 0");
  if (slow < 0) return o;
  const auto& s = d.sheets[slow];
  o.expect(s[2] == q(1, 2), "s^2: " + to_string(s[2]));
  o.expect(s[4] == q(-1, 8), "s^4: " + to_string(s[4]));
  o.expect(s[6] == q(1, 16), "s^6: " + to_string(s[6]));
  o.expect(s[1] == 0 && s[3] == 0 && s[5] == 0, "odd coefficients");
  o.note("slow sheet " + to_string(s[2]) + " s^2 + " + to_string(s[4]) + " s^4 + " + to_string(s[6]) + " s^6");
  return o;
}

Outcome c13_mittag_leffler() {
  Outcome o;
  double e1 = 0, e2 = 0, e3 = 0;
  for (double r = 0.25; r <= 5; r += 0.25)
    for (int k = 0; k < 16; ++k) {
      const auto z = std::polar(r, 2 * pi * k / 16);
      e1 = std::max(e1, std::abs(mittag_leffler(1, 1, z) - std::exp(z)) / std::abs(std::exp(z)));
    }
  for (double t = 0.5; t <= 50; t += 0.5) e2 = std::max(e2, std::fabs(mittag_leffler(2, 1, -t * t) - std::cos(t)));
  for (double t : {101.0, 200.0, 500.0, 1000.0}) {
    const double asym = std::pow(t, -0.5) / std::tgamma(0.5);
    e3 = std::max(e3, std::fabs(e_alpha(0.5, 0, t) / asym - 1));
  }
  o.expect(e1 < 1e-12, "E_{1,1} rel error " + fmt("%.2e", e1));
  o.expect(e2 < 1e-10, "E_{2,1} error " + fmt("%.2e", e2));
  o.expect(e3 < 0.05, "asymptote error " + fmt("%.3f", e3));
  o.note("exp " + fmt("%.1e", e1) + ", cos " + fmt("%.1e", e2) + ", t^-1/2 tail " + fmt("%.4f", e3));
  return o;
}

Outcome c14_invariance() {
  Outcome o;
  std::mt19937 rng(7);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  double worst_grid = 0;
  for (int c = 0; c < 10; ++c) {
    TrigEmbeddedSpec s;
    s.alpha = pick(1, 2);
    s.modes = pick(0, 1) ? 1 : 3;  // harmonic cells keep sin/cos pairs together
    s.N = pick(2, 5);
    s.order_a = pick(1, 4);
    if (s.modes == 1 || s.alpha == 1)
      if (pick(0, 1)) {
        s.order_gamma = 2;
        s.eta = std::vector<FieldTerm>{{pick(1, 2), pick(0, 1) ? Parity::cos : Parity::sin, 1, 0, 2}};
      }
    const auto r = construct(s, harmonic_basis(s.modes, s.alpha));
    const auto res = embedded_residual(r.field, r.model, prepare(s));
    o.expect(res.empty(), "trig case " + std::to_string(c) + " residual has " + std::to_string(res.size()) + " terms");
  }
  for (int c = 0; c < 10; ++c) {
    // Draw until the retained modes are separated from the rest by a clear
    // spectral gap; without one there is no slow manifold to construct.
    GridEmbeddedSpec s;
    EigenBasis b;
    for (double ratio = 0; ratio < 1.5;) {
      const int n = 32 * pick(1, 2);
      if (pick(0, 1)) {
        const double a = real(0.2, 0.7);
        s.kappa = sample_function([a](double x) { return 1 / (1 + a * std::cos(x)); }, 2 * pi, n);
      } else {
        s.kappa = sample_laminate(2 * pi, real(0.5, 1.0), real(0.3, 9.0), n);
      }
      s.alpha = pick(1, 2);
      s.modes = pick(1, 3);
      s.N = pick(2, 5);
      s.y_diffusion = pick(0, 1);
      GapReport gap;
      std::tie(b, gap) = eigen_select(assemble_cell_operator(s.kappa), s.modes, s.alpha);
      ratio = gap.ratio;
    }
    const auto r = construct(s, b);
    const double R = gradient_weight(s.modes);
    double scale = 1;
    for (double v : r.log) scale = std::max(scale, v);
    const double rel = weighted_norm(embedded_residual(r.field, r.model, s), R) / scale;
    worst_grid = std::max(worst_grid, rel);
    o.expect(rel < 1e-7, "grid case " + std::to_string(c) + " residual " + fmt("%.2e", rel));
  }
  o.note("10 exact cases with empty residual; worst grid relative residual " + fmt("%.1e", worst_grid));
  return o;
}

/// Taylor coefficients in k of the slow Bloch branch, by a Cauchy integral
/// of the continued eigenvalue round a circle in the complex k-plane.
std::vector<double> bloch_taylor(const GridField1D& f, int count) {
  const int P = 64;
  const double r = 0.2;
  std::vector<std::complex<double>> lam(P);
  std::complex<double> prev = bloch_oracle(f, r, 1)[0];
  for (int p = 0; p < P; ++p) {
    const auto k = std::polar(r, 2 * pi * p / P);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bloch_matrix(f, k), false);
    const auto& ev = es.eigenvalues();
    int best = 0;
    for (int i = 1; i < ev.size(); ++i)
      if (std::abs(ev[i] - prev) < std::abs(ev[best] - prev)) best = i;
    lam[p] = prev = ev[best];
  }
  std::vector<double> c(count);
  for (int j = 0; j < count; ++j) {
    std::complex<double> s = 0;
    for (int p = 0; p < P; ++p) s += lam[p] * std::polar(std::pow(r, -j), -2 * pi * p * j / P);
    c[j] = (s / double(P)).real();
  }
  return c;
}

Outcome c15_bloch() {
  Outcome o;
  const int N = 7;
  double worst = 0;
  for (double a : {0.0, 0.3, 0.6}) {
    const auto f = sample_function([a](double x) { return 1 / (1 + a * std::cos(x)); }, 2 * pi, 64);
    const auto model = grid(f, 1, N, false).model;
    const auto sheet = dispersion_exact(model, N, ParamValues<double>{}).sheets.at(0);
    const auto oracle = bloch_taylor(f, N);
    for (int j = 0; j < N; ++j) {
      // Coefficient of k^j is s_j i^j; odd orders vanish by symmetry.
      const double sj = j < static_cast<int>(sheet.size()) ? sheet[j] : 0.0;
      const double model_k = j % 2 ? 0.0 : sj * ((j / 2) % 2 ? -1 : 1);
      const double err = std::fabs(model_k - oracle[j]);
      worst = std::max(worst, err);
      o.expect(err < 1e-6, "a=" + fmt("%.1f", a) + " k^" + std::to_string(j) + " error " + fmt("%.1e", err));
    }
  }
  o.note("worst Taylor coefficient error " + fmt("%.1e", worst));
  return o;
}

Outcome c16_dns_order() {
  Outcome o;
  const auto f = sample_function([](double x) { return 1 / (1 + 0.5 * std::cos(x)); }, 2 * pi, 128);
  for (int N : {2, 4}) {
    // An order-N model keeps derivatives through order N.
    const auto model = grid(f, 1, N + 1).model;
    double err[2];
    int i = 0;
    for (double k0 : {0.2, 0.4}) {
      DnsSpec d;
      d.cell = f;
      d.k0 = k0;
      err[i++] = dns_validate(d, model).rel_error;
    }
    const double ratio = err[1] / err[0], target = std::pow(2.0, N + 1);
    o.expect(ratio >= target / 2 && ratio <= target * 2,
             "N=" + std::to_string(N) + " ratio " + fmt("%.2f", ratio));
    o.note("N=" + std::to_string(N) + ": ratio " + fmt("%.2f", ratio) + " (target " + fmt("%.0f", target) + ")");
  }
  return o;
}

Outcome c17_alpha_independence() {
  Outcome o;
  for (auto [M, N, oa] : {std::tuple{1, 5, 3}, std::tuple{3, 3, 3}, std::tuple{3, 5, 2}}) {
    const auto m1 = trig(M, N, oa, 1).model, m2 = trig(M, N, oa, 2).model;
    for (int m = 0; m < M; ++m)
      o.expect(m1.rhs[m] == m2.rhs[m], "M=" + std::to_string(M) + " N=" + std::to_string(N) + " mode " + std::to_string(m));
  }
  o.note("three exact configurations compared term by term");
  return o;
}

Outcome c18_series_laws() {
  Outcome o;
  const auto r = testing::check_series_laws(1000, 18);
  o.expect(r.cases == 1000 && r.failures == 0, std::to_string(r.failures) + " failing cases");
  o.note(std::to_string(r.cases) + " cases, " + std::to_string(r.failures) + " failures");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"tri-continuum coefficients", c1_tri_continuum}},
      {2, {"high order in a", c2_high_order_in_a}},
      {3, {"Mercer-Roberts singularities", c3_mercer_roberts}},
      {4, {"Domb-Sykes in wavenumber", c4_domb_sykes}},
      {5, {"nonlocal operator closure", c5_nonlocal_closure}},
      {6, {"nonlinear models", c6_nonlinear}},
      {7, {"laminate models", c7_laminate}},
      {8, {"thin-layer spectrum", c8_thin_layer}},
      {9, {"regularisation", c9_regularisation}},
      {10, {"2-D elasticity", c10_elasticity}},
      {11, {"transitivity", c11_transitivity}},
      {12, {"eigen-sheet test system", c12_eigen_sheet}},
      {13, {"Mittag-Leffler", c13_mittag_leffler}},
      {14, {"invariant-manifold residual", c14_invariance}},
      {15, {"Bloch oracle", c15_bloch}},
      {16, {"fine-grid convergence order", c16_dns_order}},
      {17, {"alpha independence", c17_alpha_independence}},
      {18, {"series algebra laws", c18_series_laws}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty())
    for (const auto& [id, c] : criteria) selected.push_back(id);

  int failed = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("criterion %2d: FAIL  unknown criterion\n", id);
      ++failed;
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    std::printf("criterion %2d: %s  %s (%.1f s)  %s\n", id, o.pass ? "PASS" : "FAIL", it->second.first,
                seconds_since(t0), o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
