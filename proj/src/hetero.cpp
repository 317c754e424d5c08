#include "micromorph/hetero.hpp"

#include "micromorph/errors.hpp"

#include <cmath>
#include <sstream>

namespace micromorph {

namespace {

const Rational kZeroQ(0);

// Truncated product of two a-series of trig polynomials, keeping a^k, k <= top.
std::vector<TrigPoly> series_mul(const std::vector<TrigPoly>& x, const std::vector<TrigPoly>& y,
                                 int top) {
  std::vector<TrigPoly> r(static_cast<std::size_t>(top + 1));
  for (std::size_t i = 0; i < x.size() && static_cast<int>(i) <= top; ++i) {
    if (x[i].is_zero()) continue;
    for (std::size_t j = 0; j < y.size() && static_cast<int>(i + j) <= top; ++j) {
      if (y[j].is_zero()) continue;
      r[i + j] += x[i] * y[j];
    }
  }
  return r;
}

std::vector<TrigPoly> terms_by_power(const std::vector<FieldTerm>& terms, const char* what) {
  std::vector<TrigPoly> out;
  for (const auto& t : terms) {
    if (t.a_power < 0) throw ValidationError(std::string(what) + ": negative power of a");
    if (t.symbol >= 0) throw ValidationError(std::string(what) + ": free symbols not allowed");
    if (t.harmonic < 0) throw ValidationError(std::string(what) + ": negative harmonic");
    if (out.size() <= static_cast<std::size_t>(t.a_power)) out.resize(t.a_power + 1);
    out[t.a_power].add(t.harmonic, t.parity, t.coeff);
  }
  if (out.empty()) out.resize(1);
  return out;
}

}  // namespace

int checked_harmonic(double h) {
  if (!std::isfinite(h) || h < 0 || std::fabs(h - std::round(h)) > 1e-12)
    throw ValidationError("non-periodic heterogeneity: harmonic " + std::to_string(h) +
                          " is not a non-negative integer");
  return static_cast<int>(std::lround(h));
}

std::string HeterogeneitySpec::describe() const {
  if (kind == Kind::reciprocal_cos) return "kappa = 1/(1 + a cos q)";
  auto side = [](const std::vector<FieldTerm>& ts) {
    std::ostringstream os;
    bool first = true;
    for (const auto& t : ts) {
      if (!first) os << " + ";
      first = false;
      os << to_string(t.coeff);
      if (t.a_power) os << "*a^" << t.a_power;
      if (t.harmonic) os << (t.parity == Parity::cos ? "*cos(" : "*sin(") << t.harmonic << "q)";
    }
    return first ? std::string("1") : os.str();
  };
  return "kappa = (" + side(numerator) + ")/(" + side(denominator) + ")";
}

double HeterogeneitySpec::eval(double q, double a) const {
  if (kind == Kind::reciprocal_cos) return 1.0 / (1.0 + a * std::cos(q));
  auto sum = [&](const std::vector<FieldTerm>& ts) {
    double v = ts.empty() ? 1.0 : 0.0;
    for (const auto& t : ts)
      v += t.coeff.get_d() * std::pow(a, t.a_power) *
           (t.parity == Parity::cos ? std::cos(t.harmonic * q) : std::sin(t.harmonic * q));
    return v;
  };
  return sum(numerator) / sum(denominator);
}

const Rational& TrigSeriesField::coeff(int n, Parity p, int k) const {
  if (k < 0 || k >= static_cast<int>(by_power.size())) return kZeroQ;
  return by_power[static_cast<std::size_t>(k)].coeff(n, p);
}

double TrigSeriesField::eval(double q, double a) const {
  double v = 0, ak = 1;
  for (const auto& t : by_power) {
    v += ak * t.eval(q);
    ak *= a;
  }
  return v;
}

GradientSeries<TrigPoly> TrigSeriesField::as_series(const Truncation& t) const {
  GradientSeries<TrigPoly> s(t);
  for (std::size_t k = 0; k < by_power.size(); ++k)
    s.add_term(Monomial::param(kParamA, static_cast<int>(k)), by_power[k]);
  return s;
}

TrigSeriesField expand_heterogeneity(const HeterogeneitySpec& spec, int order_a) {
  if (order_a < 0) throw ValidationError("order_a must be non-negative");
  std::vector<TrigPoly> num, den;
  if (spec.kind == HeterogeneitySpec::Kind::reciprocal_cos) {
    num = {TrigPoly(1)};
    den = {TrigPoly(1), TrigPoly::harmonic(1, Parity::cos)};
  } else {
    num = spec.numerator.empty() ? std::vector<TrigPoly>{TrigPoly(1)}
                                 : terms_by_power(spec.numerator, "numerator");
    den = spec.denominator.empty() ? std::vector<TrigPoly>{TrigPoly(1)}
                                   : terms_by_power(spec.denominator, "denominator");
  }
  // Q(q,0) must be a nonzero constant so that 1/Q expands as a series in a.
  const TrigPoly& q0 = den[0];
  if (q0.degree() != 0)
    throw ValidationError("normalisation: denominator at a=0 must be a nonzero constant");
  Rational inv0 = 1 / q0.coeff(0, Parity::cos);
  if (!(num[0] == TrigPoly(q0.coeff(0, Parity::cos))))
    throw ValidationError("normalisation: heterogeneity at a=0 must equal 1");

  // 1/Q = inv0 * sum_j (-(Q - q0) inv0)^j.
  std::vector<TrigPoly> w(den.size());
  for (std::size_t k = 1; k < den.size(); ++k) {
    w[k] = den[k];
    w[k] *= -inv0;
  }
  std::vector<TrigPoly> recip(static_cast<std::size_t>(order_a + 1));
  std::vector<TrigPoly> power(static_cast<std::size_t>(order_a + 1));
  power[0] = TrigPoly(1);
  for (int j = 0; j <= order_a; ++j) {
    for (int k = 0; k <= order_a; ++k) recip[k] += power[k];
    power = series_mul(power, w, order_a);
  }
  for (auto& t : recip) t *= inv0;

  TrigSeriesField f;
  f.order_a = order_a;
  f.by_power = series_mul(num, recip, order_a);
  return f;
}

GradientSeries<TrigPoly> trig_terms_series(const std::vector<FieldTerm>& terms,
                                           const Truncation& t) {
  GradientSeries<TrigPoly> s(t);
  for (const auto& ft : terms) {
    Monomial m = Monomial::param(kParamA, ft.a_power);
    if (ft.symbol >= 0) m = m * Monomial::param(ft.symbol, 1);
    s.add_term(m, TrigPoly::harmonic(ft.harmonic, ft.parity, ft.coeff));
  }
  return s;
}

void GridField1D::validate_coefficient() const {
  if (n() < 4 || n() % 2) throw ValidationError("grid count must be even and at least 4");
  if (!(ell > 0)) throw ValidationError("cell length must be positive");
  for (int j = 0; j < n(); ++j) {
    if (!std::isfinite(samples[j])) throw ValidationError("non-finite grid sample");
    if (samples[j] <= 0) throw ValidationError("coefficient samples must be positive");
  }
}

std::string GridField1D::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "theta,value\n";
  for (int j = 0; j < n(); ++j) os << point(j) << ',' << samples[j] << '\n';
  return os.str();
}

GridField1D sample_laminate(double ell, double eta, double chi, int n) {
  if (!(ell > 0) || !(eta > 0) || !(eta < ell)) throw ValidationError("need 0 < eta < ell");
  if (!(chi > 0)) throw ValidationError("insulation strength chi must be positive");
  if (n < 4 || n % 2) throw ValidationError("grid count must be even and at least 4");
  GridField1D f;
  f.ell = ell;
  f.samples.resize(n);
  const double kappa0 = eta / (chi * ell);
  for (int j = 0; j < n; ++j) {
    double q = f.point(j);
    // Distance-like measure from the layer centre at +-ell/2.
    bool layer = std::fabs(ell / std::numbers::pi * std::cos(std::numbers::pi * q / ell)) < eta / 2;
    f.samples[j] = layer ? kappa0 : 1.0;
  }
  if (laminate_layer_points(f) < 2)
    throw ValidationError("layer thinner than two grid cells: discretisation unfaithful");
  return f;
}

int laminate_layer_points(const GridField1D& f) {
  double top = f.samples.maxCoeff();
  int c = 0;
  for (int j = 0; j < f.n(); ++j) c += f.samples[j] < top;
  return c;
}

GridField1D sample_function(const std::function<double(double)>& fn, double ell, int n) {
  GridField1D f;
  f.ell = ell;
  f.samples.resize(n);
  for (int j = 0; j < n; ++j) f.samples[j] = fn(f.point(j));
  return f;
}

double ElasticCell::lame_consistency() const {
  double err = 0;
  for (int i = 0; i < rows(); ++i)
    for (int j = 0; j < cols(); ++j) {
      double e = E(i, j), v = nu(i, j);
      err = std::max(err, std::fabs(lambda(i, j) - v * e / ((1 + v) * (1 - 2 * v))));
      err = std::max(err, std::fabs(mu(i, j) - e / (2 * (1 + v))));
    }
  return err;
}

double ElasticCell::harmonic_mean_E() const {
  return static_cast<double>(E.size()) / E.cwiseInverse().sum();
}

double sinpattern(double x, double y) {
  using std::numbers::pi;
  double s = 0.5 * (std::cos(pi * (x - y)) - std::cos(pi * (x + y)));
  return (0.01 + std::fabs(s)) / pi;
}

ElasticCell build_elastic_cell(const Field2D& E, const Field2D& nu, int nx, int ny) {
  if (nx < 2 || ny < 2) throw ValidationError("elastic cell needs at least 2x2 cells");
  if (nx != ny) throw ValidationError("elastic cell must be square (nx == ny)");
  ElasticCell c;
  c.nx = nx;
  c.ny = ny;
  c.dx = 1.0 / nx;
  c.dy = 1.0 / ny;
  int R = c.rows(), C = c.cols();
  c.E.resize(R, C);
  c.nu.resize(R, C);
  c.lambda.resize(R, C);
  c.mu.resize(R, C);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) {
      double e = E(c.x(i), c.y(j));
      double v = nu(c.x(i), c.y(j));
      if (!(e > 0)) throw ValidationError("Young's modulus must be positive");
      if (!(v < 0.5)) throw ValidationError("Poisson ratio >= 1/2: incompressibility singularity");
      if (!(v > 0)) throw ValidationError("Poisson ratio must be positive");
      c.E(i, j) = e;
      c.nu(i, j) = v;
      c.lambda(i, j) = v * e / ((1 + v) * (1 - 2 * v));
      c.mu(i, j) = e / (2 * (1 + v));
    }
  return c;
}

}  // namespace micromorph
