#include "micromorph/analysis.hpp"

#include "micromorph/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace micromorph {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

namespace {

double magnitude(const Rational& q) { return std::fabs(q.get_d()); }
double magnitude(double x) { return std::fabs(x); }
bool exactly_zero(const Rational& q) { return sgn(q) == 0; }
bool exactly_zero(double x) { return x == 0.0; }

template <class S>
S ipow(const S& x, int n) {
  S r(1);
  for (int i = 0; i < n; ++i) r = S(r * x);
  return r;
}

/// Gaussian elimination with largest-magnitude pivots; exact for Rational.
template <class S>
std::vector<S> solve_dense(std::vector<std::vector<S>> A, std::vector<S> b, const std::string& what) {
  const std::size_t n = b.size();
  double scale = 0;
  for (const auto& row : A)
    for (const auto& x : row) scale = std::max(scale, magnitude(x));
  const double tiny = std::is_same_v<S, double> ? 1e-13 * std::max(scale, 1.0) : 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (magnitude(A[r][c]) > magnitude(A[p][c])) p = r;
    if (exactly_zero(A[p][c]) || magnitude(A[p][c]) <= tiny) throw ValidationError(what);
    std::swap(A[p], A[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || exactly_zero(A[r][c])) continue;
      S f = S(A[r][c] / A[c][c]);
      for (std::size_t k = c; k < n; ++k) A[r][k] = S(A[r][k] - f * A[c][k]);
      b[r] = S(b[r] - f * b[c]);
    }
  }
  for (std::size_t c = 0; c < n; ++c) b[c] = S(b[c] / A[c][c]);
  return b;
}

template <class S>
S param_factor(const Monomial& m, const ParamValues<S>& params) {
  S f(1);
  for (int i = 0; i < kMaxParams; ++i) {
    int p = m.powers[static_cast<std::size_t>(i)];
    if (!p) continue;
    const auto& v = params[static_cast<std::size_t>(i)];
    if (!v) throw ValidationError("no value given for parameter " + default_param_names()[static_cast<std::size_t>(i)]);
    f = S(f * ipow(*v, p));
  }
  return f;
}

void require_linear_term(const Monomial& m) {
  if (m.degree() != 1) throw ValidationError("dispersion needs a linear model");
  if (m.has_velocity()) throw ValidationError("dispersion needs a model without velocity terms");
}

// Univariate polynomial helpers, coefficients by ascending power.
template <class S>
using Poly = std::vector<S>;

template <class S>
Poly<S> poly_mul(const Poly<S>& x, const Poly<S>& y, int max_deg) {
  if (x.empty() || y.empty()) return {};
  Poly<S> r(static_cast<std::size_t>(std::min<int>(max_deg, static_cast<int>(x.size() + y.size()) - 2) + 1), S(0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (exactly_zero(x[i])) continue;
    for (std::size_t j = 0; j < y.size() && static_cast<int>(i + j) <= max_deg; ++j)
      r[i + j] = S(r[i + j] + x[i] * y[j]);
  }
  return r;
}

template <class S>
void poly_add(Poly<S>& x, const Poly<S>& y, const S& scale) {
  if (x.size() < y.size()) x.resize(y.size(), S(0));
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = S(x[i] + scale * y[i]);
}

// Bivariate c[i][j] s^i lambda^j.
template <class S>
using BiPoly = std::vector<std::vector<S>>;

template <class S>
BiPoly<S> bi_mul(const BiPoly<S>& x, const BiPoly<S>& y, int order) {
  BiPoly<S> r(static_cast<std::size_t>(order + 1));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t k = 0; k < y.size() && static_cast<int>(i + k) <= order; ++k) {
      auto prod = poly_mul(x[i], y[k], 1 << 20);
      poly_add(r[i + k], prod, S(1));
    }
  return r;
}

template <class S>
void bi_add(BiPoly<S>& x, const BiPoly<S>& y, const S& scale) {
  if (x.size() < y.size()) x.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) poly_add(x[i], y[i], scale);
}

template <class S>
S poly_eval(const Poly<S>& p, const S& x) {
  S r(0);
  for (std::size_t i = p.size(); i-- > 0;) r = S(r * x + p[i]);
  return r;
}

// lambda-polynomial at s = 0.
template <class S>
Poly<S> at_s0(const CharPoly<S>& p) {
  return p.c.empty() ? Poly<S>{} : p.c[0];
}

template <class S>
Poly<S> poly_derivative(const Poly<S>& p) {
  Poly<S> d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(S(p[i] * S(static_cast<long>(i))));
  return d;
}

// Candidate rational roots from numeric eigenvalues (continued fractions).
Rational rationalise(double x) {
  Rational best(0);
  double r = x;
  long h0 = 1, h1 = 0, k0 = 0, k1 = 1;
  for (int it = 0; it < 20; ++it) {
    double a = std::floor(r);
    long ai = static_cast<long>(a);
    long h2 = ai * h0 + h1, k2 = ai * k0 + k1;
    h1 = h0; h0 = h2; k1 = k0; k0 = k2;
    best = Rational(h0, k0);
    best.canonicalize();
    if (std::fabs(r - a) < 1e-12 || k0 > 100000) break;
    r = 1.0 / (r - a);
  }
  return best;
}

template <class S>
std::vector<S> simple_roots_at_zero(const CharPoly<S>& p, const MatrixXd& A0);

template <>
std::vector<Rational> simple_roots_at_zero(const CharPoly<Rational>& p, const MatrixXd& A0) {
  Poly<Rational> q = at_s0(p), dq = poly_derivative(q);
  Eigen::EigenSolver<MatrixXd> es(A0);
  std::vector<Rational> out;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    cplx e = es.eigenvalues()[i];
    if (std::fabs(e.imag()) > 1e-9) continue;
    Rational r = rationalise(e.real());
    if (sgn(poly_eval(q, r)) != 0 || sgn(poly_eval(dq, r)) == 0) continue;
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

template <>
std::vector<double> simple_roots_at_zero(const CharPoly<double>& p, const MatrixXd& A0) {
  Poly<double> q = at_s0(p), dq = poly_derivative(q);
  Eigen::EigenSolver<MatrixXd> es(A0);
  const double scale = std::max(1.0, A0.cwiseAbs().maxCoeff());
  std::vector<double> out;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    cplx e = es.eigenvalues()[i];
    if (std::fabs(e.imag()) > 1e-9 * scale) continue;
    double r = e.real();
    int mult = 0;
    for (int j = 0; j < es.eigenvalues().size(); ++j) mult += std::abs(es.eigenvalues()[j] - e) < 1e-7 * scale;
    if (mult > 1) continue;
    for (int it = 0; it < 5; ++it) {
      double d = poly_eval(dq, r);
      if (d == 0) break;
      r -= poly_eval(q, r) / d;
    }
    if (std::fabs(poly_eval(dq, r)) < 1e-8 * scale) continue;  // repeated
    bool seen = false;
    for (double o : out) seen = seen || std::fabs(o - r) < 1e-9 * scale;
    if (!seen) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dispersion

template <class S>
std::vector<std::vector<std::vector<S>>> symbol_matrix(const HomogenisedModel<S>& model,
                                                       const ParamValues<S>& params, Axis axis) {
  const auto M = static_cast<std::size_t>(model.modes);
  std::vector<std::vector<Poly<S>>> A(M, std::vector<Poly<S>>(M));
  for (std::size_t m = 0; m < M; ++m)
    for (const auto& [mono, c] : model.rhs.at(m).terms()) {
      require_linear_term(mono);
      const DerivKey& f = mono.factors.front();
      int along = axis == Axis::x ? f.dx : f.dy;
      int across = axis == Axis::x ? f.dy : f.dx;
      if (across) continue;
      Poly<S>& e = A[m].at(f.mode);
      if (static_cast<int>(e.size()) <= along) e.resize(static_cast<std::size_t>(along + 1), S(0));
      e[static_cast<std::size_t>(along)] = S(e[static_cast<std::size_t>(along)] + c * param_factor(mono, params));
    }
  return A;
}

template <class S>
CharPoly<S> characteristic_polynomial(const HomogenisedModel<S>& model, int order,
                                      const ParamValues<S>& params, Axis axis) {
  if (order < 0) throw ValidationError("dispersion order must be non-negative");
  auto A = symbol_matrix(model, params, axis);
  const int M = model.modes;
  // Entries of lambda I - A(s) as bivariate polynomials.
  std::vector<std::vector<BiPoly<S>>> E(static_cast<std::size_t>(M), std::vector<BiPoly<S>>(static_cast<std::size_t>(M)));
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < M; ++n) {
      BiPoly<S>& e = E[m][n];
      const Poly<S>& a = A[m][n];
      e.resize(static_cast<std::size_t>(order + 1));
      for (std::size_t i = 0; i < a.size() && static_cast<int>(i) <= order; ++i) e[i] = {S(-a[i])};
      if (m == n) {
        if (e[0].size() < 2) e[0].resize(2, S(0));
        e[0][1] = S(e[0][1] + S(1));
      }
    }
  std::vector<int> perm(static_cast<std::size_t>(M));
  std::iota(perm.begin(), perm.end(), 0);
  BiPoly<S> det(static_cast<std::size_t>(order + 1));
  do {
    int inversions = 0;
    for (int i = 0; i < M; ++i)
      for (int j = i + 1; j < M; ++j) inversions += perm[i] > perm[j];
    BiPoly<S> term{{S(1)}};
    for (int i = 0; i < M && !term.empty(); ++i) term = bi_mul(term, E[i][perm[i]], order);
    bi_add(det, term, S(inversions % 2 ? -1 : 1));
  } while (std::next_permutation(perm.begin(), perm.end()));
  CharPoly<S> p;
  p.order = order;
  p.c = std::move(det);
  return p;
}

template <class S>
std::vector<S> sheet_series(const CharPoly<S>& p, const S& lambda0) {
  Poly<S> q0 = at_s0(p);
  S dP = poly_eval(poly_derivative(q0), lambda0);
  double scale = 1;
  for (const auto& c : q0) scale = std::max(scale, magnitude(c));
  if (exactly_zero(dP) || magnitude(dP) < 1e-10 * scale)
    throw ValidationError("sheet base point is not a simple root");
  if (magnitude(poly_eval(q0, lambda0)) > (std::is_same_v<S, double> ? 1e-8 * scale : 0.0))
    throw ValidationError("sheet base point is not a root at s = 0");
  std::vector<S> L{lambda0};
  for (int n = 1; n <= p.order; ++n) {
    // Coefficient of s^n in P(s, L(s)) with the current partial sheet.
    std::vector<Poly<S>> pw{Poly<S>{S(1)}};
    S coef(0);
    for (std::size_t i = 0; i < p.c.size() && static_cast<int>(i) <= n; ++i) {
      const Poly<S>& row = p.c[i];
      for (std::size_t j = 0; j < row.size(); ++j) {
        while (pw.size() <= j) pw.push_back(poly_mul(pw.back(), L, n));
        const Poly<S>& lj = pw[j];
        std::size_t want = static_cast<std::size_t>(n) - i;
        if (want < lj.size()) coef = S(coef + row[j] * lj[want]);
      }
    }
    L.push_back(S(-coef / dP));
  }
  return L;
}

template <class S>
DispersionSheet<S> dispersion_exact(const HomogenisedModel<S>& model, int order,
                                    const ParamValues<S>& params, Axis axis) {
  DispersionSheet<S> d;
  d.modes = model.modes;
  d.alpha = model.alpha;
  d.charpoly = characteristic_polynomial(model, order, params, axis);
  auto A = symbol_matrix(model, params, axis);
  MatrixXd A0 = MatrixXd::Zero(model.modes, model.modes);
  for (int m = 0; m < model.modes; ++m)
    for (int n = 0; n < model.modes; ++n)
      if (!A[m][n].empty()) A0(m, n) = to_double(A[m][n][0]);
  d.lambda0 = simple_roots_at_zero(d.charpoly, A0);
  for (const S& l : d.lambda0) d.sheets.push_back(sheet_series(d.charpoly, l));
  return d;
}

DispersionSamples dispersion_grid(const HomogenisedModel<double>& model, const std::vector<double>& k,
                                  const ParamValues<double>& params, double l) {
  const int M = model.modes;
  DispersionSamples out;
  for (double kk : k) {
    MatrixXcd A = MatrixXcd::Zero(M, M);
    for (int m = 0; m < M; ++m)
      for (const auto& [mono, c] : model.rhs.at(static_cast<std::size_t>(m)).terms()) {
        require_linear_term(mono);
        const DerivKey& f = mono.factors.front();
        A(m, f.mode) += c * param_factor(mono, params) * ipow(cplx(0, kk), f.dx) * ipow(cplx(0, l), f.dy);
      }
    Eigen::ComplexEigenSolver<MatrixXcd> es(A, false);
    VectorXcd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](cplx x, cplx y) { return x.real() > y.real(); });
    out.k.push_back(kk);
    out.l.push_back(l);
    out.branches.push_back(ev);
  }
  return out;
}

std::string DispersionSamples::csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "k,l,branch,re,im\n";
  for (std::size_t i = 0; i < k.size(); ++i)
    for (int b = 0; b < branches[i].size(); ++b)
      os << k[i] << ',' << l[i] << ',' << b << ',' << branches[i][b].real() << ',' << branches[i][b].imag() << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Bloch oracle

MatrixXcd bloch_matrix(const GridField1D& kappa, std::complex<double> k) {
  const int n = kappa.n();
  const double dq = kappa.dq();
  // Row j: gradient at half-point j, between u_{j-1} and u_j.
  auto grad = [&](cplx kk) {
    MatrixXcd B = MatrixXcd::Zero(n, n);
    const cplx ik = cplx(0, 1) * kk;
    for (int j = 0; j < n; ++j) {
      int jm = (j + n - 1) % n;
      B(j, j) += ik * 0.5 + 1.0 / dq;
      B(j, jm) += ik * 0.5 - 1.0 / dq;
    }
    return B;
  };
  return -(grad(-k).transpose() * kappa.samples.asDiagonal() * grad(k));
}

VectorXd bloch_oracle(const GridField1D& kappa, double k, int count) {
  const int n = kappa.n();
  if (std::fabs(k) >= std::numbers::pi * n / kappa.ell) throw DomainError("wavenumber beyond the grid Nyquist limit");
  if (count < 1 || count > n) throw ValidationError("branch count out of range");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(bloch_matrix(kappa, k), Eigen::EigenvaluesOnly);
  VectorXd ev = es.eigenvalues().reverse();
  return ev.head(count);
}

// ---------------------------------------------------------------------------
// Singularity estimators

namespace {

// Least-squares line through the last half of the points (at least two),
// evaluated at x = 0.
double extrapolate(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n == 1) return y[0];
  const std::size_t m = std::max<std::size_t>(2, n / 2);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = n - m; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double k = static_cast<double>(m);
  double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return (sy - slope * sx) / k;
}

}  // namespace

std::string SingularityEstimate::csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "inv_n,radius,angle\n";
  for (std::size_t i = 0; i < inv_n.size(); ++i)
    os << inv_n[i] << ',' << radius_n[i] << ',' << (angle_n.empty() ? 0.0 : angle_n[i]) << '\n';
  return os.str();
}

SingularityEstimate domb_sykes(const std::vector<double>& coeffs, int stride) {
  if (stride < 1) throw ValidationError("stride must be positive");
  std::size_t start = 0;
  while (start < coeffs.size() && coeffs[start] == 0.0) ++start;
  std::size_t nonzero = 0;
  int sign = 0;
  for (std::size_t n = start; n < coeffs.size(); ++n) {
    if (coeffs[n] == 0.0) throw DomainError("irregular coefficient signs; use mercer_roberts");
    int s = coeffs[n] > 0 ? 1 : -1;
    if (sign && s != sign) throw DomainError("alternating or irregular coefficient signs; use mercer_roberts");
    sign = s;
    ++nonzero;
  }
  if (nonzero < 6) throw ValidationError("domb_sykes needs at least 6 nonzero coefficients");
  SingularityEstimate e;
  std::vector<double> r;
  for (std::size_t n = start + 1; n < coeffs.size(); ++n) {
    double rn = std::fabs(coeffs[n - 1] / coeffs[n]);
    e.inv_n.push_back(1.0 / static_cast<double>(n));
    r.push_back(rn);
    e.radius_n.push_back(std::pow(rn, 1.0 / stride));
    e.angle_n.push_back(0.0);
  }
  double rz = extrapolate(e.inv_n, r);
  if (!(rz > 0)) throw NumericalError("domb_sykes extrapolated a non-positive radius");
  e.radius = std::pow(rz, 1.0 / stride);
  e.angle = 0;
  return e;
}

SingularityEstimate mercer_roberts(const std::vector<double>& coeffs, int stride) {
  if (stride < 1) throw ValidationError("stride must be positive");
  if (coeffs.size() < 8) throw ValidationError("mercer_roberts needs at least 8 coefficients");
  SingularityEstimate e;
  std::vector<double> invR, theta;
  for (std::size_t n = 2; n + 1 < coeffs.size(); ++n) {
    const double cm2 = coeffs[n - 2], cm1 = coeffs[n - 1], c = coeffs[n], cp1 = coeffs[n + 1];
    double den = c * cm2 - cm1 * cm1;
    if (den == 0.0 || c == 0.0) {
      e.notes.push_back("window " + std::to_string(n) + " skipped: degenerate");
      continue;
    }
    double B2 = (cp1 * cm1 - c * c) / den;
    if (!(B2 > 0)) {
      e.notes.push_back("window " + std::to_string(n) + " skipped: negative discriminant");
      continue;
    }
    double B = std::sqrt(B2);
    double cth = 0.5 * (cm1 * B / c + cp1 / (B * c));
    if (std::fabs(cth) > 1) {
      e.notes.push_back("window " + std::to_string(n) + " cosine clamped");
      cth = std::clamp(cth, -1.0, 1.0);
    }
    double th = std::acos(cth);
    e.inv_n.push_back(1.0 / static_cast<double>(n));
    invR.push_back(1.0 / B);
    theta.push_back(th);
    e.radius_n.push_back(std::pow(1.0 / B, 1.0 / stride));
    e.angle_n.push_back(th * 180 / std::numbers::pi / stride);
  }
  if (e.inv_n.size() < 2) throw NumericalError("mercer_roberts: too few usable windows");
  double Rz = extrapolate(e.inv_n, invR);
  double th = std::clamp(extrapolate(e.inv_n, theta), 0.0, std::numbers::pi);
  if (!(Rz > 0)) throw NumericalError("mercer_roberts extrapolated a non-positive radius");
  e.radius = std::pow(Rz, 1.0 / stride);
  e.angle = th * 180 / std::numbers::pi / stride;
  return e;
}

// ---------------------------------------------------------------------------
// Regularisation

template <class S>
DerivOp<S> one_mode_operator(const HomogenisedModel<S>& model) {
  if (model.modes != 1) throw ValidationError("regularisation needs a one-mode model");
  DerivOp<S> g;
  for (const auto& [mono, c] : model.rhs[0].terms()) {
    require_linear_term(mono);
    for (int p : mono.powers)
      if (p) throw ValidationError("regularisation needs numeric coefficients; substitute parameters first");
    const DerivKey& f = mono.factors.front();
    g[{f.dx, f.dy}] = c;
  }
  return g;
}

template <class S>
RegularisedModel<S> regularise(const DerivOp<S>& g, const std::vector<std::pair<int, int>>& den_terms,
                               int order, std::vector<std::pair<int, int>> targets) {
  if (den_terms.empty()) throw ValidationError("empty denominator specification");
  for (auto [p, q] : den_terms)
    if (p < 0 || q < 0 || p + q == 0) throw ValidationError("denominator terms need positive derivative order");
  if (targets.empty())
    for (auto [p, q] : den_terms) targets.push_back(q == 0 ? std::pair{p + 2, q} : std::pair{p, q + 2});
  if (targets.size() != den_terms.size()) throw ValidationError("one target per denominator term");
  for (auto [p, q] : targets)
    if (p + q >= order) throw ValidationError("target order exceeds the matched order; raise the model order");

  auto gc = [&](int p, int q) -> S {
    if (p < 0 || q < 0) return S(0);
    auto it = g.find({p, q});
    return it == g.end() ? S(0) : it->second;
  };
  const std::size_t n = den_terms.size();
  std::vector<std::vector<S>> A(n, std::vector<S>(n, S(0)));
  std::vector<S> b(n, S(0));
  for (std::size_t i = 0; i < n; ++i) {
    auto [tp, tq] = targets[i];
    b[i] = S(-gc(tp, tq));
    for (std::size_t j = 0; j < n; ++j) A[i][j] = gc(tp - den_terms[j].first, tq - den_terms[j].second);
  }
  auto d = solve_dense(A, b, "singular matching system: not regularisable at this order");

  RegularisedModel<S> r;
  r.order = order;
  r.den[{0, 0}] = S(1);
  for (std::size_t j = 0; j < n; ++j) r.den[den_terms[j]] = d[j];
  for (const auto& [dk, dc] : r.den)
    for (const auto& [gk, gcoef] : g) {
      std::pair<int, int> key{dk.first + gk.first, dk.second + gk.second};
      if (key.first + key.second >= order) continue;
      r.num[key] = S(r.num[key] + dc * gcoef);
    }
  std::erase_if(r.num, [](const auto& kv) { return exactly_zero(kv.second) || magnitude(kv.second) < 1e-14; });
  for (std::size_t i = 0; i < n; ++i) r.cancelled.push_back({den_terms[i], targets[i]});
  return r;
}

template <class S>
DerivOp<S> reexpand(const RegularisedModel<S>& r) {
  // Solve den * out = num order by order in total derivative degree.
  DerivOp<S> out;
  for (int deg = 0; deg < r.order; ++deg)
    for (int p = deg; p >= 0; --p) {
      int q = deg - p;
      auto it = r.num.find({p, q});
      S v = it == r.num.end() ? S(0) : it->second;
      for (const auto& [dk, dc] : r.den) {
        if (dk.first == 0 && dk.second == 0) continue;
        auto o = out.find({p - dk.first, q - dk.second});
        if (o != out.end()) v = S(v - dc * o->second);
      }
      if (!exactly_zero(v)) out[{p, q}] = S(v / r.den.at({0, 0}));
    }
  return out;
}

template std::vector<std::vector<std::vector<Rational>>> symbol_matrix(const HomogenisedModel<Rational>&,
                                                                       const ParamValues<Rational>&, Axis);
template std::vector<std::vector<std::vector<double>>> symbol_matrix(const HomogenisedModel<double>&,
                                                                     const ParamValues<double>&, Axis);
template CharPoly<Rational> characteristic_polynomial(const HomogenisedModel<Rational>&, int,
                                                      const ParamValues<Rational>&, Axis);
template CharPoly<double> characteristic_polynomial(const HomogenisedModel<double>&, int,
                                                    const ParamValues<double>&, Axis);
template std::vector<Rational> sheet_series(const CharPoly<Rational>&, const Rational&);
template std::vector<double> sheet_series(const CharPoly<double>&, const double&);
template DispersionSheet<Rational> dispersion_exact(const HomogenisedModel<Rational>&, int,
                                                    const ParamValues<Rational>&, Axis);
template DispersionSheet<double> dispersion_exact(const HomogenisedModel<double>&, int,
                                                  const ParamValues<double>&, Axis);
template DerivOp<Rational> one_mode_operator(const HomogenisedModel<Rational>&);
template DerivOp<double> one_mode_operator(const HomogenisedModel<double>&);
template RegularisedModel<Rational> regularise(const DerivOp<Rational>&, const std::vector<std::pair<int, int>>&,
                                               int, std::vector<std::pair<int, int>>);
template RegularisedModel<double> regularise(const DerivOp<double>&, const std::vector<std::pair<int, int>>&, int,
                                             std::vector<std::pair<int, int>>);
template DerivOp<Rational> reexpand(const RegularisedModel<Rational>&);
template DerivOp<double> reexpand(const RegularisedModel<double>&);

// ---------------------------------------------------------------------------
// Nonlocal operator form

NonlocalForm nonlocal_transform(const HomogenisedModel<Rational>& model, const Rational& c, int closure_order) {
  NonlocalForm out;
  out.c = c;
  for (int m = 0; m < model.modes; ++m) {
    const auto& g = model.rhs[static_cast<std::size_t>(m)];
    GradientSeries<Rational> rest(g.trunc()), part(g.trunc());
    for (const auto& [mono, coef] : g.terms()) {
      int pa = mono.powers[kParamA];
      (pa == 2 || pa == 3 ? part : rest).add_term(mono, coef);
    }
    GradientSeries<Rational> dxx = apply_gradient(apply_gradient(part, Axis::x), Axis::x);
    dxx *= c;
    part += dxx;
    for (const auto& [mono, coef] : part.terms())
      if (mono.deriv_order() > closure_order) out.leftover.emplace_back(m, mono);
    rest += part;
    out.rhs.push_back(std::move(rest));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fine-grid validation

int dns_cell_count(double k0, double ell) {
  if (!(k0 > 0)) throw ValidationError("k0 must be positive");
  const double waves_per_cell = k0 * ell / (2 * std::numbers::pi);
  for (int c = 1; c <= 1000; ++c) {
    double w = waves_per_cell * c;
    if (std::fabs(w - std::round(w)) < 1e-9 && std::round(w) >= 1) return c;
  }
  throw ValidationError("k0 gives a non-integer cell count on the periodic domain");
}

std::string DnsReport::csv() const {
  std::ostringstream os;
  os.precision(14);
  os << "t,amplitude\n";
  for (auto [t, a] : series) os << t << ',' << a << '\n';
  return os.str();
}

DnsReport dns_validate(const DnsSpec& spec, const HomogenisedModel<double>& model, const ParamValues<double>& params) {
  if (spec.alpha != 1 && spec.alpha != 2) throw ValidationError("alpha must be 1 or 2");
  if (model.alpha != spec.alpha) throw ValidationError("model alpha differs from the simulation alpha");
  if (!model.is_linear()) throw ValidationError("fine-grid validation needs a linear model");
  spec.cell.validate_coefficient();
  const int n = spec.cell.n();
  const double dq = spec.cell.dq();
  const double ell = spec.cell.ell;

  DnsReport rep;
  rep.cells = dns_cell_count(spec.k0, ell);
  const int total = n * rep.cells;

  // Slow mode of the cell, used to lift U0 = cos(k0 x) and to project back.
  CellOperator op = assemble_cell_operator(spec.cell);
  EigenBasis basis = eigen_select(op, 1, spec.alpha).first;
  const VectorXd v0 = basis.V.col(0), w0 = basis.W.col(0);

  std::vector<Eigen::Triplet<double>> trip;
  const double h2 = dq * dq;
  for (int i = 0; i < total; ++i) {
    int ip = (i + 1) % total, im = (i + total - 1) % total;
    double kr = spec.cell.samples[ip % n], kl = spec.cell.samples[i % n];
    trip.emplace_back(i, ip, kr / h2);
    trip.emplace_back(i, i, -(kr + kl) / h2);
    trip.emplace_back(i, im, kl / h2);
  }
  Eigen::SparseMatrix<double> L(total, total);
  L.setFromTriplets(trip.begin(), trip.end());

  VectorXd u(total);
  std::vector<double> xc(static_cast<std::size_t>(rep.cells));
  for (int c = 0; c < rep.cells; ++c) {
    xc[static_cast<std::size_t>(c)] = c * ell;
    for (int j = 0; j < n; ++j) {
      double x = c * ell + spec.cell.point(j) + dq / 2;
      u[c * n + j] = std::cos(spec.k0 * x) * v0[j];
    }
  }
  auto project = [&](const VectorXd& f) {
    cplx a = 0;
    for (int c = 0; c < rep.cells; ++c) {
      double U = w0.dot(f.segment(c * n, n));
      a += U * std::exp(cplx(0, -spec.k0 * xc[static_cast<std::size_t>(c)]));
    }
    return 2.0 * a.real() / rep.cells;
  };

  if (spec.alpha == 1) {
    if (!(spec.dt > 0) || !(spec.T > spec.dt)) throw ValidationError("need 0 < dt < T");
    rep.dt = spec.dt;
    rep.steps = static_cast<int>(std::lround(spec.T / spec.dt));
    Eigen::SparseMatrix<double> I(total, total);
    I.setIdentity();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(I - spec.dt * L);
    if (lu.info() != Eigen::Success) throw NumericalError("implicit Euler factorisation failed");
    double prev = project(u);
    rep.series.emplace_back(0.0, prev);
    double g = 0;
    for (int s = 1; s <= rep.steps; ++s) {
      u = lu.solve(u);
      double a = project(u);
      rep.series.emplace_back(s * spec.dt, a);
      if (prev == 0.0) throw NumericalError("projected amplitude vanished");
      g = a / prev;
      prev = a;
    }
    // Implicit Euler amplification g = 1/(1 - lambda dt).
    rep.measured = (1 - 1 / g) / spec.dt;
  } else {
    if (spec.cfl > 0.5 || !(spec.cfl > 0)) throw ValidationError("CFL number must lie in (0, 0.5]");
    const double kmax = spec.cell.samples.maxCoeff();
    rep.dt = spec.cfl * dq / std::sqrt(kmax);
    rep.steps = static_cast<int>(std::ceil(spec.T / rep.dt));
    VectorXd prev = u;
    VectorXd cur = u + 0.5 * rep.dt * rep.dt * (L * u);  // zero initial velocity
    std::vector<double> amp{project(prev), project(cur)};
    rep.series.emplace_back(0.0, amp[0]);
    rep.series.emplace_back(rep.dt, amp[1]);
    for (int s = 2; s <= rep.steps; ++s) {
      VectorXd next = 2 * cur - prev + rep.dt * rep.dt * (L * cur);
      prev = std::move(cur);
      cur = std::move(next);
      amp.push_back(project(cur));
      rep.series.emplace_back(s * rep.dt, amp.back());
    }
    // Least squares for A_{n+1} + A_{n-1} = 2 cos(theta) A_n.
    double num = 0, den = 0;
    for (std::size_t s = 1; s + 1 < amp.size(); ++s) {
      num += (amp[s + 1] + amp[s - 1]) * amp[s];
      den += 2 * amp[s] * amp[s];
    }
    double cth = num / den;
    rep.measured = (2 * cth - 2) / (rep.dt * rep.dt);
  }

  auto pred = dispersion_grid(model, {spec.k0}, params);
  rep.predicted = pred.branches.front()[0].real();
  rep.abs_error = std::fabs(rep.measured - rep.predicted);
  rep.rel_error = rep.abs_error / std::max(std::fabs(rep.measured), 1e-300);
  return rep;
}

}  // namespace micromorph
