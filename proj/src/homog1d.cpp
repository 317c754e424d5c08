#include "micromorph/homog1d.hpp"

#include "micromorph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace micromorph {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Specs

Truncation TrigEmbeddedSpec::trunc() const { return Truncation::make(N, order_a, order_gamma); }

void TrigEmbeddedSpec::validate() const {
  if (alpha != 1 && alpha != 2) throw ValidationError("alpha must be 1 or 2");
  if (modes < 1) throw ValidationError("mode count M must be at least 1");
  if (N < 1 || order_a < 1 || order_gamma < 1) throw ValidationError("orders must be positive");
  if (eta && order_gamma > 1 && alpha == 2 && modes > 1)
    throw ValidationError("Need alpha=1 for nonlinear multi-mode");
  if (eta)
    for (const auto& t : *eta)
      if (t.symbol == kParamA || t.symbol == kParamGamma || t.symbol >= kMaxParams)
        throw ValidationError("eta symbols must be free parameters");
}

TrigProblem prepare(const TrigEmbeddedSpec& spec) {
  spec.validate();
  TrigProblem p;
  p.spec = spec;
  Truncation t = spec.trunc();
  p.kappa = expand_heterogeneity(spec.kappa, spec.order_a - 1).as_series(t);
  p.gamma_eta = GradientSeries<TrigPoly>(t);
  if (spec.eta && spec.order_gamma > 1) {
    auto eta = trig_terms_series(*spec.eta, t);
    auto g = GradientSeries<TrigPoly>::term(Monomial::param(kParamGamma), TrigPoly(1), t);
    p.gamma_eta = g * eta;
  }
  return p;
}

Truncation GridEmbeddedSpec::trunc() const {
  Truncation t = Truncation::make(N, Truncation::kUnbounded, advection ? order_gamma : 1);
  return t;
}

void GridEmbeddedSpec::validate() const {
  if (alpha != 1 && alpha != 2) throw ValidationError("alpha must be 1 or 2");
  if (modes < 1) throw ValidationError("mode count M must be at least 1");
  if (N < 1 || order_gamma < 1) throw ValidationError("orders must be positive");
  if (advection && order_gamma > 1 && alpha == 2 && modes > 1)
    throw ValidationError("Need alpha=1 for nonlinear multi-mode");
  kappa.validate_coefficient();
}

// ---------------------------------------------------------------------------
// Residuals

GradientSeries<TrigPoly> embedded_residual(const GradientSeries<TrigPoly>& v,
                                           const HomogenisedModel<Rational>& model,
                                           const TrigProblem& problem) {
  const Truncation& t = v.trunc();
  if (!(model.trunc == t)) throw DomainError("truncation mismatch between field and model");
  auto dq = [](const TrigPoly& c) { return c.derivative(); };
  GradientSeries<TrigPoly> kappa = problem.kappa;
  kappa.set_trunc(t);
  GradientSeries<TrigPoly> grad = apply_gradient(v, Axis::x) + v.map_coeffs(dq);
  GradientSeries<TrigPoly> flux = -(kappa * grad);
  if (!problem.gamma_eta.empty()) {
    GradientSeries<TrigPoly> ge = problem.gamma_eta;
    ge.set_trunc(t);
    flux += Rational(1, 2) * (ge * (v * v));
  }
  GradientSeries<TrigPoly> res = time_derivative(v, model);
  res += apply_gradient(flux, Axis::x);
  res += flux.map_coeffs(dq);
  return res;
}

namespace {

VectorXd shift_up(const VectorXd& v) {  // (E v)_j = v_{j+1}
  const auto n = v.size();
  VectorXd r(n);
  r.head(n - 1) = v.tail(n - 1);
  r[n - 1] = v[0];
  return r;
}

VectorXd shift_down(const VectorXd& v) {  // (E^T v)_j = v_{j-1}
  const auto n = v.size();
  VectorXd r(n);
  r.tail(n - 1) = v.head(n - 1);
  r[0] = v[n - 1];
  return r;
}

}  // namespace

GradientSeries<VectorXd> embedded_residual(const GradientSeries<VectorXd>& v,
                                           const HomogenisedModel<double>& model,
                                           const GridEmbeddedSpec& spec) {
  const Truncation& t = v.trunc();
  if (!(model.trunc == t)) throw DomainError("truncation mismatch between field and model");
  const VectorXd& kh = spec.kappa.samples;
  const double dq = spec.kappa.dq();
  for (const auto& [m, c] : v.terms())
    if (c.size() != kh.size()) throw DomainError("grid coefficient length mismatch");

  // Flux at half-points j-1/2 from u_{j-1}, u_j.
  auto avg_down = [](const VectorXd& c) -> VectorXd { return 0.5 * (c + shift_down(c)); };
  auto dif_down = [dq](const VectorXd& c) -> VectorXd { return (c - shift_down(c)) / dq; };
  auto avg_up = [](const VectorXd& c) -> VectorXd { return 0.5 * (c + shift_up(c)); };
  auto dif_up = [dq](const VectorXd& c) -> VectorXd { return (shift_up(c) - c) / dq; };
  auto times_kappa = [&kh](const VectorXd& c) -> VectorXd { return -kh.cwiseProduct(c); };

  GradientSeries<VectorXd> grad =
      apply_gradient(v.map_coeffs(avg_down), Axis::x) + v.map_coeffs(dif_down);
  GradientSeries<VectorXd> flux = grad.map_coeffs(times_kappa);

  GradientSeries<VectorXd> res = time_derivative(v, model);
  res += apply_gradient(flux.map_coeffs(avg_up), Axis::x);
  res += flux.map_coeffs(dif_up);
  if (spec.y_diffusion) {
    auto vyy = apply_gradient(apply_gradient(v, Axis::y), Axis::y);
    res += vyy.map_coeffs(times_kappa);
  }
  if (spec.advection && spec.order_gamma > 1) {
    auto centred = [dq](const VectorXd& c) -> VectorXd {
      return (shift_up(c) - shift_down(c)) / (2 * dq);
    };
    GradientSeries<VectorXd> du = apply_gradient(v, Axis::x) + v.map_coeffs(centred);
    GradientSeries<VectorXd> g = GradientSeries<VectorXd>::term(
        Monomial::param(kParamGamma), VectorXd::Ones(kh.size()), t);
    res += g * (v * du);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Homological solves

HomologicalUpdate<TrigPoly, Rational> homological_solve_trig(const GradientSeries<TrigPoly>& res,
                                                             const EigenBasis& basis) {
  if (basis.kind != CellKind::harmonic) throw DomainError("trig solve needs the harmonic basis");
  const Truncation& t = res.trunc();
  const int M = basis.M;
  HomologicalUpdate<TrigPoly, Rational> up;
  up.dG.assign(static_cast<std::size_t>(M), GradientSeries<Rational>(t));
  up.dv = GradientSeries<TrigPoly>(t);
  for (const auto& [mono, coef] : res.terms()) {
    TrigPoly rem = coef;
    for (int m = 0; m < M; ++m) {
      auto [n, p] = EigenBasis::harmonic_mode(m);
      const Rational c = rem.coeff(n, p);
      if (is_zero(c)) continue;
      up.dG[static_cast<std::size_t>(m)].add_term(mono, Rational(-c));
      rem.set(n, p, 0);
    }
    if (rem.is_zero()) continue;
    Rational Lambda = 0;
    for (const auto& k : mono.factors) {
      if (k.mode >= M) throw ValidationError("residual references a mode outside the basis");
      Lambda += -Rational(EigenBasis::harmonic_mode(k.mode).first * EigenBasis::harmonic_mode(k.mode).first);
    }
    TrigPoly dv;
    for (int n = 0; n <= rem.degree(); ++n) {
      for (Parity p : {Parity::cos, Parity::sin}) {
        const Rational& r = rem.coeff(n, p);
        if (is_zero(r)) continue;
        Rational div = Lambda + n * n;
        if (is_zero(div))
          throw NumericalError("small divisor: resonant term " + amp_string(mono) + " at harmonic " +
                               std::to_string(n));
        dv.add(n, p, -r / div);
      }
    }
    up.dv.add_term(mono, dv);
  }
  return up;
}

BorderedSystem::BorderedSystem(const MatrixXd& L, const MatrixXd& V)
    : n_(static_cast<int>(L.rows())), m_(static_cast<int>(V.cols())) {
  MatrixXd A = MatrixXd::Zero(n_ + m_, n_ + m_);
  A.topLeftCorner(n_, n_) = L;
  A.topRightCorner(n_, m_) = -V;
  A.bottomLeftCorner(m_, n_) = -V.transpose();
  lu_.compute(A);
  double rc = lu_.rcond();
  if (!(rc > 1e-14)) throw NumericalError("singular bordered matrix: basis and kernel inconsistent");
}

std::pair<VectorXd, VectorXd> BorderedSystem::solve(const VectorXd& r) const {
  if (r.size() != n_) throw DomainError("bordered solve: residual length mismatch");
  VectorXd rhs = VectorXd::Zero(n_ + m_);
  rhs.head(n_) = r;
  VectorXd s = lu_.solve(rhs);
  return {s.head(n_), s.tail(m_)};
}

HomologicalUpdate<VectorXd, double> homological_solve_grid(const GradientSeries<VectorXd>& res,
                                                           const BorderedSystem& bordered) {
  const Truncation& t = res.trunc();
  HomologicalUpdate<VectorXd, double> up;
  up.dG.assign(static_cast<std::size_t>(bordered.modes()), GradientSeries<double>(t));
  up.dv = GradientSeries<VectorXd>(t);
  for (const auto& [mono, r] : res.terms()) {
    auto [x, g] = bordered.solve(r);
    up.dv.add_term(mono, x);
    for (int m = 0; m < bordered.modes(); ++m) up.dG[static_cast<std::size_t>(m)].add_term(mono, g[m]);
  }
  return up;
}

// ---------------------------------------------------------------------------
// Construction

HomogenisedModel<Rational> tangent_model_trig(const EigenBasis& basis, int alpha, const Truncation& t) {
  HomogenisedModel<Rational> model(basis.M, alpha, t);
  for (int m = 0; m < basis.M; ++m)
    model.rhs[static_cast<std::size_t>(m)].add_term(
        Monomial::amp(m), Rational(-EigenBasis::harmonic_mode(m).first * EigenBasis::harmonic_mode(m).first));
  return model;
}

GradientSeries<TrigPoly> tangent_field_trig(const EigenBasis& basis, const Truncation& t) {
  GradientSeries<TrigPoly> v(t);
  for (int m = 0; m < basis.M; ++m) v.add_term(Monomial::amp(m), basis.trig_vector(m));
  return v;
}

ConstructResult<TrigPoly, Rational> construct(const TrigEmbeddedSpec& spec, const EigenBasis& basis,
                                              int max_iter) {
  TrigProblem problem = prepare(spec);
  if (basis.kind != CellKind::harmonic || basis.M != spec.modes)
    throw ValidationError("basis does not match the requested mode count");
  const Truncation target = spec.trunc();
  ConstructResult<TrigPoly, Rational> out;
  out.field = tangent_field_trig(basis, target);
  out.model = tangent_model_trig(basis, spec.alpha, target);

  for (int it = 1; it <= max_iter; ++it) {
    Truncation work = target;
    if (spec.progressive) {
      work.grad = std::min(it + 1, target.grad);
      work.param[kParamA] = std::min(it + 1, target.param[kParamA]);
    }
    out.field.set_trunc(work);
    out.model.set_trunc(work);
    auto res = embedded_residual(out.field, out.model, problem);
    out.log.push_back(weighted_norm(res));
    if (res.empty()) {
      if (work == target) {
        out.model.meta.iterations = it;
        out.model.meta.residual_log = out.log;
        out.model.meta.problem = "oned-trig";
        out.model.meta.heterogeneity = spec.kappa.describe();
        return out;
      }
      continue;
    }
    auto up = homological_solve_trig(res, basis);
    out.field += up.dv;
    for (int m = 0; m < basis.M; ++m) out.model.rhs[static_cast<std::size_t>(m)] += up.dG[static_cast<std::size_t>(m)];
  }
  throw ConvergenceError("trig construction did not terminate in " + std::to_string(max_iter) +
                             " iterations",
                         out.log);
}

double gradient_weight(int modes) { return modes == 2 ? 3.0 : 2.0; }

ConstructResult<VectorXd, double> construct(const GridEmbeddedSpec& spec, const EigenBasis& basis,
                                            int max_iter, double tol) {
  spec.validate();
  if (basis.kind != CellKind::grid1d || basis.M != spec.modes)
    throw ValidationError("basis does not match the requested mode count");
  if (basis.V.rows() != spec.kappa.n()) throw DomainError("basis and field grids differ");
  const Truncation t = spec.trunc();
  const int M = basis.M;
  CellOperator op = assemble_cell_operator(spec.kappa);
  BorderedSystem bordered(op.matrix, basis.V);

  ConstructResult<VectorXd, double> out;
  out.field = GradientSeries<VectorXd>(t);
  out.model = HomogenisedModel<double>(M, spec.alpha, t);
  for (int m = 0; m < M; ++m) {
    out.field.add_term(Monomial::amp(m), basis.V.col(m));
    out.model.rhs[static_cast<std::size_t>(m)].add_term(Monomial::amp(m), basis.lambda[m]);
  }
  const double R = gradient_weight(M);
  double maxnorm = 1.0;
  for (int it = 1; it <= max_iter; ++it) {
    auto res = embedded_residual(out.field, out.model, spec);
    double norm = weighted_norm(res, R);
    out.log.push_back(norm);
    maxnorm = std::max(maxnorm, norm);
    if (norm < tol * maxnorm) {
      double defect = amplitude_defect(out.field, basis);
      if (defect > 1e-8) throw NumericalError("amplitude not preserved: defect " + std::to_string(defect));
      out.model.meta.iterations = it;
      out.model.meta.residual_log = out.log;
      out.model.meta.problem = "oned-grid";
      return out;
    }
    auto up = homological_solve_grid(res, bordered);
    out.field += up.dv;
    for (int m = 0; m < M; ++m) out.model.rhs[static_cast<std::size_t>(m)] += up.dG[static_cast<std::size_t>(m)];
    const double small = spec.zero_small * maxnorm;
    out.field.prune([&](const Monomial&, const VectorXd& c) { return c.lpNorm<Eigen::Infinity>() < small; });
    for (auto& g : out.model.rhs) g.prune([&](const Monomial&, double c) { return std::fabs(c) < small; });
  }
  throw ConvergenceError("grid construction did not converge in " + std::to_string(max_iter) +
                             " iterations",
                         out.log);
}

double amplitude_defect(const GradientSeries<TrigPoly>& v, int modes) {
  double worst = 0;
  for (const auto& [mono, c] : v.terms())
    for (int m = 0; m < modes; ++m) {
      auto [n, p] = EigenBasis::harmonic_mode(m);
      Rational want = mono == Monomial::amp(m) ? 1 : 0;
      worst = std::max(worst, std::fabs(Rational(c.coeff(n, p) - want).get_d()));
    }
  return worst;
}

double amplitude_defect(const GradientSeries<VectorXd>& v, const EigenBasis& basis) {
  double worst = 0;
  for (const auto& [mono, c] : v.terms())
    for (int m = 0; m < basis.M; ++m) {
      double want = mono == Monomial::amp(m) ? 1.0 : 0.0;
      worst = std::max(worst, std::fabs(basis.W.col(m).dot(c) - want));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Adiabatic reduction

namespace {

template <class S>
GradientSeries<S> substitute(const GradientSeries<S>& x, const std::vector<int>& slot,
                             const std::vector<GradientSeries<S>>& expr,
                             std::map<std::tuple<int, int, int>, GradientSeries<S>>& cache) {
  const Truncation& t = x.trunc();
  auto derived = [&](int d, int dx, int dy) -> const GradientSeries<S>& {
    auto key = std::make_tuple(d, dx, dy);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    GradientSeries<S> g = expr[static_cast<std::size_t>(slot[static_cast<std::size_t>(d)])];
    for (int i = 0; i < dx; ++i) g = apply_gradient(g, Axis::x);
    for (int i = 0; i < dy; ++i) g = apply_gradient(g, Axis::y);
    return cache.emplace(key, std::move(g)).first->second;
  };
  GradientSeries<S> out(t);
  for (const auto& [mono, c] : x.terms()) {
    GradientSeries<S> acc = GradientSeries<S>::term(mono.param_part(), c, t);
    for (const auto& k : mono.factors) {
      if (slot[k.mode] < 0) {
        GradientSeries<S> f = GradientSeries<S>::term(
            [&] { Monomial m; m.factors.push_back(k); return m; }(), S(1), t);
        acc = acc * f;
      } else {
        if (k.kind == AmpKind::velocity)
          throw ValidationError("cannot eliminate a mode whose velocity appears in the model");
        acc = acc * derived(k.mode, k.dx, k.dy);
      }
      if (acc.empty()) break;
    }
    out += acc;
  }
  return out;
}

}  // namespace

template <class S>
Reduction<S> adiabatic_reduce(const HomogenisedModel<S>& model, std::vector<int> keep, int drop_order) {
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty()) throw ValidationError("must keep at least one mode");
  for (int k : keep)
    if (k < 0 || k >= model.modes) throw ValidationError("kept mode out of range");
  if (drop_order < 0) throw ValidationError("drop order must be non-negative");

  Reduction<S> red;
  red.kept = keep;
  for (int m = 0; m < model.modes; ++m)
    if (!std::binary_search(keep.begin(), keep.end(), m)) red.dropped.push_back(m);

  Truncation t = model.trunc;
  t.grad = std::min(t.grad, drop_order + 1);
  std::vector<int> slot(static_cast<std::size_t>(model.modes), -1);
  for (std::size_t i = 0; i < red.dropped.size(); ++i) slot[static_cast<std::size_t>(red.dropped[i])] = static_cast<int>(i);

  std::vector<GradientSeries<S>> rhs;
  for (const auto& g : model.rhs) {
    GradientSeries<S> h = g;
    h.set_trunc(t);
    rhs.push_back(std::move(h));
  }
  std::vector<S> lam;
  for (int d : red.dropped) {
    S l = model.coeff(d, Monomial::amp(d));
    if (CoefOps<S>::is_zero(l)) throw ValidationError("invalid reduction: mode " + std::to_string(d) + " has zero eigenvalue");
    lam.push_back(l);
  }
  // U_d = -(G_d - lambda_d U_d)/lambda_d, iterated to a fixed point.
  red.slaved.assign(red.dropped.size(), GradientSeries<S>(t));
  const int budget = std::min(t.grad, 64) + std::min(t.param[kParamA], 64) + 8;
  bool done = red.dropped.empty();
  for (int it = 0; it < budget && !done; ++it) {
    std::map<std::tuple<int, int, int>, GradientSeries<S>> cache;
    std::vector<GradientSeries<S>> next;
    for (std::size_t i = 0; i < red.dropped.size(); ++i) {
      int d = red.dropped[i];
      GradientSeries<S> g = rhs[static_cast<std::size_t>(d)];
      g.erase(Monomial::amp(d));
      GradientSeries<S> e = substitute(g, slot, red.slaved, cache);
      e *= S(-1) / lam[i];
      next.push_back(std::move(e));
    }
    done = true;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if constexpr (CoefOps<S>::exact) {
        if (!(next[i] == red.slaved[i])) done = false;
      } else {
        auto diff = next[i] - red.slaved[i];
        if (weighted_norm(diff) > 1e-13 * std::max(1.0, weighted_norm(next[i]))) done = false;
      }
    }
    red.slaved = std::move(next);
  }
  if (!done) throw ConvergenceError("adiabatic elimination did not reach a fixed point", {});

  red.model = HomogenisedModel<S>(static_cast<int>(keep.size()), model.alpha, t);
  red.model.meta = model.meta;
  std::map<std::tuple<int, int, int>, GradientSeries<S>> cache;
  std::vector<int> renumber(static_cast<std::size_t>(model.modes), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) renumber[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    GradientSeries<S> g = substitute(rhs[static_cast<std::size_t>(keep[i])], slot, red.slaved, cache);
    GradientSeries<S> r(t);
    for (const auto& [mono, c] : g.terms()) {
      Monomial m2 = mono;
      for (auto& k : m2.factors) k.mode = static_cast<std::uint8_t>(renumber[k.mode]);
      std::sort(m2.factors.begin(), m2.factors.end());
      r.add_term(m2, c);
    }
    red.model.rhs[i] = std::move(r);
  }
  return red;
}

template Reduction<Rational> adiabatic_reduce(const HomogenisedModel<Rational>&, std::vector<int>, int);
template Reduction<double> adiabatic_reduce(const HomogenisedModel<double>&, std::vector<int>, int);

}  // namespace micromorph
