#pragma once

#include "micromorph/gradient_series.hpp"

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace micromorph {

struct ModelMeta {
  std::string problem;        // oned-trig | oned-grid | elastic2d | custom
  std::string heterogeneity;  // descriptor text
  int dim = 1;
  ParamNames params = default_param_names();
  std::vector<double> residual_log;
  int iterations = 0;
  std::string notes;
};

/// d^alpha U_m / dt^alpha = rhs[m](U, grad U, ...), purely macroscale.
template <class S>
struct HomogenisedModel {
  int modes = 0;
  int alpha = 1;
  Truncation trunc;
  std::vector<GradientSeries<S>> rhs;
  ModelMeta meta;

  HomogenisedModel() = default;
  HomogenisedModel(int m, int a, const Truncation& t)
      : modes(m), alpha(a), trunc(t), rhs(static_cast<std::size_t>(m), GradientSeries<S>(t)) {}

  bool is_linear() const {
    for (const auto& g : rhs)
      for (const auto& [m, c] : g.terms())
        if (m.degree() != 1) return false;
    return true;
  }

  /// Coefficient of a monomial in mode m (zero when absent).
  S coeff(int m, const Monomial& mono) const {
    const S* c = rhs.at(static_cast<std::size_t>(m)).find(mono);
    return c ? *c : S(0);
  }

  void set_trunc(const Truncation& t) {
    trunc = t;
    for (auto& g : rhs) g.set_trunc(t);
  }
};

namespace detail {

/// Caches d^(dx,dy) G_m for the chain rule.
template <class S>
class RhsDerivatives {
 public:
  explicit RhsDerivatives(const HomogenisedModel<S>& model) : model_(model) {}

  const GradientSeries<S>& get(int mode, int dx, int dy) {
    if (mode >= model_.modes || mode >= static_cast<int>(model_.rhs.size()))
      throw ValidationError("model incomplete: no right-hand side for mode " +
                            std::to_string(mode));
    auto key = std::make_tuple(mode, dx, dy);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    GradientSeries<S> g;
    if (dx > 0)
      g = apply_gradient(get(mode, dx - 1, dy), Axis::x);
    else if (dy > 0)
      g = apply_gradient(get(mode, dx, dy - 1), Axis::y);
    else
      g = model_.rhs[static_cast<std::size_t>(mode)];
    return cache_.emplace(key, std::move(g)).first->second;
  }

 private:
  const HomogenisedModel<S>& model_;
  std::map<std::tuple<int, int, int>, GradientSeries<S>> cache_;
};

}  // namespace detail

/// One application of d/dt by the chain rule.  For alpha=1,
/// dt U_{m,D} = D G_m; for alpha=2, dt U_{m,D} = V_{m,D} and dt V_{m,D} = D G_m.
template <class C, class S>
GradientSeries<C> time_derivative_once(const GradientSeries<C>& x, const HomogenisedModel<S>& model,
                                       detail::RhsDerivatives<S>& dG) {
  using Ops = CoefOps<C>;
  const Truncation& t = x.trunc();
  GradientSeries<C> out(t);
  for (const auto& [m, c] : x.terms()) {
    const auto& f = m.factors;
    for (std::size_t i = 0; i < f.size();) {
      std::size_t j = i;
      while (j < f.size() && f[j] == f[i]) ++j;
      const DerivKey k = f[i];
      Monomial rest;
      rest.powers = m.powers;
      rest.factors = f;
      rest.factors.erase(rest.factors.begin() + static_cast<long>(i));
      C scaled = j - i == 1 ? c : Ops::scaled(c, typename Ops::Scalar(static_cast<int>(j - i)));
      if (k.mode >= model.modes)
        throw ValidationError("model incomplete: no right-hand side for mode " +
                              std::to_string(k.mode));
      if (model.alpha == 2 && k.kind == AmpKind::amplitude) {
        DerivKey v = k;
        v.kind = AmpKind::velocity;
        Monomial mv = rest;
        mv.factors.insert(std::upper_bound(mv.factors.begin(), mv.factors.end(), v), v);
        out.add_term(mv, scaled);
      } else {
        if (model.alpha != 2 && k.kind == AmpKind::velocity)
          throw DomainError("velocity symbol in a first-order-in-time context");
        for (const auto& [mg, g] : dG.get(k.mode, k.dx, k.dy).terms()) {
          if (!t.admits_product(rest, mg)) continue;
          out.add_term(rest * mg, Ops::scaled(scaled, g));
        }
      }
      i = j;
    }
  }
  return out;
}

/// d^alpha/dt^alpha of x on the manifold parametrised by the model.
template <class C, class S>
GradientSeries<C> time_derivative(const GradientSeries<C>& x, const HomogenisedModel<S>& model) {
  if (model.alpha != 1 && model.alpha != 2) throw ValidationError("alpha must be 1 or 2");
  detail::RhsDerivatives<S> dG(model);
  GradientSeries<C> r = x;
  for (int i = 0; i < model.alpha; ++i) r = time_derivative_once(r, model, dG);
  return r;
}

}  // namespace micromorph
