/**
 * @file homog1d.hpp
 * @brief One-dimensional invariant-manifold construction: embedded
 *        residuals, homological solves and the iteration driver.
 */
#pragma once

#include "micromorph/cellspec.hpp"
#include "micromorph/hetero.hpp"
#include "micromorph/model.hpp"

#include <Eigen/LU>

#include <optional>
#include <string>
#include <vector>

namespace micromorph {

/// Exact problem: d_t^alpha u = -(d_x + d_q) flux,
/// flux = -kappa (d_x u + d_q u) + gamma eta u^2 / 2.
struct TrigEmbeddedSpec {
  int alpha = 1;
  HeterogeneitySpec kappa;
  int modes = 1;
  int N = 3;        // keep derivative orders < N
  int order_a = 1;  // keep a^k, k < order_a
  std::optional<std::vector<FieldTerm>> eta;
  int order_gamma = 1;  // keep gamma^k, k < order_gamma
  bool progressive = true;

  Truncation trunc() const;
  void validate() const;
};

/// Prepared coefficient series for the exact residual.
struct TrigProblem {
  TrigEmbeddedSpec spec;
  GradientSeries<TrigPoly> kappa;
  GradientSeries<TrigPoly> gamma_eta;  // empty when linear
};
TrigProblem prepare(const TrigEmbeddedSpec& spec);

/// Grid problem on one cell with half-point kappa samples; optional
/// quadratic advection gamma u (u_x + u_q) and y-diffusion.
struct GridEmbeddedSpec {
  int alpha = 1;
  GridField1D kappa;
  int modes = 1;
  int N = 3;
  bool advection = false;
  int order_gamma = 1;
  bool y_diffusion = true;
  double zero_small = 1e-8;

  Truncation trunc() const;
  void validate() const;
};

GradientSeries<TrigPoly> embedded_residual(const GradientSeries<TrigPoly>& v,
                                           const HomogenisedModel<Rational>& model,
                                           const TrigProblem& problem);

GradientSeries<Eigen::VectorXd> embedded_residual(const GradientSeries<Eigen::VectorXd>& v,
                                                  const HomogenisedModel<double>& model,
                                                  const GridEmbeddedSpec& spec);

template <class C, class S>
struct HomologicalUpdate {
  std::vector<GradientSeries<S>> dG;
  GradientSeries<C> dv;
};

/// Solvability for the retained harmonics, then per-term division by
/// (Lambda + n^2) with Lambda the summed eigenvalues of the amplitude factors.
HomologicalUpdate<TrigPoly, Rational> homological_solve_trig(const GradientSeries<TrigPoly>& res,
                                                             const EigenBasis& basis);

/// LU of [L, -V; -V^T, 0], factorised once.
class BorderedSystem {
 public:
  BorderedSystem() = default;
  BorderedSystem(const Eigen::MatrixXd& L, const Eigen::MatrixXd& V);
  /// Solves [L, -V; -V^T, 0][x; g] = [r; 0].
  std::pair<Eigen::VectorXd, Eigen::VectorXd> solve(const Eigen::VectorXd& r) const;
  int size() const { return n_; }
  int modes() const { return m_; }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  int n_ = 0, m_ = 0;
};

HomologicalUpdate<Eigen::VectorXd, double> homological_solve_grid(
    const GradientSeries<Eigen::VectorXd>& res, const BorderedSystem& bordered);

template <class C, class S>
struct ConstructResult {
  GradientSeries<C> field;
  HomogenisedModel<S> model;
  std::vector<double> log;  // residual norm per iteration
};

/// Tangent approximation u = sum U_m v_m, G_m = lambda_m U_m.
HomogenisedModel<Rational> tangent_model_trig(const EigenBasis& basis, int alpha, const Truncation& t);
GradientSeries<TrigPoly> tangent_field_trig(const EigenBasis& basis, const Truncation& t);

ConstructResult<TrigPoly, Rational> construct(const TrigEmbeddedSpec& spec, const EigenBasis& basis,
                                              int max_iter = 100);

/// Gradient weight R used in the grid residual norm.
double gradient_weight(int modes);

ConstructResult<Eigen::VectorXd, double> construct(const GridEmbeddedSpec& spec,
                                                   const EigenBasis& basis, int max_iter = 100,
                                                   double tol = 1e-8);

/// Max deviation of the eigen-projections of v from the amplitudes U_m.
double amplitude_defect(const GradientSeries<TrigPoly>& v, int modes);
double amplitude_defect(const GradientSeries<Eigen::VectorXd>& v, const EigenBasis& basis);

template <class S>
struct Reduction {
  HomogenisedModel<S> model;
  std::vector<int> kept;                  // original indices of the new modes
  std::vector<int> dropped;
  std::vector<GradientSeries<S>> slaved;  // U_d in terms of kept amplitudes (old indices)
};

/// Quasi-static elimination of modes not in keep, keeping derivative orders
/// <= drop_order.  Kept modes are renumbered in increasing order.
template <class S>
Reduction<S> adiabatic_reduce(const HomogenisedModel<S>& model, std::vector<int> keep, int drop_order);

extern template Reduction<Rational> adiabatic_reduce(const HomogenisedModel<Rational>&,
                                                     std::vector<int>, int);
extern template Reduction<double> adiabatic_reduce(const HomogenisedModel<double>&, std::vector<int>,
                                                   int);

}  // namespace micromorph
