/**
 * @file analysis.hpp
 * @brief Model diagnostics: dispersion sheets, the Bloch oracle, series
 *        singularity estimators, regularisation and a fine-grid validator.
 */
#pragma once

#include "micromorph/cellspec.hpp"
#include "micromorph/hetero.hpp"
#include "micromorph/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace micromorph {

/// Values substituted for parameter symbols (a, gamma, c1..c4).
template <class S>
using ParamValues = std::array<std::optional<S>, kMaxParams>;

/// det(lambda I - A(s)) with s the symbol of d/dx (s = ik), as
/// c[i][j] s^i lambda^j for i <= order.
template <class S>
struct CharPoly {
  int order = 0;
  std::vector<std::vector<S>> c;
};

/// Symbol matrix entries A[m][n] as polynomials in s (d/dx along `axis`).
template <class S>
std::vector<std::vector<std::vector<S>>> symbol_matrix(const HomogenisedModel<S>& model,
                                                       const ParamValues<S>& params, Axis axis = Axis::x);

template <class S>
CharPoly<S> characteristic_polynomial(const HomogenisedModel<S>& model, int order,
                                      const ParamValues<S>& params, Axis axis = Axis::x);

/// Taylor coefficients in s of the sheet through lambda0 at s = 0.
/// lambda0 must be a simple root of the characteristic polynomial at s = 0.
template <class S>
std::vector<S> sheet_series(const CharPoly<S>& p, const S& lambda0);

/// Exact dispersion: characteristic polynomial plus the sheet through each
/// simple root lambda_m (empty for repeated roots).
template <class S>
struct DispersionSheet {
  int modes = 0;
  int alpha = 1;
  CharPoly<S> charpoly;
  std::vector<S> lambda0;
  std::vector<std::vector<S>> sheets;  // sheets[m][j]: coefficient of s^j
};

template <class S>
DispersionSheet<S> dispersion_exact(const HomogenisedModel<S>& model, int order,
                                    const ParamValues<S>& params, Axis axis = Axis::x);

/// Sampled branches: eigenvalues of A(ik, il), sorted by real part descending.
struct DispersionSamples {
  std::vector<double> k, l;
  std::vector<Eigen::VectorXcd> branches;
  std::string csv() const;
};

DispersionSamples dispersion_grid(const HomogenisedModel<double>& model, const std::vector<double>& k,
                                  const ParamValues<double>& params, double l = 0.0);

extern template std::vector<std::vector<std::vector<Rational>>> symbol_matrix(
    const HomogenisedModel<Rational>&, const ParamValues<Rational>&, Axis);
extern template std::vector<std::vector<std::vector<double>>> symbol_matrix(
    const HomogenisedModel<double>&, const ParamValues<double>&, Axis);
extern template CharPoly<Rational> characteristic_polynomial(const HomogenisedModel<Rational>&, int,
                                                             const ParamValues<Rational>&, Axis);
extern template CharPoly<double> characteristic_polynomial(const HomogenisedModel<double>&, int,
                                                           const ParamValues<double>&, Axis);
extern template std::vector<Rational> sheet_series(const CharPoly<Rational>&, const Rational&);
extern template std::vector<double> sheet_series(const CharPoly<double>&, const double&);
extern template DispersionSheet<Rational> dispersion_exact(const HomogenisedModel<Rational>&, int,
                                                           const ParamValues<Rational>&, Axis);
extern template DispersionSheet<double> dispersion_exact(const HomogenisedModel<double>&, int,
                                                         const ParamValues<double>&, Axis);

/// -(B(-k))^T diag(kappa) B(k) with B(k) = ik Avg + D at the half-points;
/// Hermitian for real k and analytic in k.
Eigen::MatrixXcd bloch_matrix(const GridField1D& kappa, std::complex<double> k);

/// Eigenvalues of -(ik Avg + D)^H diag(kappa) (ik Avg + D) on one cell,
/// descending; the same half-point stencil as assemble_cell_operator.
Eigen::VectorXd bloch_oracle(const GridField1D& kappa, double k, int count);

struct SingularityEstimate {
  double radius = 0;
  double angle = 0;  // degrees, in [0, 180]
  std::vector<double> inv_n;
  std::vector<double> radius_n;
  std::vector<double> angle_n;
  std::vector<std::string> notes;
  std::string csv() const;
};

/// Ratio test r_n = |c_{n-1}/c_n| extrapolated linearly in 1/n.  The
/// coefficients are of a series in z = x^stride; radius is reported in x.
SingularityEstimate domb_sykes(const std::vector<double>& coeffs, int stride = 1);

/// Conjugate-pair estimator over windows c_{n-2}..c_{n+1}, extrapolated
/// linearly in 1/n.  Radius and angle are reported in x where z = x^stride.
SingularityEstimate mercer_roberts(const std::vector<double>& coeffs, int stride = 1);

/// Derivative operator sum c_(p,q) d_x^p d_y^q.
template <class S>
using DerivOp = std::map<std::pair<int, int>, S>;

template <class S>
struct RegularisedModel {
  DerivOp<S> den;  // includes (0,0) -> 1
  DerivOp<S> num;
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> cancelled;  // (den term, target)
  int order = 0;   // derivative orders < order are matched
};

/// One-mode linear model as a derivative operator acting on U0.
template <class S>
DerivOp<S> one_mode_operator(const HomogenisedModel<S>& model);

/// Chooses den coefficients so den * G has zero coefficient at each target
/// (default target: term * d_x^2 for pure-x terms, else term * d_y^2), and
/// returns num = den * G truncated to derivative order < order.
template <class S>
RegularisedModel<S> regularise(const DerivOp<S>& g, const std::vector<std::pair<int, int>>& den_terms,
                               int order, std::vector<std::pair<int, int>> targets = {});

/// Re-expansion num / den as a series to derivative order < order.
template <class S>
DerivOp<S> reexpand(const RegularisedModel<S>& r);

extern template DerivOp<Rational> one_mode_operator(const HomogenisedModel<Rational>&);
extern template DerivOp<double> one_mode_operator(const HomogenisedModel<double>&);
extern template RegularisedModel<Rational> regularise(const DerivOp<Rational>&,
                                                      const std::vector<std::pair<int, int>>&, int,
                                                      std::vector<std::pair<int, int>>);
extern template RegularisedModel<double> regularise(const DerivOp<double>&,
                                                    const std::vector<std::pair<int, int>>&, int,
                                                    std::vector<std::pair<int, int>>);
extern template DerivOp<Rational> reexpand(const RegularisedModel<Rational>&);
extern template DerivOp<double> reexpand(const RegularisedModel<double>&);

/// Multiplies the a^2 and a^3 parts of each mode by (1 + c d_x^2), keeping
/// the model's truncation.  Terms of the transformed parts above
/// closure_order derivatives are reported as leftovers.
struct NonlocalForm {
  Rational c;
  std::vector<GradientSeries<Rational>> rhs;
  std::vector<std::pair<int, Monomial>> leftover;  // (mode, monomial)
};

NonlocalForm nonlocal_transform(const HomogenisedModel<Rational>& model, const Rational& c,
                                int closure_order = 5);

/// Fine-grid validation of the slow rate (alpha=1) or frequency (alpha=2).
struct DnsSpec {
  int alpha = 1;
  GridField1D cell;   // kappa at half-points on one cell, phase 0
  double k0 = 0.25;
  double T = 60;
  double dt = 0.5;    // alpha=1 implicit Euler step; alpha=2 uses cfl
  double cfl = 0.5;
};

struct DnsReport {
  int cells = 0;
  int steps = 0;
  double dt = 0;
  double measured = 0;   // eigenvalue of d_t^alpha on the slow sheet
  double predicted = 0;
  double abs_error = 0;
  double rel_error = 0;
  std::vector<std::pair<double, double>> series;  // (t, projected amplitude)
  std::string csv() const;
};

/// Smallest cell count making cos(k0 x) periodic on the fine domain.
int dns_cell_count(double k0, double ell);

DnsReport dns_validate(const DnsSpec& spec, const HomogenisedModel<double>& model,
                       const ParamValues<double>& params = {});

}  // namespace micromorph
