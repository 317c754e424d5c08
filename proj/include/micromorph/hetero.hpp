/**
 * @file hetero.hpp
 * @brief Microscale heterogeneity: exact trig-series fields, sampled
 *        laminate fields and the staggered elastic cell.
 */
#pragma once

#include "micromorph/gradient_series.hpp"
#include "micromorph/trig_poly.hpp"

#include <Eigen/Dense>

#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace micromorph {

/// coeff * a^a_power * symbol * {cos|sin}(harmonic q).
struct FieldTerm {
  int harmonic = 0;
  Parity parity = Parity::cos;
  Rational coeff = 1;
  int a_power = 0;
  int symbol = -1;  // parameter index of a free symbol, or -1
};

/// Rejects non-integer harmonics (the field would not be 2pi-periodic).
int checked_harmonic(double h);

struct HeterogeneitySpec {
  enum class Kind { reciprocal_cos, trig_rational };
  Kind kind = Kind::reciprocal_cos;
  std::vector<FieldTerm> numerator;    // trig_rational only
  std::vector<FieldTerm> denominator;  // trig_rational only

  static HeterogeneitySpec reciprocal_cos() { return {}; }
  std::string describe() const;
  /// Numeric evaluation of the exact (untruncated) field.
  double eval(double q, double a) const;
};

/// kappa(q; a) = sum_k a^k by_power[k](q), kept for k <= order_a.
struct TrigSeriesField {
  std::vector<TrigPoly> by_power;
  int order_a = 0;
  double period = 2 * std::numbers::pi;

  const Rational& coeff(int n, Parity p, int k) const;
  double eval(double q, double a) const;
  /// The field as a parameter-only series (a^k -> by_power[k]).
  GradientSeries<TrigPoly> as_series(const Truncation& t) const;
};

TrigSeriesField expand_heterogeneity(const HeterogeneitySpec& spec, int order_a);

/// Builds sum of terms as a parameter-only trig series (e.g. eta = c1 cos q + c2 sin 2q).
GradientSeries<TrigPoly> trig_terms_series(const std::vector<FieldTerm>& terms, const Truncation& t);

/// Grid samples on a cell of length ell.  Coefficient fields are sampled at
/// the half-points q_j = (j/n - 1/2) ell (0-based), where the fluxes live.
struct GridField1D {
  Eigen::VectorXd samples;
  double ell = 2 * std::numbers::pi;

  int n() const { return static_cast<int>(samples.size()); }
  double dq() const { return ell / n(); }
  double point(int j) const { return (static_cast<double>(j) / n() - 0.5) * ell; }
  void validate_coefficient() const;
  std::string csv() const;
};

/// kappa = 1 except kappa0 = eta/(chi ell) inside the layer of width eta centred on +-ell/2.
GridField1D sample_laminate(double ell, double eta, double chi, int n);
GridField1D sample_function(const std::function<double(double)>& f, double ell, int n);
int laminate_layer_points(const GridField1D& f);

/// Staggered elastic lattice of 2nx x 2ny points on the unit-periodic cell.
/// Lattice point (i,j), 0-based, sits at ((i+1/2) dx/2, (j+1/2) dy/2).
/// Horizontal displacement u at (odd,odd), vertical v at (even,even),
/// shear stress at (odd,even), normal stresses at (even,odd).
struct ElasticCell {
  int nx = 0, ny = 0;
  double dx = 0, dy = 0;
  Eigen::MatrixXd E, nu, lambda, mu;

  int rows() const { return 2 * nx; }
  int cols() const { return 2 * ny; }
  double x(int i) const { return (i + 0.5) * dx / 2; }
  double y(int j) const { return (j + 0.5) * dy / 2; }
  static bool u_site(int i, int j) { return i % 2 == 1 && j % 2 == 1; }
  static bool v_site(int i, int j) { return i % 2 == 0 && j % 2 == 0; }
  static bool shear_site(int i, int j) { return i % 2 == 1 && j % 2 == 0; }
  static bool normal_site(int i, int j) { return i % 2 == 0 && j % 2 == 1; }
  /// Max deviation of stored Lame fields from their E, nu formulas.
  double lame_consistency() const;
  double harmonic_mean_E() const;
};

using Field2D = std::function<double(double, double)>;

/// E = (0.01 + |sin(pi x) sin(pi y)|)/pi.
double sinpattern(double x, double y);

ElasticCell build_elastic_cell(const Field2D& E, const Field2D& nu, int nx, int ny);

}  // namespace micromorph
