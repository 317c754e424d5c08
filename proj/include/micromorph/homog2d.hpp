/**
 * @file homog2d.hpp
 * @brief Staggered-grid 2-D elasticity: half-shift expanded residual,
 *        bordered homological updates and effective-moduli reports.
 */
#pragma once

#include "micromorph/cellspec.hpp"
#include "micromorph/hetero.hpp"
#include "micromorph/homog1d.hpp"
#include "micromorph/model.hpp"

#include <Eigen/Dense>

namespace micromorph {

/// E^{+-1/2} = exp(+-h d) truncated by the series' gradient order.
struct ShiftExpansion {
  Axis axis = Axis::x;
  int direction = +1;
  double h = 0;  // half step, dx/2 or dy/2

  GradientSeries<Eigen::VectorXd> apply(const GradientSeries<Eigen::VectorXd>& f) const;
};

/// Field over displacement unknowns, in Jacobian order (see elastic_site).
using ElasticField = GradientSeries<Eigen::VectorXd>;

/// Acceleration residual at every displacement unknown:
/// -d_t^2 u + div sigma(u) with half-shift expanded differences.
ElasticField embedded_residual_2d(const ElasticField& v, const HomogenisedModel<double>& model,
                                  const ElasticCell& cell);

struct Elastic2dOptions {
  int modes = 2;
  int N = 3;
  double tol = 1e-8;
  double zero_small = 1e-8;
  int max_iter = 100;
};

struct Elastic2dResult {
  ElasticField field;
  HomogenisedModel<double> model;
  EigenBasis basis;
  std::vector<double> log;
};

Elastic2dResult construct_2d(const ElasticCell& cell, const Elastic2dOptions& opts);

/// Mean horizontal / vertical displacement defects against U_0, U_1.
double elastic_amplitude_defect(const ElasticField& v, const EigenBasis& basis);

struct ElasticSymmetryReport {
  double mu_h = 0;
  double lambda_1 = 0;
  double lambda_2 = 0;
  double errors[3] = {0, 0, 0};

  double max_error() const;
};

ElasticSymmetryReport elastic_symmetry_report(const HomogenisedModel<double>& model);

/// CSV quiver data (x, y, u, v) for one eigenvector.
std::string elastic_mode_csv(const ElasticCell& cell, const EigenBasis& basis, int mode);

}  // namespace micromorph
