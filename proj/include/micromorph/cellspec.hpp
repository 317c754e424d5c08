/**
 * @file cellspec.hpp
 * @brief Cell operators, eigen-bases with spectral-gap reports, and the
 *        analytic thin-layer spectrum.
 */
#pragma once

#include "micromorph/hetero.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace micromorph {

enum class CellKind { harmonic, grid1d, elastic };

struct CellOperator {
  CellKind kind = CellKind::harmonic;
  Eigen::MatrixXd matrix;  // grid1d / elastic
  bool symmetric = true;
  double ell = 0;          // grid1d cell length
  int nx = 0, ny = 0;      // elastic lattice

  double norm() const;
  double asymmetry() const;
};

/// The a=0 constant-coefficient operator d^2/dq^2 acting on harmonics.
CellOperator harmonic_cell_operator();
/// (E - I) diag(kappa) (I - E^T) / dq^2 with half-point coefficients.
CellOperator assemble_cell_operator(const GridField1D& kappa);
/// Jacobian of the staggered elastic acceleration on displacement sites.
CellOperator assemble_cell_operator(const ElasticCell& cell);

/// Elastic acceleration of a lattice displacement field (2nx x 2ny array;
/// entries at stress sites are ignored).  Returned at displacement sites.
Eigen::MatrixXd elastic_acceleration(const ElasticCell& cell, const Eigen::MatrixXd& uv);
/// Lattice coordinates of displacement unknown k in Jacobian order.
std::pair<int, int> elastic_site(int k, int ny);

struct GapReport {
  double beta_retained = 0;
  double beta_discarded = 0;
  double ratio = std::numeric_limits<double>::infinity();
  double timescale = 0;
};

struct EigenBasis {
  CellKind kind = CellKind::harmonic;
  int M = 0;
  Eigen::VectorXd lambda;  // retained eigenvalues, non-increasing
  double next_lambda = 0;  // first discarded eigenvalue
  Eigen::MatrixXd V;       // dense kinds: columns are eigenvectors
  Eigen::MatrixXd W;       // projection: U_m = W.col(m).dot(u)
  std::string normalisation;

  /// Harmonic basis: mode 0 -> 1, odd m -> sin((m+1)/2 q), even m -> cos(m/2 q).
  static std::pair<int, Parity> harmonic_mode(int m);
  static double harmonic_lambda(int m);
  TrigPoly trig_vector(int m) const;
};

std::pair<EigenBasis, GapReport> eigen_select(const CellOperator& op, int M, int alpha);
GapReport gap_report(const Eigen::VectorXd& retained, double next, int alpha);

/// Rayleigh-quotient inverse iteration from a starting shift and guess.
/// Returns (eigenvalue, unit eigenvector).
std::pair<double, Eigen::VectorXd> shift_invert(const Eigen::MatrixXd& L, double shift,
                                                Eigen::VectorXd guess, double tol = 1e-12,
                                                int max_iter = 50);

enum class LayerFamily { symmetric, asymmetric };

struct ThinLayerMode {
  int m = 0;
  double lambda = 0;
  double K = 0;  // root of tan K = -chi K (odd m); m pi/2 for even m
  LayerFamily family = LayerFamily::symmetric;
};

std::vector<ThinLayerMode> thin_layer_spectrum(double chi, int m_max, double ell = 2 * std::numbers::pi,
                                               double kappa1 = 1.0);

/// CSV: index, eigenvalue, vector samples.
std::string eigen_csv(const EigenBasis& b);

}  // namespace micromorph
