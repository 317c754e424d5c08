/**
 * @file fracmod.hpp
 * @brief Mittag-Leffler functions and modal solutions of the Caputo
 *        fractional equation d_t^alpha u = lambda u + q.
 */
#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace micromorph {

enum class MLRegime { automatic, series, asymptotic };

/// Regime selection.  The switch is on x = |z|^(1/alpha), the modulus of the
/// exponential argument, since the asymptotic error behaves like exp(-x).
struct MLOptions {
  MLRegime regime = MLRegime::automatic;
  double x_switch = 30.0;
};

/// E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta), alpha in (0, 2], beta > 0.
std::complex<double> mittag_leffler(double alpha, double beta, std::complex<double> z,
                                    const MLOptions& opts = {});
double mittag_leffler(double alpha, double beta, double z, const MLOptions& opts = {});

/// e^(0)(t) = E_{a,1}(-t^a), e^(-1)(t) = t E_{a,2}(-t^a), e^(1)(t) = E_{a,0}(-t^a) / t.
double e_alpha(double alpha, int k, double t, const MLOptions& opts = {});

struct ModalTrajectory {
  double alpha = 1;
  double lambda = -1;
  double mu = 1;
  std::vector<double> t;
  std::vector<double> u;

  /// t, u, asinh(u)
  std::string csv() const;
};

/// Solution of d_t^alpha u = lambda u + q with Caputo initial data
/// c_k = u^(k)(0), k < ceil(alpha).  q, when given, is sampled on the grid
/// and treated as piecewise linear; the convolution is integrated exactly
/// against that interpolant.
ModalTrajectory modal_solution(double alpha, double lambda, const std::vector<double>& c,
                               const std::vector<double>& t,
                               const std::optional<std::vector<double>>& q = std::nullopt,
                               const MLOptions& opts = {});

}  // namespace micromorph
