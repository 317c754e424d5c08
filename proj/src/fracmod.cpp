#include "micromorph/fracmod.hpp"

#include "micromorph/errors.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace micromorph {

namespace {

template <unsigned D>
using Float = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<D>>;
using Big = Float<40>;
using cd = std::complex<double>;

constexpr double kPi = std::numbers::pi;

template <class R>
R rgamma(const R& x) {
  if (x <= 0 && x == floor(x)) return R(0);
  return 1 / boost::multiprecision::tgamma(x);
}

// Power series; the largest partial terms are about exp(x) with
// x = |z|^(1/alpha), so the working precision grows with x to absorb the
// cancellation for negative arguments.
template <class R>
cd series_mp(double alpha, double beta, cd z, double x) {
  const R zr = z.real(), zi = z.imag();
  R sr = 0, si = 0, pr = 1, pi = 0, maxterm = 0;
  const R a = alpha, b = beta, cut = pow(R(10), -(std::numeric_limits<R>::digits10 - 2));
  for (int k = 0; k < 100000; ++k) {
    const R rg = rgamma<R>(a * k + b);
    const R tr = pr * rg, ti = pi * rg;
    sr += tr;
    si += ti;
    const R mag = abs(tr) + abs(ti);
    if (mag > maxterm) maxterm = mag;
    if (alpha * k + beta > x + 2 && mag < maxterm * cut) break;
    const R nr = pr * zr - pi * zi;
    pi = pr * zi + pi * zr;
    pr = nr;
  }
  return {sr.template convert_to<double>(), si.template convert_to<double>()};
}

cd series(double alpha, double beta, cd z) {
  const double x = std::pow(std::abs(z), 1.0 / alpha);
  if (x < 0.5) {
    // No cancellation to speak of; double precision is enough.
    cd sum = 0, zk = 1;
    for (int k = 0; k < 200; ++k) {
      const double g = alpha * k + beta;
      const double rg = (g <= 0 && g == std::floor(g)) ? 0.0 : 1.0 / std::tgamma(g);
      cd term = zk * rg;
      sum += term;
      if (k > 2 && std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
      zk *= z;
    }
    return sum;
  }
  if (x < 12) return series_mp<Float<25>>(alpha, beta, z, x);
  if (x < 35) return series_mp<Float<40>>(alpha, beta, z, x);
  return series_mp<Float<70>>(alpha, beta, z, x);
}

// Exponential contributions from the branches s_j = z^(1/alpha) e^(2 pi i j / alpha)
// inside |arg| < alpha pi (half weight on the boundary), minus the algebraic
// tail.  The tail is cut at the minimum of its envelope
// Gamma(1 - beta + alpha k) / (pi |z|^k), which bounds |1/Gamma(beta - alpha k)|
// by reflection; individual terms dip near the poles of Gamma.
cd asymptotic(double alpha, double beta, cd z) {
  const double r = std::abs(z), th = std::arg(z);
  cd out = 0;
  for (int j = -2; j <= 2; ++j) {
    const double phi = th + 2 * kPi * j;
    const double edge = std::fabs(phi) - alpha * kPi;
    if (edge > 1e-12) continue;
    const double w = edge > -1e-12 ? 0.5 : 1.0;
    const cd s = std::polar(std::pow(r, 1.0 / alpha), phi / alpha);
    out += w / alpha * std::pow(s, 1.0 - beta) * std::exp(s);
  }
  int kstar = 1;
  double best = HUGE_VAL;
  for (int k = 1; k < 2000; ++k) {
    const double g = 1 - beta + alpha * k;
    const double env = (g > 0 ? std::lgamma(g) : 0.0) - k * std::log(r);
    if (env < best) {
      best = env;
      kstar = k;
    } else if (env > best + 5) {
      break;
    }
  }
  const Big a = alpha, b = beta;
  cd zinv = 1.0 / z, zk = zinv;
  for (int k = 1; k <= kstar; ++k, zk *= zinv) {
    const cd term = zk * rgamma<Big>(b - a * k).convert_to<double>();
    out -= term;
    const double g = 1 - beta + alpha * k;
    const double env = std::exp((g > 0 ? std::lgamma(g) : 0.0) - k * std::log(r)) / kPi;
    if (env < 1e-18 * std::abs(out)) break;
  }
  return out;
}

cd evaluate(double alpha, double beta, cd z, const MLOptions& opts) {
  if (z == cd(0)) return rgamma(Big(beta)).convert_to<double>();
  MLRegime regime = opts.regime;
  if (regime == MLRegime::automatic)
    regime = std::pow(std::abs(z), 1.0 / alpha) < opts.x_switch ? MLRegime::series : MLRegime::asymptotic;
  return regime == MLRegime::series ? series(alpha, beta, z) : asymptotic(alpha, beta, z);
}

void check_alpha(double alpha) {
  if (!(alpha > 0 && alpha <= 2)) throw ValidationError("alpha must lie in (0, 2]");
}

}  // namespace

std::complex<double> mittag_leffler(double alpha, double beta, std::complex<double> z, const MLOptions& opts) {
  check_alpha(alpha);
  if (!(beta > 0)) throw ValidationError("beta must be positive");
  return evaluate(alpha, beta, z, opts);
}

double mittag_leffler(double alpha, double beta, double z, const MLOptions& opts) {
  return mittag_leffler(alpha, beta, cd(z, 0.0), opts).real();
}

double e_alpha(double alpha, int k, double t, const MLOptions& opts) {
  check_alpha(alpha);
  if (t < 0) throw ValidationError("e_alpha needs t >= 0");
  const double z = -std::pow(t, alpha);
  switch (k) {
    case 0:
      return t == 0 ? 1.0 : evaluate(alpha, 1.0, z, opts).real();
    case -1:
      return t == 0 ? 0.0 : t * evaluate(alpha, 2.0, z, opts).real();
    case 1:
      if (t <= 0) throw ValidationError("e_alpha^(1) needs t > 0");
      return evaluate(alpha, 0.0, z, opts).real() / t;
    default:
      throw ValidationError("e_alpha component must be -1, 0 or 1");
  }
}

std::string ModalTrajectory::csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "t,u,asinh_u\n";
  for (std::size_t i = 0; i < t.size(); ++i) os << t[i] << ',' << u[i] << ',' << std::asinh(u[i]) << '\n';
  return os.str();
}

ModalTrajectory modal_solution(double alpha, double lambda, const std::vector<double>& c,
                               const std::vector<double>& t, const std::optional<std::vector<double>>& q,
                               const MLOptions& opts) {
  check_alpha(alpha);
  if (!(lambda < 0)) throw ValidationError("modal solutions need a real negative eigenvalue");
  const std::size_t nc = alpha <= 1 ? 1 : 2;
  if (c.size() != nc)
    throw ValidationError("expected " + std::to_string(nc) + " initial value(s) for alpha = " + std::to_string(alpha));
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] < 0 || (i > 0 && t[i] <= t[i - 1])) throw ValidationError("t-grid must be non-negative and increasing");
  if (q && q->size() != t.size()) throw ValidationError("forcing must be sampled on the t-grid");
  if (q && (t.empty() || t.front() != 0)) throw ValidationError("forced solutions need a t-grid starting at 0");

  ModalTrajectory out;
  out.alpha = alpha;
  out.lambda = lambda;
  out.mu = std::pow(-lambda, 1.0 / alpha);
  out.t = t;
  out.u.assign(t.size(), 0.0);
  const double mu = out.mu;

  for (std::size_t i = 0; i < t.size(); ++i) {
    double u = c[0] * e_alpha(alpha, 0, mu * t[i], opts);
    if (nc == 2) u += c[1] / mu * e_alpha(alpha, -1, mu * t[i], opts);
    out.u[i] = u;
  }
  if (!q) return out;

  // K(s) = mu^-alpha e^(0)(mu s) has K' = mu^(1-alpha) e^(1)(mu s); P = int_0^s K.
  const double scale = std::pow(mu, -alpha);
  const double quantum = 1e-13 * std::max(1.0, t.back());
  std::map<long long, std::pair<double, double>> cache;
  auto KP = [&](double s) {
    const long long key = std::llround(s / quantum);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::pair<double, double> v{scale * e_alpha(alpha, 0, mu * s, opts),
                                scale / mu * e_alpha(alpha, -1, mu * s, opts)};
    cache.emplace(key, v);
    return v;
  };
  const auto& f = *q;
  for (std::size_t n = 1; n < t.size(); ++n) {
    double conv = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [Kb, Pb] = KP(t[n] - t[i]);
      const auto [Ka, Pa] = KP(t[n] - t[i + 1]);
      const double slope = (f[i + 1] - f[i]) / (t[i + 1] - t[i]);
      conv += Kb * f[i] - Ka * f[i + 1] + slope * (Pb - Pa);
    }
    out.u[n] -= conv;
  }
  return out;
}

}  // namespace micromorph
