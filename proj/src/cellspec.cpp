#include "micromorph/cellspec.hpp"

#include "micromorph/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>

namespace micromorph {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double CellOperator::norm() const {
  if (kind == CellKind::harmonic) return 1.0;
  return matrix.cwiseAbs().rowwise().sum().maxCoeff();
}

double CellOperator::asymmetry() const {
  if (kind == CellKind::harmonic) return 0.0;
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
}

CellOperator harmonic_cell_operator() {
  CellOperator op;
  op.kind = CellKind::harmonic;
  op.ell = 2 * std::numbers::pi;
  return op;
}

CellOperator assemble_cell_operator(const GridField1D& kappa) {
  kappa.validate_coefficient();
  const int n = kappa.n();
  const double h2 = kappa.dq() * kappa.dq();
  CellOperator op;
  op.kind = CellKind::grid1d;
  op.ell = kappa.ell;
  op.matrix = MatrixXd::Zero(n, n);
  // Half-point j sits between u_{j-1} and u_j.
  for (int i = 0; i < n; ++i) {
    int ip = (i + 1) % n, im = (i + n - 1) % n;
    double kr = kappa.samples[ip], kl = kappa.samples[i];
    op.matrix(i, ip) += kr / h2;
    op.matrix(i, i) -= (kr + kl) / h2;
    op.matrix(i, im) += kl / h2;
  }
  if (op.asymmetry() > 1e-10 * op.norm()) throw NumericalError("assembly bug: asymmetric cell operator");
  return op;
}

std::pair<int, int> elastic_site(int k, int ny) {
  int lo = k % 2;
  int cell = k / 2;
  int p = cell / ny, q = cell % ny;
  return {2 * p + lo, 2 * q + lo};
}

MatrixXd elastic_acceleration(const ElasticCell& c, const MatrixXd& uv) {
  const int R = c.rows(), C = c.cols();
  auto at = [&](const MatrixXd& a, int i, int j) { return a((i + R) % R, (j + C) % C); };
  MatrixXd s1 = MatrixXd::Zero(R, C), s2 = MatrixXd::Zero(R, C);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) {
      if (ElasticCell::u_site(i, j) || ElasticCell::v_site(i, j)) continue;
      double di = (at(uv, i + 1, j) - at(uv, i - 1, j)) / c.dx;
      double dj = (at(uv, i, j + 1) - at(uv, i, j - 1)) / c.dy;
      double lam = c.lambda(i, j), mu = c.mu(i, j);
      if (ElasticCell::shear_site(i, j)) {
        s1(i, j) = s2(i, j) = mu * (di + dj);
      } else {
        s1(i, j) = (lam + 2 * mu) * di + lam * dj;  // sigma_xx
        s2(i, j) = lam * di + (lam + 2 * mu) * dj;  // sigma_yy
      }
    }
  MatrixXd acc = MatrixXd::Zero(R, C);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) {
      const MatrixXd* s = ElasticCell::u_site(i, j) ? &s1 : ElasticCell::v_site(i, j) ? &s2 : nullptr;
      if (!s) continue;
      acc(i, j) = (at(*s, i + 1, j) - at(*s, i - 1, j)) / c.dx +
                  (at(*s, i, j + 1) - at(*s, i, j - 1)) / c.dy;
    }
  return acc;
}

CellOperator assemble_cell_operator(const ElasticCell& cell) {
  const int n = 2 * cell.nx * cell.ny;
  CellOperator op;
  op.kind = CellKind::elastic;
  op.nx = cell.nx;
  op.ny = cell.ny;
  op.matrix.resize(n, n);
  MatrixXd uv = MatrixXd::Zero(cell.rows(), cell.cols());
  for (int l = 0; l < n; ++l) {
    auto [il, jl] = elastic_site(l, cell.ny);
    uv(il, jl) = 1;
    MatrixXd acc = elastic_acceleration(cell, uv);
    uv(il, jl) = 0;
    for (int k = 0; k < n; ++k) {
      auto [ik, jk] = elastic_site(k, cell.ny);
      op.matrix(k, l) = acc(ik, jk);
    }
  }
  if (op.asymmetry() > 1e-10 * op.norm()) throw NumericalError("assembly bug: asymmetric elastic Jacobian");
  return op;
}

std::pair<int, Parity> EigenBasis::harmonic_mode(int m) {
  if (m == 0) return {0, Parity::cos};
  return m % 2 ? std::pair{(m + 1) / 2, Parity::sin} : std::pair{m / 2, Parity::cos};
}

double EigenBasis::harmonic_lambda(int m) {
  int n = harmonic_mode(m).first;
  return -static_cast<double>(n) * n;
}

TrigPoly EigenBasis::trig_vector(int m) const {
  auto [n, p] = harmonic_mode(m);
  return TrigPoly::harmonic(n, p);
}

GapReport gap_report(const VectorXd& retained, double next, int alpha) {
  GapReport g;
  double inv = 1.0 / alpha;
  g.beta_retained = 0;
  for (int i = 0; i < retained.size(); ++i)
    g.beta_retained = std::max(g.beta_retained, std::pow(std::fabs(retained[i]), inv));
  g.beta_discarded = std::pow(std::fabs(next), inv);
  g.ratio = g.beta_retained == 0 ? std::numeric_limits<double>::infinity()
                                 : g.beta_discarded / g.beta_retained;
  g.timescale = 1.0 / g.beta_discarded;
  return g;
}

namespace {

int sign_changes(const VectorXd& v) {
  // Interior changes only; the periodic wrap is not counted.
  int c = 0;
  for (int i = 2; i < v.size() - 1; ++i) {
    double a = v[i - 1] > 0 ? 1 : (v[i - 1] < 0 ? -1 : 0);
    double b = v[i] > 0 ? 1 : (v[i] < 0 ? -1 : 0);
    c += static_cast<int>(std::fabs(b - a) / 2 + 0.5);
  }
  return c;
}

void check_residual(const MatrixXd& L, const VectorXd& v, double lambda, double norm) {
  double r = (L * v - lambda * v).lpNorm<Eigen::Infinity>();
  if (r > 1e-8 * norm * std::max(1.0, v.lpNorm<Eigen::Infinity>()))
    throw ConvergenceError("eigenpair residual " + std::to_string(r) + " above tolerance", {r});
}

std::pair<EigenBasis, GapReport> select_harmonic(int M, int alpha) {
  EigenBasis b;
  b.kind = CellKind::harmonic;
  b.M = M;
  b.lambda.resize(M);
  for (int m = 0; m < M; ++m) b.lambda[m] = EigenBasis::harmonic_lambda(m);
  b.next_lambda = EigenBasis::harmonic_lambda(M);
  b.normalisation = "harmonic: 1, sin q, cos q, sin 2q, ...";
  if (M >= 2 && b.lambda[M - 1] == b.next_lambda)
    throw ValidationError("no spectral gap: M=" + std::to_string(M) +
                          " splits a degenerate sin/cos pair");
  return {b, gap_report(b.lambda, b.next_lambda, alpha)};
}

std::pair<EigenBasis, GapReport> select_grid(const CellOperator& op, int M, int alpha) {
  const int n = static_cast<int>(op.matrix.rows());
  if (M + 1 > n) throw ValidationError("more modes requested than grid points");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(op.matrix);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", {});
  const double norm = op.norm();
  const double tol = 1e-8 * norm;
  // Descending order.
  VectorXd ev = es.eigenvalues().reverse();
  MatrixXd evec = es.eigenvectors().rowwise().reverse();
  if (std::fabs(ev[0]) > tol) throw ValidationError("cell operator is not negative semi-definite");
  if (ev[M - 1] - ev[M] < tol)
    throw ValidationError("no spectral gap between retained and discarded modes");

  const double dq = op.ell / n;
  auto theta = [&](int i) { return ((i + 0.5) / n - 0.5) * op.ell; };
  EigenBasis b;
  b.kind = CellKind::grid1d;
  b.M = M;
  b.lambda = ev.head(M);
  b.lambda[0] = 0;
  b.next_lambda = ev[M];
  b.V.resize(n, M);
  b.V.col(0).setOnes();
  b.normalisation = "unit mean square, scale sqrt(ell/dq)";

  // Reflection q -> -q maps point i to n-1-i.
  auto reflect = [&](const VectorXd& v) { return VectorXd(v.reverse()); };
  int m = 1;
  while (m < M) {
    int e = m + 1;
    while (e < n && ev[e - 1] - ev[e] < tol) ++e;  // cluster [m, e)
    MatrixXd span = evec.middleCols(m, e - m);
    if (e - m > 1) {
      MatrixXd P(span.cols(), span.cols());
      for (int i = 0; i < span.cols(); ++i) P.col(i) = span.transpose() * reflect(span.col(i));
      Eigen::SelfAdjointEigenSolver<MatrixXd> ps(0.5 * (P + P.transpose()));
      span = span * ps.eigenvectors();  // ascending parity: odd (-1) first
    }
    for (int c = 0; c < span.cols() && m + c < M; ++c) {
      int k = m + c;
      VectorXd v = span.col(c).normalized() * std::sqrt(op.ell / dq);
      // Odd modes have an odd number of interior sign changes, even modes an
      // even number; the sign follows the matching half-harmonic.
      const int changes = sign_changes(v);
      const bool odd = v.dot(reflect(v)) < 0;
      if (odd != (changes % 2 == 1))
        throw NumericalError("mode identification failed: eigenvector " + std::to_string(k) +
                             " has " + std::to_string(changes) + " sign changes but " +
                             (odd ? "odd" : "even") + " parity");
      VectorXd guess(n);
      for (int i = 0; i < n; ++i)
        guess[i] = odd ? std::sin(changes * theta(i) / 2) : std::cos(changes * theta(i) / 2);
      if (v.dot(guess) < 0) v = -v;
      b.V.col(k) = v;
    }
    m = e;
  }
  for (int k = 0; k < M; ++k) check_residual(op.matrix, b.V.col(k), b.lambda[k], norm);
  b.W = b.V;
  for (int k = 0; k < M; ++k) b.W.col(k) /= b.V.col(k).squaredNorm();
  return {b, gap_report(b.lambda, b.next_lambda, alpha)};
}

std::pair<EigenBasis, GapReport> select_elastic(const CellOperator& op, int M, int alpha) {
  const int n = static_cast<int>(op.matrix.rows());
  if (M < 2) throw ValidationError("elastic cells need at least the two translation modes");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(op.matrix);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", {});
  const double norm = op.norm();
  const double tol = 1e-8 * norm;
  VectorXd ev = es.eigenvalues().reverse();
  MatrixXd evec = es.eigenvectors().rowwise().reverse();
  if (std::fabs(ev[0]) > tol || std::fabs(ev[1]) > tol || std::fabs(ev[2]) < tol)
    throw ValidationError("elastic Jacobian kernel is not exactly the two translations");
  if (ev[M - 1] - ev[M] < tol) throw ValidationError("no spectral gap at the requested mode count");

  EigenBasis b;
  b.kind = CellKind::elastic;
  b.M = M;
  b.lambda = ev.head(M);
  b.lambda[0] = b.lambda[1] = 0;
  b.next_lambda = ev[M];
  b.V = MatrixXd::Zero(n, M);
  for (int k = 0; k < n; ++k) (k % 2 ? b.V(k, 0) : b.V(k, 1)) = 1.0;
  b.normalisation = "translations exact; other modes max-abs 1, first extreme entry negative";
  for (int m = 2; m < M; ++m) {
    VectorXd v = evec.col(m);
    double top = v.cwiseAbs().maxCoeff();
    for (int k = 0; k < n; ++k)
      if (std::fabs(std::fabs(v[k]) - top) < 1e-9 * top) {
        if (v[k] > 0) v = -v;
        break;
      }
    b.V.col(m) = v / top;
  }
  for (int k = 0; k < M; ++k) check_residual(op.matrix, b.V.col(k), b.lambda[k], norm);
  b.W = b.V;
  for (int k = 0; k < M; ++k) b.W.col(k) /= b.V.col(k).squaredNorm();
  return {b, gap_report(b.lambda, b.next_lambda, alpha)};
}

}  // namespace

std::pair<EigenBasis, GapReport> eigen_select(const CellOperator& op, int M, int alpha) {
  if (M < 1) throw ValidationError("mode count M must be at least 1");
  if (alpha != 1 && alpha != 2) throw ValidationError("alpha must be 1 or 2");
  switch (op.kind) {
    case CellKind::harmonic: return select_harmonic(M, alpha);
    case CellKind::grid1d: return select_grid(op, M, alpha);
    case CellKind::elastic: return select_elastic(op, M, alpha);
  }
  throw ValidationError("unknown cell operator kind");
}

std::pair<double, VectorXd> shift_invert(const MatrixXd& L, double shift, VectorXd guess,
                                         double tol, int max_iter) {
  const int n = static_cast<int>(L.rows());
  VectorXd v = guess.normalized();
  double mu = shift;
  for (int it = 0; it < max_iter; ++it) {
    MatrixXd A = L - mu * MatrixXd::Identity(n, n);
    Eigen::FullPivLU<MatrixXd> lu(A);
    if (!lu.isInvertible()) return {mu, v};  // shift landed on the eigenvalue
    VectorXd w = lu.solve(v).normalized();
    if (w.dot(v) < 0) w = -w;
    double rq = w.dot(L * w);
    double change = (w - v).norm();
    v = w;
    mu = rq;
    if (change < tol && (L * v - mu * v).norm() < tol * std::max(1.0, L.norm())) return {mu, v};
  }
  throw ConvergenceError("shift-invert iteration did not converge", {});
}

std::vector<ThinLayerMode> thin_layer_spectrum(double chi, int m_max, double ell, double kappa1) {
  if (!(chi > 0)) throw ValidationError("chi must be positive");
  if (m_max < 0) throw ValidationError("m_max must be non-negative");
  using std::numbers::pi;
  std::vector<ThinLayerMode> out;
  for (int m = 0; m <= m_max; ++m) {
    ThinLayerMode t;
    t.m = m;
    if (m % 2 == 0) {
      t.K = m * pi / 2;
      t.lambda = -kappa1 * pi * pi * m * m / (ell * ell);
      t.family = LayerFamily::symmetric;
    } else {
      // Root of sin K + chi K cos K = 0 (tan K = -chi K) in (m pi/2, (m+1) pi/2].
      auto f = [&](double K) { return std::sin(K) + chi * K * std::cos(K); };
      double lo = m * pi / 2, hi = (m + 1) * pi / 2;
      double flo = f(lo), fhi = f(hi);
      if (flo * fhi > 0) throw NumericalError("thin-layer root not bracketed");
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm > 0) == (flo > 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      t.K = 0.5 * (lo + hi);
      t.lambda = -kappa1 * 4 * t.K * t.K / (ell * ell);
      t.family = LayerFamily::asymmetric;
    }
    out.push_back(t);
  }
  return out;
}

std::string eigen_csv(const EigenBasis& b) {
  std::ostringstream os;
  os.precision(12);
  os << "index,eigenvalue";
  if (b.V.size())
    for (int i = 0; i < b.V.rows(); ++i) os << ",v" << i;
  os << '\n';
  for (int m = 0; m < b.M; ++m) {
    os << m << ',' << b.lambda[m];
    if (b.V.size())
      for (int i = 0; i < b.V.rows(); ++i) os << ',' << b.V(i, m);
    os << '\n';
  }
  return os.str();
}

}  // namespace micromorph
