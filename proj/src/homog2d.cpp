#include "micromorph/homog2d.hpp"

#include "micromorph/errors.hpp"

#include <cmath>
#include <sstream>

namespace micromorph {

using Eigen::MatrixXd;
using Eigen::VectorXd;

GradientSeries<VectorXd> ShiftExpansion::apply(const GradientSeries<VectorXd>& f) const {
  GradientSeries<VectorXd> out = f;
  GradientSeries<VectorXd> d = f;
  double factor = 1.0;
  for (int n = 1; !d.empty(); ++n) {
    d = apply_gradient(d, axis);
    if (d.empty()) break;
    factor *= direction * h / n;
    GradientSeries<VectorXd> step = d;
    step *= factor;
    out += step;
  }
  return out;
}

namespace {

// Lattice-flat vectors: entry (i, j) of the 2nx x 2ny lattice at i * cols + j.
struct Lattice {
  const ElasticCell& cell;
  int R, C;
  VectorXd mu, lam, shear, normal, usite, vsite;
  std::vector<int> site;  // lattice index of displacement unknown k

  explicit Lattice(const ElasticCell& c) : cell(c), R(c.rows()), C(c.cols()) {
    const int n = R * C;
    mu = lam = shear = normal = usite = vsite = VectorXd::Zero(n);
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j) {
        int k = i * C + j;
        mu[k] = c.mu(i, j);
        lam[k] = c.lambda(i, j);
        shear[k] = ElasticCell::shear_site(i, j);
        normal[k] = ElasticCell::normal_site(i, j);
        usite[k] = ElasticCell::u_site(i, j);
        vsite[k] = ElasticCell::v_site(i, j);
      }
    const int nd = 2 * c.nx * c.ny;
    site.resize(static_cast<std::size_t>(nd));
    for (int k = 0; k < nd; ++k) {
      auto [i, j] = elastic_site(k, c.ny);
      site[static_cast<std::size_t>(k)] = i * C + j;
    }
  }

  VectorXd scatter(const VectorXd& d) const {
    if (d.size() != static_cast<Eigen::Index>(site.size()))
      throw DomainError("elastic coefficient length mismatch");
    VectorXd out = VectorXd::Zero(R * C);
    for (std::size_t k = 0; k < site.size(); ++k) out[site[k]] = d[static_cast<Eigen::Index>(k)];
    return out;
  }
  VectorXd gather(const VectorXd& l) const {
    VectorXd out(static_cast<Eigen::Index>(site.size()));
    for (std::size_t k = 0; k < site.size(); ++k) out[static_cast<Eigen::Index>(k)] = l[site[k]];
    return out;
  }
  // (S f)(i, j) = f(i + di, j + dj), periodic.
  VectorXd shift(const VectorXd& f, int di, int dj) const {
    VectorXd out(R * C);
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j) out[i * C + j] = f[((i + di + R) % R) * C + (j + dj + C) % C];
    return out;
  }

  // Centred difference across one lattice step, each side carried half a
  // cell step along the macroscale.
  GradientSeries<VectorXd> diff(const GradientSeries<VectorXd>& f, Axis axis) const {
    const bool ax = axis == Axis::x;
    const double step = ax ? cell.dx : cell.dy;
    const int di = ax ? 1 : 0, dj = ax ? 0 : 1;
    auto fwd = f.map_coeffs([&](const VectorXd& c) -> VectorXd { return shift(c, di, dj); });
    auto bwd = f.map_coeffs([&](const VectorXd& c) -> VectorXd { return shift(c, -di, -dj); });
    auto out = ShiftExpansion{axis, +1, step / 2}.apply(fwd) - ShiftExpansion{axis, -1, step / 2}.apply(bwd);
    out *= 1.0 / step;
    return out;
  }
};

GradientSeries<VectorXd> weight(const GradientSeries<VectorXd>& f, const VectorXd& w) {
  return f.map_coeffs([&](const VectorXd& c) -> VectorXd { return w.cwiseProduct(c); });
}

}  // namespace

ElasticField embedded_residual_2d(const ElasticField& v, const HomogenisedModel<double>& model,
                                  const ElasticCell& cell) {
  if (!(model.trunc == v.trunc())) throw DomainError("truncation mismatch between field and model");
  Lattice L(cell);
  auto f = v.map_coeffs([&](const VectorXd& c) -> VectorXd { return L.scatter(c); });
  auto di = L.diff(f, Axis::x);
  auto dj = L.diff(f, Axis::y);

  const VectorXd lam2mu = L.lam + 2 * L.mu;
  auto sum = di + dj;
  auto s1 = weight(sum, L.shear.cwiseProduct(L.mu)) + weight(di, L.normal.cwiseProduct(lam2mu)) +
            weight(dj, L.normal.cwiseProduct(L.lam));
  auto s2 = weight(sum, L.shear.cwiseProduct(L.mu)) + weight(di, L.normal.cwiseProduct(L.lam)) +
            weight(dj, L.normal.cwiseProduct(lam2mu));
  auto acc = weight(L.diff(s1, Axis::x) + L.diff(s1, Axis::y), L.usite) +
             weight(L.diff(s2, Axis::x) + L.diff(s2, Axis::y), L.vsite);

  ElasticField res = time_derivative(v, model);
  res -= acc.map_coeffs([&](const VectorXd& c) -> VectorXd { return L.gather(c); });
  return res;
}

double elastic_amplitude_defect(const ElasticField& v, const EigenBasis& basis) {
  return amplitude_defect(v, basis);
}

Elastic2dResult construct_2d(const ElasticCell& cell, const Elastic2dOptions& opts) {
  if (opts.modes < 2) throw ValidationError("elastic models need at least the two translation modes");
  if (opts.N < 1) throw ValidationError("truncation order N must be positive");
  CellOperator op = assemble_cell_operator(cell);
  Elastic2dResult out;
  out.basis = eigen_select(op, opts.modes, 2).first;
  const int M = opts.modes;
  BorderedSystem bordered(op.matrix, out.basis.V);

  const Truncation t = Truncation::make(opts.N, 1, 1);
  out.field = ElasticField(t);
  out.model = HomogenisedModel<double>(M, 2, t);
  for (int m = 0; m < M; ++m) {
    out.field.add_term(Monomial::amp(m), out.basis.V.col(m));
    out.model.rhs[static_cast<std::size_t>(m)].add_term(Monomial::amp(m), out.basis.lambda[m]);
  }

  const double R = 2.0;
  double maxnorm = 1.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    auto res = embedded_residual_2d(out.field, out.model, cell);
    if (it == 1) {
      for (const auto& [mono, c] : res.terms())
        if (mono.deriv_order() == 0 && c.lpNorm<Eigen::Infinity>() > 1e-8 * op.norm())
          throw NumericalError("invariant subspace not satisfied by the selected basis");
    }
    double norm = weighted_norm(res, R);
    out.log.push_back(norm);
    maxnorm = std::max(maxnorm, norm);
    if (norm < opts.tol * maxnorm) {
      double defect = elastic_amplitude_defect(out.field, out.basis);
      if (defect > 1e-8) throw NumericalError("amplitude not preserved: defect " + std::to_string(defect));
      out.model.meta.iterations = it;
      out.model.meta.residual_log = out.log;
      out.model.meta.problem = "elastic2d";
      out.model.meta.dim = 2;
      return out;
    }
    auto up = homological_solve_grid(res, bordered);
    out.field += up.dv;
    for (int m = 0; m < M; ++m) out.model.rhs[static_cast<std::size_t>(m)] += up.dG[static_cast<std::size_t>(m)];
    const double small = opts.zero_small * maxnorm;
    out.field.prune([&](const Monomial&, const VectorXd& c) { return c.lpNorm<Eigen::Infinity>() < small; });
    for (auto& g : out.model.rhs) g.prune([&](const Monomial&, double c) { return std::fabs(c) < small; });
  }
  throw ConvergenceError("elastic construction did not converge in " + std::to_string(opts.max_iter) +
                             " iterations",
                         out.log);
}

double ElasticSymmetryReport::max_error() const {
  return std::max({std::fabs(errors[0]), std::fabs(errors[1]), std::fabs(errors[2])});
}

ElasticSymmetryReport elastic_symmetry_report(const HomogenisedModel<double>& model) {
  if (model.modes < 2) throw ValidationError("symmetry report needs both translation modes");
  auto c = [&](int m, int mode, int dx, int dy) { return model.coeff(m, Monomial::amp(mode, dx, dy)); };
  ElasticSymmetryReport r;
  r.mu_h = c(0, 0, 0, 2);
  r.lambda_2 = c(0, 1, 1, 1) - r.mu_h;
  r.lambda_1 = c(0, 0, 2, 0) - 2 * r.mu_h;
  r.errors[0] = r.mu_h - c(1, 1, 2, 0);
  r.errors[1] = r.lambda_2 - c(1, 0, 1, 1) + r.mu_h;
  r.errors[2] = r.lambda_1 - c(1, 1, 0, 2) + 2 * r.mu_h;
  return r;
}

std::string elastic_mode_csv(const ElasticCell& cell, const EigenBasis& basis, int mode) {
  if (basis.kind != CellKind::elastic || mode < 0 || mode >= basis.M)
    throw ValidationError("no such elastic mode");
  std::ostringstream os;
  os.precision(10);
  os << "x,y,u,v\n";
  const VectorXd& v = basis.V.col(mode);
  for (int k = 0; k + 1 < v.size(); k += 2) {
    // k even: v site at (2p, 2q); k + 1: u site at (2p+1, 2q+1).  Report both at the u position.
    auto [i, j] = elastic_site(k + 1, cell.ny);
    os << cell.x(i) << ',' << cell.y(j) << ',' << v[k + 1] << ',' << v[k] << '\n';
  }
  return os.str();
}

}  // namespace micromorph
