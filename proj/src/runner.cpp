#include "micromorph/runner.hpp"

#include "micromorph/analysis.hpp"
#include "micromorph/errors.hpp"
#include "micromorph/fracmod.hpp"
#include "micromorph/homog1d.hpp"
#include "micromorph/homog2d.hpp"
#include "micromorph/model_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace micromorph {

namespace fs = std::filesystem;

namespace {

class Artifacts {
 public:
  Artifacts(const std::string& dir, std::ostream& out) : dir_(dir), out_(out) {}

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    const fs::path p = fs::path(dir_) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + p.string() + "'");
    f << content;
    out_ << "wrote " << p.string() << '\n';
  }
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

 private:
  std::string dir_;
  std::ostream& out_;
};

std::string log_csv(const std::vector<double>& log) {
  std::ostringstream os;
  os.precision(10);
  os << "iteration,residual_norm\n";
  for (std::size_t i = 0; i < log.size(); ++i) os << i + 1 << ',' << log[i] << '\n';
  return os.str();
}

ParamValues<double> param_values(const std::vector<std::pair<std::string, double>>& given) {
  const ParamNames names = default_param_names();
  ParamValues<double> out{};
  for (const auto& [k, v] : given) {
    auto it = std::find(names.begin(), names.end(), k);
    if (it == names.end()) throw ValidationError("unknown parameter symbol '" + k + "'");
    out[static_cast<std::size_t>(it - names.begin())] = v;
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  return out;
}

void print_header(const RunConfig& cfg, std::ostream& out) {
  out << "problem " << problem_name(cfg.problem) << ", M=" << cfg.modes << ", alpha=" << cfg.alpha << ", N=" << cfg.N;
  if (cfg.problem == Problem::oned_trig) out << ", order_a=" << cfg.order_a;
  if (cfg.order_gamma > 1) out << ", order_gamma=" << cfg.order_gamma;
  out << '\n';
}

int cmd_eigen(const RunConfig& cfg, std::ostream& out, Artifacts& art) {
  auto [basis, gap] = build_basis(cfg);
  out << std::setprecision(8);
  for (int m = 0; m < basis.M; ++m) out << "lambda_" << m << " = " << basis.lambda[m] << '\n';
  out << "first discarded = " << basis.next_lambda << '\n';
  out << "gap ratio = " << gap.ratio << ", timescale = " << gap.timescale << '\n';
  out << "normalisation: " << basis.normalisation << '\n';
  if (basis.kind != CellKind::harmonic) art.write("eigen.csv", eigen_csv(basis));
  if (cfg.problem == Problem::oned_grid && cfg.hetero.grid_kind == "laminate") {
    const GridField1D k = build_grid_field(cfg);
    art.write("kappa.csv", k.csv());
    out << "thin-layer analytic spectrum (chi = " << cfg.hetero.chi << "):\n";
    for (const auto& m : thin_layer_spectrum(cfg.hetero.chi, std::max(4, basis.M + 1), cfg.hetero.ell))
      out << "  m=" << m.m << " K=" << m.K << " lambda=" << m.lambda << '\n';
  }
  if (cfg.problem == Problem::elastic2d) {
    const ElasticCell cell = build_cell(cfg);
    for (int m = 0; m < basis.M; ++m) art.write("mode" + std::to_string(m) + ".csv", elastic_mode_csv(cell, basis, m));
  }
  return kExitOk;
}

int cmd_construct(const RunConfig& cfg, const BuiltModel& b, std::ostream& out, Artifacts& art) {
  out << b.text(cfg.report_threshold);
  out << "iterations: " << b.numeric.meta.iterations << '\n';
  art.write("model.json", b.document());
  art.write("iterations.csv", log_csv(b.log));
  if (cfg.reduce) {
    const auto& r = *cfg.reduce;
    if (b.exact) {
      auto red = adiabatic_reduce(*b.exact, r.keep, r.drop_order);
      out << "adiabatic reduction:\n" << pretty(red.model);
      art.write("reduced.json", to_document(red.model));
    } else {
      auto red = adiabatic_reduce(b.numeric, r.keep, r.drop_order);
      out << "adiabatic reduction:\n" << pretty(red.model, cfg.report_threshold);
      art.write("reduced.json", to_document(red.model));
    }
  }
  return kExitOk;
}

int cmd_dispersion(const RunConfig& cfg, const BuiltModel& b, std::ostream& out, Artifacts& art) {
  DispersionConfig d = cfg.dispersion.value_or(DispersionConfig{});
  if (d.k.empty()) d.k = linspace(0, 1, 50);
  const ParamValues<double> pv = param_values(d.params);
  auto sheets = dispersion_exact(b.numeric, d.order, pv);
  std::ostringstream os;
  os.precision(12);
  os << "sheet,lambda0,power,coefficient_s,coefficient_k_re,coefficient_k_im\n";
  out << std::setprecision(8);
  for (std::size_t m = 0; m < sheets.sheets.size(); ++m) {
    if (sheets.sheets[m].empty()) {
      out << "sheet " << m << " (lambda0 = " << sheets.lambda0[m] << "): repeated root, no series\n";
      continue;
    }
    out << "sheet " << m << " (lambda0 = " << sheets.lambda0[m] << "):";
    std::complex<double> ij = 1;
    for (std::size_t j = 0; j < sheets.sheets[m].size(); ++j, ij *= std::complex<double>(0, 1)) {
      const double c = sheets.sheets[m][j];
      const auto ck = c * ij;
      os << m << ',' << sheets.lambda0[m] << ',' << j << ',' << c << ',' << ck.real() << ',' << ck.imag() << '\n';
      out << ' ' << c;
    }
    out << "  (powers of s = ik)\n";
  }
  art.write("dispersion_sheets.csv", os.str());
  art.write("dispersion.csv", dispersion_grid(b.numeric, d.k, pv).csv());
  if (b.kappa) {
    std::ostringstream bo;
    bo.precision(12);
    bo << "k";
    for (int m = 0; m < cfg.modes; ++m) bo << ",branch" << m;
    bo << '\n';
    for (double k : d.k) {
      auto ev = bloch_oracle(*b.kappa, k, cfg.modes);
      bo << k;
      for (int m = 0; m < cfg.modes; ++m) bo << ',' << ev[m];
      bo << '\n';
    }
    art.write("bloch.csv", bo.str());
  }
  return kExitOk;
}

int cmd_radius(const RunConfig& cfg, const BuiltModel& b, std::ostream& out, Artifacts& art) {
  const RadiusConfig r = cfg.radius.value_or(RadiusConfig{});
  if (r.mode < 0 || r.mode >= cfg.modes) throw ValidationError("radius mode out of range");
  const ParamNames& names = b.numeric.meta.params;
  std::vector<double> coeffs;
  if (r.variable == "a") {
    if (cfg.problem != Problem::oned_trig) throw ValidationError("series in a need a oned-trig problem");
    for (int j = r.start * r.stride; j < cfg.order_a; j += r.stride) {
      Monomial m = parse_monomial(r.amp, j == 0 ? "" : "a^" + std::to_string(j), names);
      coeffs.push_back(b.numeric.coeff(r.mode, m));
    }
  } else {
    if (r.stride % 2 != 0) throw ValidationError("wavenumber series need an even stride (real coefficients)");
    if (r.amp_mode < 0 || r.amp_mode >= cfg.modes) throw ValidationError("radius amp_mode out of range");
    for (int d = r.start * r.stride; d < cfg.N; d += r.stride) {
      Monomial m = Monomial::amp(r.amp_mode, d);
      if (r.a_power > 0) m = m * Monomial::param(kParamA, r.a_power);
      const double sign = (d / 2) % 2 == 0 ? 1.0 : -1.0;  // i^d
      coeffs.push_back(sign * b.numeric.coeff(r.mode, m));
    }
  }
  SingularityEstimate est = r.method == "domb-sykes" ? domb_sykes(coeffs, r.stride) : mercer_roberts(coeffs, r.stride);
  out << std::setprecision(6) << r.method << " on " << coeffs.size() << " coefficients: radius " << est.radius
      << ", angle " << est.angle << " deg\n";
  for (const auto& n : est.notes) out << "note: " << n << '\n';
  art.write("radius.csv", est.csv());
  return kExitOk;
}

std::string deriv_name(const std::pair<int, int>& t) {
  std::string s;
  if (t.first) s += "x" + std::to_string(t.first);
  if (t.second) s += "y" + std::to_string(t.second);
  return s.empty() ? "1" : s;
}

int cmd_regularise(const RunConfig& cfg, const BuiltModel& b, std::ostream& out, Artifacts& art) {
  const RegulariseConfig r = cfg.regularise.value_or(RegulariseConfig{});
  const auto g = one_mode_operator(b.numeric);
  const auto reg = regularise(g, r.den, r.order);
  std::ostringstream os;
  os.precision(12);
  os << "part,term,coefficient\n";
  out << std::setprecision(6) << "(1";
  for (const auto& [t, c] : reg.den) {
    if (t == std::pair<int, int>{0, 0}) continue;
    out << (c < 0 ? " - " : " + ") << std::fabs(c) << "*d" << deriv_name(t);
  }
  out << ") dt U0 =";
  bool first = true;
  for (const auto& [t, c] : reg.num) {
    if (std::fabs(c) < cfg.report_threshold) continue;
    out << (first ? (c < 0 ? " -" : " ") : (c < 0 ? " - " : " + ")) << std::fabs(c) << "*U0" << deriv_name(t);
    first = false;
  }
  out << '\n';
  for (const auto& [t, c] : reg.den) os << "den," << deriv_name(t) << ',' << c << '\n';
  for (const auto& [t, c] : reg.num) os << "num," << deriv_name(t) << ',' << c << '\n';
  art.write("regularised.csv", os.str());
  return kExitOk;
}

int cmd_dns(const RunConfig& cfg, const BuiltModel& b, std::ostream& out, Artifacts& art) {
  const DnsConfig d = cfg.dns.value_or(DnsConfig{});
  std::vector<DnsReport> reps;
  out << std::setprecision(8);
  for (double k0 : d.k0) {
    DnsSpec s;
    s.alpha = cfg.alpha;
    s.cell = *b.kappa;
    s.k0 = k0;
    s.T = d.T;
    s.dt = d.dt;
    s.cfl = d.cfl;
    auto rep = dns_validate(s, b.numeric);
    out << "k0=" << k0 << ": measured " << rep.measured << ", predicted " << rep.predicted << ", abs error "
        << rep.abs_error << ", rel error " << rep.rel_error << " (" << rep.cells << " cells, " << rep.steps
        << " steps)\n";
    std::ostringstream name;
    name << "dns_k" << k0 << ".csv";
    art.write(name.str(), rep.csv());
    reps.push_back(std::move(rep));
  }
  for (std::size_t i = 1; i < reps.size(); ++i)
    out << "error ratio k0=" << d.k0[i] << " / k0=" << d.k0[i - 1] << ": abs "
        << reps[i].abs_error / reps[i - 1].abs_error << ", rel " << reps[i].rel_error / reps[i - 1].rel_error << '\n';
  return kExitOk;
}

int cmd_fde(const RunConfig& cfg, std::ostream& out, Artifacts& art) {
  const FdeConfig f = cfg.fde.value_or(FdeConfig{});
  double lambda = 0;
  if (f.lambda) {
    lambda = *f.lambda;
  } else {
    auto [basis, gap] = build_basis(cfg);
    lambda = basis.next_lambda;
    for (int m = 0; m < basis.M; ++m)
      if (basis.lambda[m] < -1e-12) {
        lambda = basis.lambda[m];
        break;
      }
  }
  const auto t = linspace(0, f.t_max, f.steps);
  std::optional<std::vector<double>> q;
  if (f.forcing) q = std::vector<double>(t.size(), *f.forcing);
  auto traj = modal_solution(f.alpha, lambda, f.c, t, q);
  out << std::setprecision(8) << "alpha=" << f.alpha << ", lambda=" << lambda << ", mu=" << traj.mu << ", u(" << f.t_max
      << ") = " << traj.u.back() << '\n';
  art.write("fde.csv", traj.csv());
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const BuiltModel& b, std::ostream& out, Artifacts& art) {
  if (!cfg.verify || cfg.verify->reference.empty()) throw ValidationError("verify needs verify.reference in the config");
  fs::path ref = cfg.verify->reference;
  if (ref.is_relative() && !cfg.source.empty()) ref = fs::path(cfg.source).parent_path() / ref;
  std::ifstream in(ref);
  if (!in) throw ValidationError("cannot read reference '" + ref.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const AnyModel reference = parse_document(ss.str());
  const AnyModel candidate = b.exact ? AnyModel(*b.exact) : AnyModel(b.numeric);
  VerifyOptions o{cfg.verify->abs_tol, cfg.verify->rel_tol, cfg.verify->ignore_below};
  const DiffReport rep = diff_models(reference, candidate, o);
  out << rep.text();
  art.write("verify.csv", rep.csv());
  return rep.ok() ? kExitOk : kExitVerifyDiff;
}

}  // namespace

std::string BuiltModel::document() const { return exact ? to_document(*exact) : to_document(numeric); }

std::string BuiltModel::text(double threshold) const { return exact ? pretty(*exact) : pretty(numeric, threshold); }

GridField1D build_grid_field(const RunConfig& cfg) {
  const HeteroConfig& h = cfg.hetero;
  if (h.grid_kind == "laminate") return sample_laminate(h.ell, h.eta, h.chi, h.n);
  if (h.grid_kind == "constant") return sample_function([](double) { return 1.0; }, h.ell, h.n);
  const double a = h.a, w = 2 * std::numbers::pi / h.ell;
  if (!(std::fabs(a) < 1)) throw ValidationError("reciprocal-cos needs |a| < 1");
  return sample_function([a, w](double q) { return 1.0 / (1.0 + a * std::cos(w * q)); }, h.ell, h.n);
}

ElasticCell build_cell(const RunConfig& cfg) {
  const HeteroConfig& h = cfg.hetero;
  const double nu = h.nu, E0 = h.E_value;
  Field2D E = h.E == "sinpattern" ? Field2D(sinpattern) : Field2D([E0](double, double) { return E0; });
  return build_elastic_cell(E, [nu](double, double) { return nu; }, h.nx, h.ny);
}

std::pair<EigenBasis, GapReport> build_basis(const RunConfig& cfg) {
  switch (cfg.problem) {
    case Problem::oned_trig:
      return eigen_select(harmonic_cell_operator(), cfg.modes, cfg.alpha);
    case Problem::oned_grid:
      return eigen_select(assemble_cell_operator(build_grid_field(cfg)), cfg.modes, cfg.alpha);
    case Problem::elastic2d:
      return eigen_select(assemble_cell_operator(build_cell(cfg)), cfg.modes, 2);
  }
  throw ValidationError("unknown problem");
}

BuiltModel build_model(const RunConfig& cfg) {
  cfg.validate();
  BuiltModel b;
  switch (cfg.problem) {
    case Problem::oned_trig: {
      TrigEmbeddedSpec s;
      s.alpha = cfg.alpha;
      s.kappa = cfg.hetero.trig;
      s.modes = cfg.modes;
      s.N = cfg.N;
      s.order_a = cfg.order_a;
      s.eta = cfg.eta;
      s.order_gamma = cfg.order_gamma;
      std::tie(b.basis, b.gap) = build_basis(cfg);
      auto r = construct(s, b.basis, cfg.max_iter);
      r.model.meta.problem = "oned-trig";
      r.model.meta.heterogeneity = cfg.hetero.trig.describe();
      b.exact = r.model;
      b.numeric = to_numeric(*b.exact);
      b.log = r.log;
      break;
    }
    case Problem::oned_grid: {
      GridEmbeddedSpec s;
      s.alpha = cfg.alpha;
      s.kappa = build_grid_field(cfg);
      s.modes = cfg.modes;
      s.N = cfg.N;
      s.advection = cfg.advection;
      s.order_gamma = cfg.order_gamma;
      s.y_diffusion = cfg.y_diffusion;
      s.zero_small = cfg.zero_small;
      b.kappa = s.kappa;
      std::tie(b.basis, b.gap) = eigen_select(assemble_cell_operator(s.kappa), cfg.modes, cfg.alpha);
      auto r = construct(s, b.basis, cfg.max_iter, cfg.tol);
      r.model.meta.problem = "oned-grid";
      std::ostringstream desc;
      desc << cfg.hetero.grid_kind << " n=" << cfg.hetero.n;
      if (cfg.hetero.grid_kind == "laminate") desc << " eta=" << cfg.hetero.eta << " chi=" << cfg.hetero.chi;
      if (cfg.hetero.grid_kind == "reciprocal-cos") desc << " a=" << cfg.hetero.a;
      r.model.meta.heterogeneity = desc.str();
      b.numeric = r.model;
      b.log = r.log;
      break;
    }
    case Problem::elastic2d: {
      const ElasticCell cell = build_cell(cfg);
      Elastic2dOptions o;
      o.modes = cfg.modes;
      o.N = cfg.N;
      o.tol = cfg.tol;
      o.zero_small = cfg.zero_small;
      o.max_iter = cfg.max_iter;
      auto r = construct_2d(cell, o);
      b.cell = cell;
      b.basis = r.basis;
      b.gap = gap_report(r.basis.lambda, r.basis.next_lambda, 2);
      std::ostringstream desc;
      desc << cfg.hetero.E << " nx=" << cell.nx << " ny=" << cell.ny << " nu=" << cfg.hetero.nu;
      r.model.meta.heterogeneity = desc.str();
      r.model.meta.notes = "eigenvectors scaled to max-abs 1; U_m are the corresponding modal amplitudes";
      b.numeric = r.model;
      b.log = r.log;
      break;
    }
  }
  return b;
}

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Artifacts art(cfg.output_dir, out);
  try {
    if (command == "eigen") return cmd_eigen(cfg, out, art);
    if (command == "fde") return cmd_fde(cfg, out, art);
    static const char* known[] = {"construct", "dispersion", "radius", "regularise", "dns", "verify"};
    if (std::find(std::begin(known), std::end(known), command) == std::end(known))
      throw ValidationError("unknown command '" + command + "'");
    cfg.validate();
    print_header(cfg, out);
    const BuiltModel b = build_model(cfg);
    if (command == "construct") return cmd_construct(cfg, b, out, art);
    if (command == "dispersion") return cmd_dispersion(cfg, b, out, art);
    if (command == "radius") return cmd_radius(cfg, b, out, art);
    if (command == "regularise") return cmd_regularise(cfg, b, out, art);
    if (command == "dns") return cmd_dns(cfg, b, out, art);
    return cmd_verify(cfg, b, out, art);
  } catch (const ConvergenceError& e) {
    std::string where;
    try {
      art.write("iterations.csv", log_csv(e.log));
      where = art.path("iterations.csv");
    } catch (const std::exception&) {
      where = "(log not written)";
    }
    err << "error: convergence: " << e.what() << "; log " << where << '\n';
    return kExitNonConvergence;
  } catch (const NumericalError& e) {
    err << "error: numerical: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const ValidationError& e) {
    err << "error: validation: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: validation: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: validation: " << e.what() << '\n';
    return kExitValidation;
  }
}

int run_sweep(const std::vector<std::string>& configs, const std::string& command,
              const std::vector<Override>& overrides, int jobs, std::ostream& out, std::ostream& err) {
  if (configs.empty()) {
    err << "error: validation: sweep needs at least one config\n";
    return kExitValidation;
  }
  struct Job {
    std::ostringstream out, err;
    int code = 0;
  };
  std::vector<Job> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < configs.size();) {
      Job& j = results[i];
      try {
        RunConfig cfg = load_config(configs[i], overrides);
        cfg.output_dir = (fs::path(cfg.output_dir) / cfg.name).string();
        j.code = run_command(command, cfg, j.out, j.err);
      } catch (const ValidationError& e) {
        j.err << "error: validation: " << e.what() << '\n';
        j.code = kExitValidation;
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int worst = kExitOk;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out << "== " << configs[i] << " (exit " << results[i].code << ")\n" << results[i].out.str();
    err << results[i].err.str();
    worst = std::max(worst, results[i].code);
  }
  return worst;
}

}  // namespace micromorph
