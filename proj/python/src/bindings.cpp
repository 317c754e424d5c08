#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "micromorph/cellspec.hpp"
#include "micromorph/config.hpp"
#include "micromorph/errors.hpp"
#include "micromorph/fracmod.hpp"
#include "micromorph/model_io.hpp"
#include "micromorph/runner.hpp"

#include <sstream>

namespace py = pybind11;
using namespace micromorph;

namespace {

std::vector<Override> to_overrides(const std::vector<std::string>& items) {
  std::vector<Override> out;
  out.reserve(items.size());
  for (const auto& s : items) out.push_back(Override::parse(s));
  return out;
}

py::tuple run(const std::string& command, const std::string& config_text,
              const std::vector<std::string>& overrides, const std::string& source) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    try {
      RunConfig cfg = parse_config(config_text, to_overrides(overrides), source);
      code = run_command(command, cfg, out, err);
    } catch (const ValidationError& e) {
      err << "error: validation: " << e.what() << "\n";
      code = kExitValidation;
    }
  }
  return py::make_tuple(code, out.str(), err.str());
}

py::dict construct(const std::string& config_text, const std::vector<std::string>& overrides,
                   const std::string& source) {
  RunConfig cfg = parse_config(config_text, to_overrides(overrides), source);
  BuiltModel built = [&] {
    py::gil_scoped_release release;
    return build_model(cfg);
  }();
  py::dict d;
  d["document"] = built.document();
  d["text"] = built.text(cfg.report_threshold);
  d["eigenvalues"] = std::vector<double>(built.basis.lambda.data(),
                                         built.basis.lambda.data() + built.basis.lambda.size());
  d["gap_ratio"] = built.gap.ratio;
  d["exact"] = built.exact.has_value();
  return d;
}

py::tuple diff_documents(const std::string& reference, const std::string& candidate, double abs_tol,
                         double rel_tol, double ignore_below) {
  DiffReport r = diff_models(parse_document(reference), parse_document(candidate),
                             VerifyOptions{abs_tol, rel_tol, ignore_below});
  return py::make_tuple(r.ok(), r.text());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gradient-series homogenisation of periodic media";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("run", &run, py::arg("command"), py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
        py::arg("source") = "",
        "Run a subcommand on a JSON config; returns (exit_code, stdout, stderr).");
  m.def("construct", &construct, py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
        py::arg("source") = "");
  m.def("diff_documents", &diff_documents, py::arg("reference"), py::arg("candidate"), py::arg("abs_tol") = 0.0,
        py::arg("rel_tol") = 0.0, py::arg("ignore_below") = 0.0);

  py::enum_<MLRegime>(m, "MLRegime")
      .value("automatic", MLRegime::automatic)
      .value("series", MLRegime::series)
      .value("asymptotic", MLRegime::asymptotic);
  py::class_<MLOptions>(m, "MLOptions")
      .def(py::init<>())
      .def_readwrite("regime", &MLOptions::regime)
      .def_readwrite("x_switch", &MLOptions::x_switch);

  m.def("mittag_leffler",
        py::overload_cast<double, double, std::complex<double>, const MLOptions&>(&mittag_leffler),
        py::arg("alpha"), py::arg("beta"), py::arg("z"), py::arg_v("opts", MLOptions{}, "MLOptions()"));
  m.def("e_alpha", &e_alpha, py::arg("alpha"), py::arg("k"), py::arg("t"),
        py::arg_v("opts", MLOptions{}, "MLOptions()"));
  m.def(
      "modal_solution",
      [](double alpha, double lambda, const std::vector<double>& c, const std::vector<double>& t,
         std::optional<std::vector<double>> q) {
        ModalTrajectory tr = modal_solution(alpha, lambda, c, t, q);
        return py::make_tuple(tr.t, tr.u);
      },
      py::arg("alpha"), py::arg("lam"), py::arg("c"), py::arg("t"), py::arg("q") = py::none());

  m.def(
      "thin_layer_spectrum",
      [](double chi, int m_max, double ell, double kappa1) {
        py::list out;
        for (const auto& md : thin_layer_spectrum(chi, m_max, ell, kappa1))
          out.append(py::dict(py::arg("m") = md.m, py::arg("lambda") = md.lambda, py::arg("K") = md.K,
                              py::arg("symmetric") = md.family == LayerFamily::symmetric));
        return out;
      },
      py::arg("chi"), py::arg("m_max"), py::arg("ell") = 2 * std::numbers::pi, py::arg("kappa1") = 1.0);

}
