#include "micromorph/config.hpp"

#include "micromorph/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace micromorph {

using json = nlohmann::json;

namespace {

// Reads keys from one JSON object, rejecting any it was not asked about.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ValidationError(where_ + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ValidationError("unknown key '" + path(k) + "'");
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  // First present key among the aliases.
  const json* find(std::initializer_list<const char*> keys) {
    const json* out = nullptr;
    for (const char* k : keys) {
      seen_.insert(k);
      if (!out && j_.contains(k)) out = &j_.at(k);
    }
    return out;
  }
  template <class T>
  void get(std::initializer_list<const char*> keys, T& out) {
    if (const json* v = find(keys)) {
      try {
        out = v->get<T>();
      } catch (const json::exception&) {
        throw ValidationError("bad value for '" + path(*keys.begin()) + "'");
      }
    }
  }
  template <class T>
  void get(std::initializer_list<const char*> keys, std::optional<T>& out) {
    if (const json* v = find(keys)) {
      if (v->is_null()) return;
      T t{};
      get(keys, t);
      out = t;
    }
  }
  const json& at(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }
  std::string path(const std::string& k) const { return where_.empty() ? k : where_ + "." + k; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Rational rational_value(const json& v, const std::string& where) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_number()) return parse_rational(v.dump());
  throw ValidationError("bad rational for '" + where + "'");
}

std::vector<FieldTerm> field_terms(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ValidationError(where + " must be a list of terms");
  const ParamNames names = default_param_names();
  std::vector<FieldTerm> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Section s(arr[i], where + "[" + std::to_string(i) + "]");
    FieldTerm t;
    s.get({"harmonic"}, t.harmonic);
    std::string parity = "cos";
    s.get({"parity"}, parity);
    if (parity == "cos")
      t.parity = Parity::cos;
    else if (parity == "sin")
      t.parity = Parity::sin;
    else
      throw ValidationError(s.path("parity") + " must be cos or sin");
    if (s.has("coeff")) t.coeff = rational_value(s.at("coeff"), s.path("coeff"));
    s.get({"a_power"}, t.a_power);
    std::string symbol;
    s.get({"symbol"}, symbol);
    if (!symbol.empty()) {
      auto it = std::find(names.begin(), names.end(), symbol);
      if (it == names.end()) throw ValidationError("unknown symbol '" + symbol + "' in " + where);
      t.symbol = static_cast<int>(it - names.begin());
    }
    if (t.harmonic < 0 || t.a_power < 0) throw ValidationError(where + ": harmonic and a_power must be >= 0");
    out.push_back(t);
  }
  return out;
}

void read_hetero(const json& j, RunConfig& cfg) {
  Section s(j, "heterogeneity");
  std::string kind = cfg.problem == Problem::elastic2d ? "sinpattern" : "reciprocal-cos";
  s.get({"kind"}, kind);
  HeteroConfig& h = cfg.hetero;
  switch (cfg.problem) {
    case Problem::oned_trig:
      if (kind == "reciprocal-cos") {
        h.trig = HeterogeneitySpec::reciprocal_cos();
      } else if (kind == "trig-rational") {
        h.trig.kind = HeterogeneitySpec::Kind::trig_rational;
        if (!s.has("numerator") || !s.has("denominator"))
          throw ValidationError("trig-rational heterogeneity needs numerator and denominator");
        h.trig.numerator = field_terms(s.at("numerator"), "heterogeneity.numerator");
        h.trig.denominator = field_terms(s.at("denominator"), "heterogeneity.denominator");
      } else {
        throw ValidationError("oned-trig heterogeneity must be reciprocal-cos or trig-rational");
      }
      break;
    case Problem::oned_grid:
      if (kind != "reciprocal-cos" && kind != "laminate" && kind != "constant")
        throw ValidationError("oned-grid heterogeneity must be reciprocal-cos, laminate or constant");
      h.grid_kind = kind;
      s.get({"a"}, h.a);
      s.get({"ell"}, h.ell);
      s.get({"n", "nx"}, h.n);
      s.get({"chi"}, h.chi);
      if (const json* r = s.find({"eta_over_ell"})) h.eta = r->get<double>() * h.ell;
      s.get({"eta"}, h.eta);
      break;
    case Problem::elastic2d:
      if (kind != "sinpattern" && kind != "constant")
        throw ValidationError("elastic2d heterogeneity must be sinpattern or constant");
      h.E = kind;
      s.get({"E"}, h.E_value);
      s.get({"nu"}, h.nu);
      s.get({"nx"}, h.nx);
      h.ny = h.nx;
      s.get({"ny"}, h.ny);
      break;
  }
}

std::vector<std::pair<std::string, double>> param_values(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must map symbols to values");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ValidationError(where + "." + k + " must be a number");
    out.emplace_back(k, v.get<double>());
  }
  return out;
}

void read_analyses(const json& j, RunConfig& cfg) {
  Section s(j, "analyses");
  if (s.has("dispersion")) {
    Section d(s.at("dispersion"), "analyses.dispersion");
    DispersionConfig c;
    d.get({"order"}, c.order);
    d.get({"k"}, c.k);
    if (d.has("params")) c.params = param_values(d.at("params"), "analyses.dispersion.params");
    cfg.dispersion = c;
  }
  if (s.has("radius")) {
    Section d(s.at("radius"), "analyses.radius");
    RadiusConfig c;
    d.get({"method"}, c.method);
    d.get({"variable"}, c.variable);
    d.get({"mode"}, c.mode);
    d.get({"amp"}, c.amp);
    d.get({"amp_mode"}, c.amp_mode);
    d.get({"a_power"}, c.a_power);
    d.get({"stride"}, c.stride);
    d.get({"start"}, c.start);
    cfg.radius = c;
  }
  if (s.has("regularise")) {
    Section d(s.at("regularise"), "analyses.regularise");
    RegulariseConfig c;
    if (d.has("den")) {
      c.den.clear();
      for (const auto& t : d.at("den")) c.den.push_back(parse_deriv_term(t.get<std::string>()));
    }
    d.get({"order"}, c.order);
    cfg.regularise = c;
  }
  if (s.has("dns")) {
    Section d(s.at("dns"), "analyses.dns");
    DnsConfig c;
    if (const json* k = d.find({"k0"})) c.k0 = k->is_array() ? k->get<std::vector<double>>() : std::vector<double>{k->get<double>()};
    d.get({"T"}, c.T);
    d.get({"dt"}, c.dt);
    d.get({"cfl"}, c.cfl);
    cfg.dns = c;
  }
  if (s.has("fde")) {
    Section d(s.at("fde"), "analyses.fde");
    FdeConfig c;
    d.get({"alpha"}, c.alpha);
    d.get({"lambda"}, c.lambda);
    d.get({"c"}, c.c);
    d.get({"t_max"}, c.t_max);
    d.get({"steps"}, c.steps);
    d.get({"forcing"}, c.forcing);
    cfg.fde = c;
  }
  if (s.has("reduce")) {
    Section d(s.at("reduce"), "analyses.reduce");
    ReduceConfig c;
    d.get({"keep"}, c.keep);
    d.get({"drop_order"}, c.drop_order);
    cfg.reduce = c;
  }
}

void set_path(json& root, const Override& o) {
  json* node = &root;
  std::stringstream ss(o.path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ValidationError("empty override path");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ValidationError("override path '" + o.path + "' crosses a non-object");
    node = &next;
  }
  json value;
  try {
    value = json::parse(o.value);
  } catch (const json::parse_error&) {
    value = o.value;
  }
  (*node)[parts.back()] = value;
}

}  // namespace

std::string problem_name(Problem p) {
  switch (p) {
    case Problem::oned_trig: return "oned-trig";
    case Problem::oned_grid: return "oned-grid";
    case Problem::elastic2d: return "elastic2d";
  }
  return "?";
}

std::pair<int, int> parse_deriv_term(const std::string& s) {
  int dx = 0, dy = 0;
  std::size_t i = 0;
  auto number = [&](int& out) {
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    out = j == i ? 1 : std::stoi(s.substr(i, j - i));
    i = j;
  };
  while (i < s.size()) {
    char c = s[i++];
    if (c == 'x')
      number(dx);
    else if (c == 'y')
      number(dy);
    else
      throw ValidationError("bad derivative term '" + s + "' (expected e.g. x2, x2y2, y4)");
  }
  if (dx + dy == 0) throw ValidationError("derivative term '" + s + "' has order zero");
  return {dx, dy};
}

Override Override::parse(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override must look like key.path=value: " + text);
  return {text.substr(0, eq), text.substr(eq + 1)};
}

void RunConfig::validate() const {
  if (alpha != 1 && alpha != 2) throw ValidationError("alpha must be 1 or 2");
  if (modes < 1) throw ValidationError("mode count M must be at least 1");
  if (N < 1 || order_a < 1 || order_gamma < 1) throw ValidationError("orders must be positive");
  if (tol <= 0 || zero_small < 0 || max_iter < 1) throw ValidationError("tolerances must be positive");
  if (problem == Problem::oned_trig && eta && order_gamma > 1 && alpha == 2 && modes > 1)
    throw ValidationError("Need alpha=1 for nonlinear multi-mode");
  if (problem == Problem::oned_grid) {
    if (hetero.n < 8) throw ValidationError("grid cells need at least 8 points");
    if (advection && order_gamma > 1 && alpha == 2 && modes > 1)
      throw ValidationError("Need alpha=1 for nonlinear multi-mode");
  }
  if (problem == Problem::elastic2d) {
    if (alpha != 2) throw ValidationError("elastic2d is second order in time (alpha = 2)");
    if (modes < 2) throw ValidationError("elastic models need at least the two translation modes");
    if (eta || advection || order_gamma > 1) throw ValidationError("elastic2d has no nonlinearity option");
  }
  if (eta && problem != Problem::oned_trig) throw ValidationError("eta terms apply to oned-trig only");
  if (advection && problem != Problem::oned_grid) throw ValidationError("advection applies to oned-grid only");
  if (dns && problem != Problem::oned_grid) throw ValidationError("dns needs a oned-grid problem");
  if (dns)
    for (double k : dns->k0)
      if (!(k > 0)) throw ValidationError("dns wavenumbers must be positive");
  if (fde) {
    if (!(fde->alpha > 0 && fde->alpha <= 2)) throw ValidationError("fde alpha must lie in (0, 2]");
    if (fde->steps < 1 || !(fde->t_max > 0)) throw ValidationError("fde needs t_max > 0 and steps >= 1");
  }
  if (radius) {
    if (radius->method != "mercer-roberts" && radius->method != "domb-sykes")
      throw ValidationError("radius method must be mercer-roberts or domb-sykes");
    if (radius->variable != "a" && radius->variable != "k") throw ValidationError("radius variable must be a or k");
    if (radius->stride < 1 || radius->start < 0) throw ValidationError("radius stride/start out of range");
  }
  if (reduce)
    for (int k : reduce->keep)
      if (k < 0 || k >= modes) throw ValidationError("reduce keeps a mode that does not exist");
}

RunConfig parse_config(const std::string& text, const std::vector<Override>& overrides, const std::string& source) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& o : overrides) set_path(root, o);

  RunConfig cfg;
  cfg.source = source;
  cfg.name = source.empty() ? "run" : std::filesystem::path(source).stem().string();
  Section s(root, "");
  std::string problem = "oned-trig";
  s.get({"problem"}, problem);
  if (problem == "oned-trig")
    cfg.problem = Problem::oned_trig;
  else if (problem == "oned-grid")
    cfg.problem = Problem::oned_grid;
  else if (problem == "elastic2d")
    cfg.problem = Problem::elastic2d;
  else
    throw ValidationError("problem must be oned-trig, oned-grid or elastic2d");
  if (cfg.problem == Problem::elastic2d) {
    cfg.alpha = 2;
    cfg.modes = 2;
  }
  s.get({"name"}, cfg.name);
  s.get({"alpha"}, cfg.alpha);
  s.get({"modes", "mm", "M"}, cfg.modes);
  if (s.has("orders")) {
    Section o(s.at("orders"), "orders");
    o.get({"N", "ordd"}, cfg.N);
    o.get({"order_a", "orda"}, cfg.order_a);
    o.get({"order_gamma", "ordg"}, cfg.order_gamma);
  }
  if (s.has("heterogeneity")) read_hetero(s.at("heterogeneity"), cfg);
  if (s.has("nonlinear")) {
    Section n(s.at("nonlinear"), "nonlinear");
    if (n.has("eta")) cfg.eta = field_terms(n.at("eta"), "nonlinear.eta");
    n.get({"advection"}, cfg.advection);
  }
  s.get({"y_diffusion"}, cfg.y_diffusion);
  if (s.has("tolerances")) {
    Section t(s.at("tolerances"), "tolerances");
    t.get({"tol", "tolerance"}, cfg.tol);
    t.get({"zero_small"}, cfg.zero_small);
    t.get({"report_threshold"}, cfg.report_threshold);
    t.get({"max_iter"}, cfg.max_iter);
  }
  if (s.has("analyses")) read_analyses(s.at("analyses"), cfg);
  if (s.has("verify")) {
    Section v(s.at("verify"), "verify");
    VerifyConfig c;
    v.get({"reference"}, c.reference);
    v.get({"abs_tol"}, c.abs_tol);
    v.get({"rel_tol"}, c.rel_tol);
    v.get({"ignore_below"}, c.ignore_below);
    cfg.verify = c;
  }
  if (s.has("output")) {
    Section o(s.at("output"), "output");
    o.get({"dir"}, cfg.output_dir);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides, path);
}

}  // namespace micromorph
