#include "micromorph/model_io.hpp"

#include "micromorph/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace micromorph {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "micromorph-model";
constexpr int kVersion = 1;

json bound(int b) { return b >= Truncation::kUnbounded ? json(nullptr) : json(b); }

int read_bound(const json& j) { return j.is_null() ? Truncation::kUnbounded : j.get<int>(); }

json coef_json(const Rational& c) { return to_string(c); }
json coef_json(double c) { return c; }

template <class S>
std::string write(const HomogenisedModel<S>& model, bool exact) {
  const auto& names = model.meta.params;
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["coefficients"] = exact ? "exact" : "decimal";
  doc["problem"] = model.meta.problem;
  doc["heterogeneity"] = model.meta.heterogeneity;
  doc["dim"] = model.meta.dim;
  doc["alpha"] = model.alpha;
  doc["modes"] = model.modes;
  json tr;
  tr["N"] = bound(model.trunc.grad);
  json params = json::object();
  for (int i = 0; i < kMaxParams; ++i)
    if (model.trunc.param[i] < Truncation::kUnbounded) params[names[i]] = model.trunc.param[i];
  tr["params"] = params;
  doc["truncation"] = tr;
  doc["param_names"] = json(std::vector<std::string>(names.begin(), names.end()));
  doc["iterations"] = model.meta.iterations;
  if (!model.meta.notes.empty()) doc["notes"] = model.meta.notes;
  json eqs = json::array();
  for (int m = 0; m < model.modes; ++m) {
    json terms = json::array();
    for (const auto& [mono, c] : model.rhs[static_cast<std::size_t>(m)].terms()) {
      json t;
      t["amp"] = amp_string(mono);
      t["params"] = param_string(mono, names);
      t["coef"] = coef_json(c);
      terms.push_back(std::move(t));
    }
    json e;
    e["mode"] = m;
    e["terms"] = std::move(terms);
    eqs.push_back(std::move(e));
  }
  doc["equations"] = std::move(eqs);
  return doc.dump(2) + "\n";
}

template <class S>
HomogenisedModel<S> read(const json& doc) {
  ParamNames names = default_param_names();
  if (doc.contains("param_names")) {
    auto v = doc.at("param_names").get<std::vector<std::string>>();
    if (v.size() != names.size()) throw ValidationError("param_names must list " + std::to_string(kMaxParams) + " names");
    std::copy(v.begin(), v.end(), names.begin());
  }
  Truncation t;
  const json& tr = doc.at("truncation");
  t.grad = read_bound(tr.at("N"));
  if (tr.contains("params"))
    for (const auto& [key, val] : tr.at("params").items()) {
      auto it = std::find(names.begin(), names.end(), key);
      if (it == names.end()) throw ValidationError("unknown truncation parameter '" + key + "'");
      t.param[static_cast<std::size_t>(it - names.begin())] = read_bound(val);
    }
  const int modes = doc.at("modes").get<int>();
  if (modes < 1) throw ValidationError("modes must be positive");
  HomogenisedModel<S> model(modes, doc.at("alpha").get<int>(), t);
  model.meta.params = names;
  model.meta.problem = doc.value("problem", std::string());
  model.meta.heterogeneity = doc.value("heterogeneity", std::string());
  model.meta.dim = doc.value("dim", 1);
  model.meta.iterations = doc.value("iterations", 0);
  model.meta.notes = doc.value("notes", std::string());
  for (const auto& e : doc.at("equations")) {
    const int m = e.at("mode").get<int>();
    if (m < 0 || m >= modes) throw ValidationError("equation for mode " + std::to_string(m) + " out of range");
    for (const auto& term : e.at("terms")) {
      Monomial mono = parse_monomial(term.at("amp").get<std::string>(), term.value("params", std::string()), names);
      const json& c = term.at("coef");
      S value;
      if constexpr (std::is_same_v<S, Rational>) {
        value = parse_rational(c.is_string() ? c.get<std::string>() : c.dump());
      } else {
        value = c.is_string() ? to_double(parse_rational(c.get<std::string>())) : c.get<double>();
      }
      if (!t.admits(mono)) throw ValidationError("term " + amp_string(mono) + " lies outside the declared truncation");
      model.rhs[static_cast<std::size_t>(m)].add_term(mono, value);
    }
  }
  return model;
}

std::string format_coef(const Rational& c) { return to_string(c); }

std::string format_coef(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", c);
  return buf;
}

bool negative(const Rational& c) { return sgn(c) < 0; }
bool negative(double c) { return c < 0; }

template <class S>
std::string layout(const HomogenisedModel<S>& model, double threshold) {
  const auto& names = model.meta.params;
  std::ostringstream os;
  std::string lhs = model.is_linear() ? "∂t^α" : (model.alpha == 2 ? "∂t^2" : "∂t");
  for (int m = 0; m < model.modes; ++m) {
    // Group by amplitude part, keeping the series order of the amplitudes.
    std::map<Monomial, std::vector<std::pair<Monomial, S>>> groups;
    for (const auto& [mono, c] : model.rhs[static_cast<std::size_t>(m)].terms()) {
      if constexpr (std::is_same_v<S, double>)
        if (std::fabs(c) < threshold) continue;
      groups[mono.amp_part()].emplace_back(mono.param_part(), c);
    }
    os << lhs << " U" << m << " =";
    bool first = true;
    for (const auto& [amp, parts] : groups) {
      std::string factor = amp_string(amp);
      if (parts.size() == 1) {
        const auto& [p, c] = parts[0];
        const bool neg = negative(c);
        os << (first ? (neg ? " -" : " ") : (neg ? " - " : " + "));
        const std::string coef = format_coef(neg ? S(-c) : c);
        const std::string ps = param_string(p, names);
        if (coef != "1") os << coef << '*';
        if (!ps.empty()) os << ps << '*';
        os << factor;
      } else {
        os << (first ? " (" : " + (");
        bool inner_first = true;
        for (const auto& [p, c] : parts) {
          const bool neg = negative(c);
          os << (inner_first ? (neg ? "-" : "") : (neg ? " - " : " + "));
          const std::string coef = format_coef(neg ? S(-c) : c);
          const std::string ps = param_string(p, names);
          if (ps.empty())
            os << coef;
          else if (coef == "1")
            os << ps;
          else
            os << coef << '*' << ps;
          inner_first = false;
        }
        os << ")*" << factor;
      }
      first = false;
    }
    if (first) os << " 0";
    os << '\n';
  }
  return os.str();
}

std::string term_name(const Monomial& mono, const ParamNames& names) {
  std::string ps = param_string(mono, names);
  return ps.empty() ? amp_string(mono) : ps + "*" + amp_string(mono);
}

}  // namespace

std::string to_document(const HomogenisedModel<Rational>& model) { return write(model, true); }
std::string to_document(const HomogenisedModel<double>& model) { return write(model, false); }

AnyModel parse_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", std::string()) != kFormat) throw ValidationError("not a micromorph model document");
    if (doc.value("version", 0) != kVersion) throw ValidationError("unsupported model document version");
    const std::string kind = doc.value("coefficients", std::string("decimal"));
    if (kind == "exact") return read<Rational>(doc);
    if (kind == "decimal") return read<double>(doc);
    throw ValidationError("coefficients must be 'exact' or 'decimal'");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

HomogenisedModel<double> to_numeric(const AnyModel& m) {
  if (const auto* d = std::get_if<HomogenisedModel<double>>(&m)) return *d;
  const auto& r = std::get<HomogenisedModel<Rational>>(m);
  HomogenisedModel<double> out(r.modes, r.alpha, r.trunc);
  out.meta = r.meta;
  for (int i = 0; i < r.modes; ++i)
    for (const auto& [mono, c] : r.rhs[static_cast<std::size_t>(i)].terms())
      out.rhs[static_cast<std::size_t>(i)].add_term(mono, to_double(c));
  return out;
}

std::string pretty(const HomogenisedModel<Rational>& model) { return layout(model, 0.0); }
std::string pretty(const HomogenisedModel<double>& model, double threshold) { return layout(model, threshold); }

std::string DiffReport::text() const {
  std::ostringstream os;
  for (const auto& h : header_mismatch) os << "header: " << h << '\n';
  for (const auto& m : missing) os << "missing: " << m << '\n';
  for (const auto& u : unexpected) os << "unexpected: " << u << '\n';
  os.precision(6);
  for (const auto& d : diffs)
    if (!d.exact_equal && d.abs_diff > 0)
      os << "G" << d.mode << ' ' << d.term << ": reference " << d.reference << " value " << d.value << " abs "
         << d.abs_diff << " rel " << d.rel_diff << '\n';
  os << (ok() ? "PASS" : "FAIL") << ": " << diffs.size() << " coefficients compared, " << failures
     << " failure(s)\n";
  return os.str();
}

std::string DiffReport::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "mode,term,reference,value,abs_diff,rel_diff\n";
  for (const auto& d : diffs)
    os << d.mode << ',' << d.term << ',' << d.reference << ',' << d.value << ',' << d.abs_diff << ','
       << d.rel_diff << '\n';
  return os.str();
}

DiffReport diff_models(const AnyModel& reference, const AnyModel& candidate, const VerifyOptions& opts) {
  DiffReport rep;
  const auto ref = to_numeric(reference), cand = to_numeric(candidate);
  const auto* ref_exact = std::get_if<HomogenisedModel<Rational>>(&reference);
  const auto* cand_exact = std::get_if<HomogenisedModel<Rational>>(&candidate);
  if (ref.modes != cand.modes)
    rep.header_mismatch.push_back("modes " + std::to_string(ref.modes) + " vs " + std::to_string(cand.modes));
  if (ref.meta.dim != cand.meta.dim)
    rep.header_mismatch.push_back("dim " + std::to_string(ref.meta.dim) + " vs " + std::to_string(cand.meta.dim));
  if (ref.alpha != cand.alpha && !(ref.is_linear() && cand.is_linear()))
    rep.header_mismatch.push_back("alpha " + std::to_string(ref.alpha) + " vs " + std::to_string(cand.alpha));
  rep.failures += static_cast<int>(rep.header_mismatch.size());

  const auto& names = ref.meta.params;
  const int modes = std::min(ref.modes, cand.modes);
  for (int m = 0; m < modes; ++m) {
    const auto& r = ref.rhs[static_cast<std::size_t>(m)];
    const auto& c = cand.rhs[static_cast<std::size_t>(m)];
    const std::string tag = "G" + std::to_string(m) + " ";
    for (const auto& [mono, rv] : r.terms()) {
      const double* cv = c.find(mono);
      if (!cv) {
        if (std::fabs(rv) >= opts.ignore_below) {
          rep.missing.push_back(tag + term_name(mono, names));
          ++rep.failures;
        }
        continue;
      }
      CoefficientDiff d;
      d.mode = m;
      d.term = term_name(mono, names);
      d.reference = rv;
      d.value = *cv;
      if (ref_exact && cand_exact) {
        const Rational a = ref_exact->coeff(m, mono), b = cand_exact->coeff(m, mono);
        d.exact_equal = a == b;
        d.abs_diff = std::fabs(to_double(Rational(a - b)));
      } else {
        d.abs_diff = std::fabs(*cv - rv);
      }
      d.rel_diff = rv != 0 ? d.abs_diff / std::fabs(rv) : d.abs_diff;
      const bool pass = (ref_exact && cand_exact) ? d.exact_equal
                                                  : (d.abs_diff <= opts.abs_tol || d.rel_diff <= opts.rel_tol);
      if (!pass) ++rep.failures;
      rep.diffs.push_back(std::move(d));
    }
    for (const auto& [mono, cv] : c.terms()) {
      if (r.find(mono)) continue;
      if (std::fabs(cv) >= opts.ignore_below) {
        rep.unexpected.push_back(tag + term_name(mono, names));
        ++rep.failures;
      }
    }
  }
  return rep;
}

}  // namespace micromorph
