#include "micromorph/gradient_series.hpp"

#include <cctype>
#include <sstream>

namespace micromorph {

ParamNames default_param_names() { return {"a", "gamma", "c1", "c2", "c3", "c4"}; }

Monomial Monomial::amp(int mode, int dx, int dy, AmpKind kind) {
  if (mode < 0 || mode > 255 || dx < 0 || dy < 0 || dx > 255 || dy > 255)
    throw DomainError("amplitude key out of range");
  Monomial m;
  m.factors.push_back(DerivKey{static_cast<std::uint8_t>(mode), static_cast<std::uint8_t>(dx),
                               static_cast<std::uint8_t>(dy), kind});
  return m;
}

Monomial Monomial::param(int index, int power) {
  if (index < 0 || index >= kMaxParams || power < 0 || power > 255)
    throw DomainError("parameter power out of range");
  Monomial m;
  m.powers[index] = static_cast<std::uint8_t>(power);
  return m;
}

int Monomial::deriv_order() const {
  int d = 0;
  for (const auto& f : factors) d += f.order();
  return d;
}

bool Monomial::has_velocity() const {
  return std::any_of(factors.begin(), factors.end(),
                     [](const DerivKey& k) { return k.kind == AmpKind::velocity; });
}

Monomial Monomial::param_part() const {
  Monomial m;
  m.powers = powers;
  return m;
}

Monomial Monomial::amp_part() const {
  Monomial m;
  m.factors = factors;
  return m;
}

Monomial operator*(const Monomial& x, const Monomial& y) {
  Monomial r;
  for (int i = 0; i < kMaxParams; ++i) {
    int p = x.powers[i] + y.powers[i];
    if (p > 255) throw DomainError("parameter power overflow");
    r.powers[i] = static_cast<std::uint8_t>(p);
  }
  r.factors.reserve(x.factors.size() + y.factors.size());
  std::merge(x.factors.begin(), x.factors.end(), y.factors.begin(), y.factors.end(),
             std::back_inserter(r.factors));
  return r;
}

std::vector<std::pair<int, Monomial>> differentiate_monomial(const Monomial& m, Axis axis) {
  std::vector<std::pair<int, Monomial>> out;
  const auto& f = m.factors;
  for (std::size_t i = 0; i < f.size();) {
    std::size_t j = i;
    while (j < f.size() && f[j] == f[i]) ++j;
    int mult = static_cast<int>(j - i);
    Monomial d;
    d.powers = m.powers;
    d.factors = f;
    DerivKey k = f[i];
    if (axis == Axis::x) ++k.dx; else ++k.dy;
    d.factors.erase(d.factors.begin() + static_cast<long>(i));
    d.factors.insert(std::upper_bound(d.factors.begin(), d.factors.end(), k), k);
    out.emplace_back(mult, std::move(d));
    i = j;
  }
  return out;
}

namespace {

std::string key_string(const DerivKey& k) {
  std::string s = k.kind == AmpKind::amplitude ? "U" : "V";
  s += std::to_string(k.mode);
  s.append(k.dx, 'x');
  s.append(k.dy, 'y');
  return s;
}

}  // namespace

std::string amp_string(const Monomial& m) {
  if (m.factors.empty()) return "1";
  std::string s;
  for (const auto& k : m.factors) {
    if (!s.empty()) s += '*';
    s += key_string(k);
  }
  return s;
}

std::string param_string(const Monomial& m, const ParamNames& names) {
  std::string s;
  for (int i = 0; i < kMaxParams; ++i) {
    if (!m.powers[i]) continue;
    if (!s.empty()) s += '*';
    s += names[i];
    if (m.powers[i] > 1) s += "^" + std::to_string(m.powers[i]);
  }
  return s;
}

Monomial parse_monomial(const std::string& amp, const std::string& params,
                        const ParamNames& names) {
  Monomial m;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, '*'))
      if (!tok.empty()) parts.push_back(tok);
    return parts;
  };
  if (amp != "1" && !amp.empty()) {
    for (const auto& tok : split(amp)) {
      if (tok.size() < 2 || (tok[0] != 'U' && tok[0] != 'V'))
        throw ValidationError("bad amplitude factor '" + tok + "'");
      std::size_t i = 1;
      int mode = 0;
      if (!std::isdigit(static_cast<unsigned char>(tok[i])))
        throw ValidationError("missing mode index in '" + tok + "'");
      while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i])))
        mode = mode * 10 + (tok[i++] - '0');
      int dx = 0, dy = 0;
      for (; i < tok.size(); ++i) {
        if (tok[i] == 'x' && dy == 0) ++dx;
        else if (tok[i] == 'y') ++dy;
        else throw ValidationError("bad derivative suffix in '" + tok + "'");
      }
      m = m * Monomial::amp(mode, dx, dy, tok[0] == 'U' ? AmpKind::amplitude : AmpKind::velocity);
    }
  }
  for (const auto& tok : split(params)) {
    auto caret = tok.find('^');
    std::string name = tok.substr(0, caret);
    int power = 1;
    if (caret != std::string::npos) {
      try {
        power = std::stoi(tok.substr(caret + 1));
      } catch (...) {
        throw ValidationError("bad parameter power '" + tok + "'");
      }
    }
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ValidationError("unknown parameter symbol '" + name + "'");
    m = m * Monomial::param(static_cast<int>(it - names.begin()), power);
  }
  return m;
}

Truncation Truncation::make(int grad, int order_a, int order_gamma) {
  if (grad < 1 || order_a < 1 || order_gamma < 1)
    throw ValidationError("truncation orders must be positive");
  Truncation t;
  t.grad = grad;
  t.param[kParamA] = order_a;
  t.param[kParamGamma] = order_gamma;
  return t;
}

}  // namespace micromorph
