#include <doctest.h>

#include "micromorph/config.hpp"
#include "micromorph/homog1d.hpp"
#include "micromorph/model_io.hpp"
#include "micromorph/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace micromorph;
namespace fs = std::filesystem;

namespace {

HomogenisedModel<Rational> tri_continuum() {
  TrigEmbeddedSpec s;
  s.modes = 3;
  s.N = 3;
  s.order_a = 3;
  auto [b, gap] = eigen_select(harmonic_cell_operator(), 3, 1);
  auto m = construct(s, b).model;
  m.meta.problem = "oned-trig";
  return m;
}

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("micromorph_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTri = R"({"problem": "oned-trig", "modes": 3, "orders": {"N": 3, "order_a": 3}})";

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("exact documents round-trip byte for byte") {
  const auto m = tri_continuum();
  const std::string doc = to_document(m);
  CHECK(doc == to_document(tri_continuum()));
  const auto back = parse_document(doc);
  REQUIRE(std::holds_alternative<HomogenisedModel<Rational>>(back));
  CHECK(to_document(std::get<HomogenisedModel<Rational>>(back)) == doc);
  CHECK(doc.find("\"-5/12\"") != std::string::npos);
  CHECK(diff_models(back, m, {}).ok());
}

TEST_CASE("numeric documents keep every bit") {
  HomogenisedModel<double> m(1, 2, Truncation::make(5));
  m.rhs[0].add_term(Monomial::amp(0, 2), 0.1 + 0.2);
  m.rhs[0].add_term(Monomial::amp(0, 4), -1.0 / 3);
  const auto back = std::get<HomogenisedModel<double>>(parse_document(to_document(m)));
  CHECK(back.coeff(0, Monomial::amp(0, 2)) == 0.1 + 0.2);
  CHECK(back.coeff(0, Monomial::amp(0, 4)) == -1.0 / 3);
  CHECK(back.alpha == 2);
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS_AS(parse_document("{"), ValidationError);
  CHECK_THROWS_AS(parse_document(R"({"format": "other"})"), ValidationError);
  std::string doc = to_document(tri_continuum());
  doc.replace(doc.find("\"version\": 1"), 12, "\"version\": 9");
  CHECK_THROWS_AS(parse_document(doc), ValidationError);
}

TEST_CASE("text layout") {
  HomogenisedModel<Rational> m(1, 1, Truncation::make(3));
  m.rhs[0].add_term(Monomial::amp(0, 2), Rational(1));
  CHECK(pretty(m) == "∂t^α U0 = U0xx\n");
  const std::string tri = pretty(tri_continuum());
  CHECK(tri.find("(1 + 1/2*a^2)*U0xx") != std::string::npos);
  CHECK(tri.find("- 1/2*a*U1x") != std::string::npos);
}

TEST_CASE("coefficient diffs honour the tolerances") {
  HomogenisedModel<double> ref(1, 1, Truncation::make(5)), cand = ref;
  ref.rhs[0].add_term(Monomial::amp(0, 2), 1.0);
  ref.rhs[0].add_term(Monomial::amp(0, 4), 0.5);
  cand.rhs[0].add_term(Monomial::amp(0, 2), 1.001);
  cand.rhs[0].add_term(Monomial::amp(0, 4), 0.5);
  cand.rhs[0].add_term(Monomial::amp(0), 1e-6);
  CHECK_FALSE(diff_models(ref, cand, {}).ok());
  const auto r = diff_models(ref, cand, {2e-3, 0, 1e-4});
  CHECK(r.ok());
  CHECK(r.diffs.size() == 2);
  const auto strict = diff_models(ref, cand, {2e-3, 0, 0});
  CHECK(strict.unexpected.size() == 1);
  CHECK_FALSE(strict.ok());
  CHECK(r.csv().rfind("mode,", 0) == 0);
}

TEST_CASE("exact diffs are exact") {
  auto a = tri_continuum(), b = a;
  Rational bumped = b.coeff(0, Monomial::amp(0, 2)) + Rational(1, 1000000000);
  b.rhs[0].erase(Monomial::amp(0, 2));
  b.rhs[0].add_term(Monomial::amp(0, 2), bumped);
  CHECK_FALSE(diff_models(a, b, {1e-3, 1e-3, 0}).ok());
}

}

TEST_SUITE("config") {

TEST_CASE("defaults and aliases") {
  const auto c = parse_config(R"({"problem": "oned-trig", "mm": 3, "orders": {"ordd": 4, "orda": 2}})");
  CHECK(c.modes == 3);
  CHECK(c.N == 4);
  CHECK(c.order_a == 2);
  CHECK(c.alpha == 1);
  const auto e = parse_config(R"({"problem": "elastic2d"})");
  CHECK(e.alpha == 2);
  CHECK(e.modes == 2);
}

TEST_CASE("overrides take dotted paths") {
  const auto c = parse_config(kTri, {Override::parse("orders.N=5"), Override::parse("name=tri")});
  CHECK(c.N == 5);
  CHECK(c.name == "tri");
  CHECK_THROWS_AS(Override::parse("no-equals-sign"), ValidationError);
}

TEST_CASE("bad configs fail validation") {
  CHECK_THROWS_AS(parse_config(R"({"problem": "oned-trig", "modse": 3})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"problem": "fluid"})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"problem": "oned-trig", "modes": 0})"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"problem": "oned-trig", "alpha": 2, "modes": 2,
      "orders": {"order_gamma": 2}, "nonlinear": {"eta": [{"harmonic": 1, "symbol": "c1"}]}})"),
                       "Need alpha=1 for nonlinear multi-mode", ValidationError);
  CHECK(parse_deriv_term("x2y2") == std::pair{2, 2});
  CHECK_THROWS_AS(parse_deriv_term("z3"), ValidationError);
}

}

TEST_SUITE("runner") {

TEST_CASE("construct writes a model document") {
  const fs::path dir = scratch_dir("construct");
  auto cfg = parse_config(kTri);
  cfg.output_dir = dir.string();
  std::ostringstream out, err;
  CHECK(run_command("construct", cfg, out, err) == kExitOk);
  CHECK(err.str().empty());
  CHECK(out.str().find("U0xx") != std::string::npos);
  const auto doc = slurp(dir / "model.json");
  CHECK(doc == to_document(std::get<HomogenisedModel<Rational>>(parse_document(doc))));
  CHECK(fs::exists(dir / "iterations.csv"));
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch_dir("codes");
  std::ostringstream out, err;

  auto cfg = parse_config(kTri);
  cfg.output_dir = dir.string();
  cfg.max_iter = 1;
  CHECK(run_command("construct", cfg, out, err) == kExitNonConvergence);
  CHECK(err.str().rfind("error: ", 0) == 0);
  CHECK(fs::exists(dir / "iterations.csv"));

  cfg = parse_config(kTri);
  cfg.output_dir = dir.string();
  CHECK(run_command("verify", cfg, out, err) == kExitValidation);  // no reference
  CHECK(run_command("frobnicate", cfg, out, err) == kExitValidation);

  // A reference with one perturbed coefficient.
  auto ref = tri_continuum();
  ref.rhs[0].add_term(Monomial::amp(0, 2), Rational(1, 100));
  fs::create_directories(dir);
  std::ofstream(dir / "ref.json") << to_document(ref);
  cfg.verify = VerifyConfig{(dir / "ref.json").string()};
  CHECK(run_command("verify", cfg, out, err) == kExitVerifyDiff);
  std::ofstream(dir / "ref.json", std::ios::trunc) << to_document(tri_continuum());
  CHECK(run_command("verify", cfg, out, err) == kExitOk);
  fs::remove_all(dir);
}

TEST_CASE("sweep replays output in input order") {
  const fs::path dir = scratch_dir("sweep");
  fs::create_directories(dir);
  std::ofstream(dir / "one.json") << R"({"problem": "oned-trig", "modes": 1, "orders": {"N": 5}})";
  std::ofstream(dir / "two.json") << kTri;
  std::ofstream(dir / "bad.json") << R"({"problem": "oned-trig", "modes": -1})";
  std::ostringstream out, err;
  const int rc = run_sweep({(dir / "one.json").string(), (dir / "two.json").string()}, "construct",
                           {Override{"output.dir", "\"" + (dir / "out").string() + "\""}}, 2, out, err);
  CHECK(rc == kExitOk);
  CHECK(out.str().find("one") < out.str().find("two"));
  CHECK(fs::exists(dir / "out" / "one" / "model.json"));
  CHECK(fs::exists(dir / "out" / "two" / "model.json"));
  std::ostringstream out2, err2;
  CHECK(run_sweep({(dir / "bad.json").string()}, "construct", {}, 1, out2, err2) == kExitValidation);
  fs::remove_all(dir);
}

}
