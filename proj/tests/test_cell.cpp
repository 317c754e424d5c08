#include <doctest.h>

#include "micromorph/cellspec.hpp"
#include "micromorph/hetero.hpp"

#include <cmath>
#include <numbers>

using namespace micromorph;
using std::numbers::pi;

TEST_SUITE("hetero") {

TEST_CASE("reciprocal cosine expands as a geometric series") {
  const auto f = expand_heterogeneity(HeterogeneitySpec::reciprocal_cos(), 4);
  CHECK(f.by_power[0] == TrigPoly(Rational(1)));
  CHECK(f.by_power[1] == TrigPoly::harmonic(1, Parity::cos, -1));
  CHECK(f.by_power[2].coeff(0, Parity::cos) == Rational(1, 2));
  CHECK(f.by_power[2].coeff(2, Parity::cos) == Rational(1, 2));
  // Truncation error is O(a^5).
  for (double q : {0.0, 0.7, 2.0}) {
    const double a = 0.05;
    CHECK(std::fabs(f.eval(q, a) - 1 / (1 + a * std::cos(q))) < 1e-6);
  }
}

TEST_CASE("non-integer harmonics are rejected") {
  CHECK(checked_harmonic(2.0) == 2);
  CHECK_THROWS_AS(checked_harmonic(1.5), ValidationError);
}

TEST_CASE("laminate sampling") {
  const double ell = 2 * pi;
  const auto f = sample_laminate(ell, 0.06 * ell, 1.0, 128);
  CHECK(f.n() == 128);
  CHECK(laminate_layer_points(f) == 7);
  for (int i = 0; i < f.n(); ++i) CHECK(f.samples[i] == f.samples[(f.n() - i) % f.n()]);
  CHECK_THROWS_AS(sample_laminate(ell, 0.001, 1.0, 16), ValidationError);
}

TEST_CASE("grid coefficients must be positive") {
  auto f = sample_function([](double q) { return std::cos(q); }, 2 * pi, 16);
  CHECK_THROWS_AS(f.validate_coefficient(), ValidationError);
}

TEST_CASE("elastic cell stores consistent Lame fields") {
  const auto cell = build_elastic_cell(sinpattern, [](double, double) { return 0.4; }, 4, 4);
  CHECK(cell.rows() == 8);
  CHECK(cell.lame_consistency() < 1e-14);
  CHECK(ElasticCell::u_site(1, 1));
  CHECK(ElasticCell::v_site(0, 0));
  CHECK(ElasticCell::shear_site(1, 0));
  CHECK(ElasticCell::normal_site(0, 1));
}

}

TEST_SUITE("cellspec") {

TEST_CASE("harmonic basis") {
  auto [b, gap] = eigen_select(harmonic_cell_operator(), 3, 1);
  CHECK(b.lambda[0] == 0);
  CHECK(b.lambda[1] == -1);
  CHECK(b.lambda[2] == -1);
  CHECK(b.next_lambda == -4);
  CHECK(gap.ratio == doctest::Approx(4.0));
  CHECK(EigenBasis::harmonic_mode(1) == std::pair{1, Parity::sin});
  CHECK(EigenBasis::harmonic_mode(2) == std::pair{1, Parity::cos});
}

TEST_CASE("grid operator is symmetric with a constant null vector") {
  const auto f = sample_function([](double q) { return 1 / (1 + 0.5 * std::cos(q)); }, 2 * pi, 32);
  const auto op = assemble_cell_operator(f);
  CHECK(op.asymmetry() < 1e-12 * op.norm());
  CHECK((op.matrix * Eigen::VectorXd::Ones(32)).lpNorm<Eigen::Infinity>() < 1e-12 * op.norm());
  auto [b, gap] = eigen_select(op, 3, 1);
  CHECK(b.lambda[0] == 0);
  CHECK(b.lambda[1] < 0);
  CHECK(b.next_lambda < b.lambda[2]);
  CHECK(gap.ratio > 1);
}

TEST_CASE("constant coefficient spectrum matches the difference symbol") {
  const int n = 64;
  const auto f = sample_function([](double) { return 1.0; }, 2 * pi, n);
  auto [b, gap] = eigen_select(assemble_cell_operator(f), 3, 1);
  const double dq = 2 * pi / n;
  const double expect = -std::pow(2 / dq * std::sin(dq / 2), 2);
  CHECK(b.lambda[1] == doctest::Approx(expect).epsilon(1e-10));
  CHECK(b.lambda[2] == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("a degenerate pair cannot be split") {
  const auto f = sample_function([](double) { return 1.0; }, 2 * pi, 32);
  CHECK_THROWS_AS(eigen_select(assemble_cell_operator(f), 2, 1), ValidationError);
  CHECK_THROWS_AS(eigen_select(assemble_cell_operator(f), 0, 1), ValidationError);
}

TEST_CASE("elastic Jacobian has exactly the two translations as kernel") {
  const auto cell = build_elastic_cell(sinpattern, [](double, double) { return 0.4; }, 4, 4);
  const auto op = assemble_cell_operator(cell);
  CHECK(op.asymmetry() < 1e-10 * op.norm());
  auto [b, gap] = eigen_select(op, 3, 2);
  CHECK(b.lambda[0] == 0);
  CHECK(b.lambda[1] == 0);
  CHECK(b.lambda[2] < 0);
  CHECK(gap.timescale == doctest::Approx(1 / std::sqrt(-b.next_lambda)));
}

TEST_CASE("shift-invert refines an eigenpair") {
  Eigen::MatrixXd L(3, 3);
  L << -2, 1, 0, 1, -2, 1, 0, 1, -2;
  auto [lam, v] = shift_invert(L, -0.5, Eigen::Vector3d(1, 1, 1));
  CHECK(lam == doctest::Approx(-2 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK((L * v - lam * v).norm() < 1e-10);
}

TEST_CASE("thin-layer roots satisfy the transcendental equation") {
  for (double chi : {1.0 / 3, 1.0, 3.0, 9.0}) {
    const auto s = thin_layer_spectrum(chi, 4);
    REQUIRE(s.size() == 5);
    for (const auto& m : s) {
      if (m.family == LayerFamily::asymmetric)
        CHECK(std::fabs(std::tan(m.K) + chi * m.K) < 1e-9 * (1 + chi * m.K));
      else
        CHECK(m.K == doctest::Approx(m.m * pi / 2));
    }
    CHECK(s[1].lambda == doctest::Approx(-4 * s[1].K * s[1].K / (4 * pi * pi)));
  }
  CHECK_THROWS_AS(thin_layer_spectrum(0.0, 3), ValidationError);
}

}
