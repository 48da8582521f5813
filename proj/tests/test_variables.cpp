#include <doctest.h>

#include "pcsft/variables.hpp"

using namespace pcsft;

namespace {

double norm2_of(const PhaseVector<double>& v) { return v.squared_norm(); }

}  // namespace

TEST_CASE("term evaluation matches direct formulas") {
  Rng rng = make_rng(11);
  const auto A = random_symplectic_operator<double>(rng, 3);
  const auto G1 = random_symplectic_operator<double>(rng, 3);
  const auto G2 = random_symplectic_operator<double>(rng, 3);
  const auto v = random_unit_phase_vector<double>(rng, 3);
  const Vector<double> x = v.coords();
  const double qa = x.dot(assemble(A) * x), q1 = x.dot(assemble(G1) * x), q2 = x.dot(assemble(G2) * x);
  CHECK(evaluate(quadratic(0.5, A), v) == doctest::Approx(0.5 * qa).epsilon(1e-14));
  CHECK(evaluate(factored_quartic(0.25, G1, G2), v) == doctest::Approx(0.25 * q1 * q2).epsilon(1e-14));
  const PhaseSpace grid = PhaseSpace::grid(1, 3, 1.5);
  double direct = 0;
  for (Index i = 0; i < 3; ++i) direct += 0.5 * std::pow(x(i) * x(i) + x(i + 3) * x(i + 3), 2);
  CHECK(evaluate(kernel_quartic(2.0, grid), v) == doctest::Approx(2.0 * direct).epsilon(1e-14));
  const auto s = smooth<double>(3, "norm2", norm2_of);
  CHECK(evaluate(s, v) == doctest::Approx(1.0));
}

TEST_CASE("batch evaluation agrees with pointwise evaluation") {
  Rng rng = make_rng(12);
  const auto f = quadratic(0.5, random_symplectic_operator<double>(rng, 4)) +
                 factored_quartic(0.25, random_symplectic_operator<double>(rng, 4),
                                  random_symplectic_operator<double>(rng, 4)) +
                 kernel_quartic(0.1, PhaseSpace::abstract(4)) +
                 smooth<double>(4, "log1p", [](const PhaseVector<double>& v) { return std::log1p(v.squared_norm()); });
  const Matrix<double> X = gaussian_matrix<double>(rng, 8, 50);
  const Vector<double> batch = evaluate_batch(f, X);
  for (Index j = 0; j < X.cols(); ++j)
    CHECK(batch(j) == doctest::Approx(evaluate(f, PhaseVector<double>::from_coords(X.col(j)))).epsilon(1e-13));
}

TEST_CASE("construction checks") {
  CHECK_THROWS_AS(smooth<double>(2, "shifted", [](const PhaseVector<double>& v) { return 1.0 + v.squared_norm(); }),
                  DomainError);
  Rng rng = make_rng(13);
  CHECK_THROWS_AS(quadratic(1.0, random_symplectic_operator<double>(rng, 2)) +
                      quadratic(1.0, random_symplectic_operator<double>(rng, 3)),
                  DimensionError);
  CHECK_THROWS_AS(factored_quartic(1.0, SymplecticOperator<double>::identity(2), SymplecticOperator<double>::identity(3)),
                  DimensionError);
  CHECK_THROWS_AS(smooth<double>(2, "h", norm2_of, Matrix<double>::Identity(3, 3)), DimensionError);
}

TEST_CASE("J invariance probe") {
  Rng rng = make_rng(14);
  const auto f = quadratic(1.0, random_symplectic_operator<double>(rng, 3)) +
                 factored_quartic(1.0, random_symplectic_operator<double>(rng, 3),
                                  random_symplectic_operator<double>(rng, 3));
  const auto ok = is_J_invariant(f, 50, 1);
  CHECK(ok.invariant);
  CHECK(ok.max_residual < 1e-13);
  const auto q_only = smooth<double>(3, "q0^2", [](const PhaseVector<double>& v) { return v.q()(0) * v.q()(0); });
  CHECK_FALSE(is_J_invariant(q_only, 50, 1).invariant);
}

TEST_CASE("hessian at the origin") {
  Rng rng = make_rng(15);
  const auto A = random_symplectic_operator<double>(rng, 3);
  SUBCASE("polynomial terms are exact") {
    const auto f = quadratic(0.75, A) + factored_quartic(3.0, A, A) + kernel_quartic(2.0, PhaseSpace::abstract(3));
    const auto h = hessian_at_zero(f);
    CHECK(max_abs(Matrix<double>(assemble(h.op) - 1.5 * assemble(A))) < 1e-14);
    CHECK(h.finite_difference_residual == 0.0);
  }
  SUBCASE("finite differences reproduce analytic Hessians") {
    const Matrix<double> M = assemble(A);
    const auto f = smooth<double>(3, "sin-form", [M](const PhaseVector<double>& v) {
      return std::sin(v.coords().dot(M * v.coords()));
    });
    const auto h = hessian_at_zero(f);
    CHECK(max_abs(Matrix<double>(assemble(h.op) - 2 * M)) < 1e-8);
    const auto g = smooth<double>(3, "log1p", [](const PhaseVector<double>& v) { return std::log1p(v.squared_norm()); });
    CHECK(max_abs(Matrix<double>(assemble(hessian_at_zero(g).op) - 2 * Matrix<double>::Identity(6, 6))) < 1e-8);
  }
  SUBCASE("a kink at the origin is reported") {
    const auto f = smooth<double>(2, "norm", [](const PhaseVector<double>& v) { return std::sqrt(v.squared_norm()); });
    CHECK_THROWS_AS(hessian_at_zero(f), NonSmoothError);
  }
  SUBCASE("non J-commuting Hessians are projected and the residual is recorded") {
    const auto f = smooth<double>(2, "q0^2", [](const PhaseVector<double>& v) { return v.q()(0) * v.q()(0); });
    const auto h = hessian_at_zero(f);
    CHECK(h.projection_residual == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(h.op.R()(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("scaling of variables") {
  Rng rng = make_rng(16);
  const auto A = random_symplectic_operator<double>(rng, 3);
  const auto f = quadratic(0.5, A) + factored_quartic(0.25, A, SymplecticOperator<double>::identity(3)) +
                 kernel_quartic(1.0, PhaseSpace::abstract(3)) +
                 smooth<double>(3, "norm2-exp", [](const PhaseVector<double>& v) {
                   return v.squared_norm() * std::exp(-v.squared_norm());
                 });
  for (double alpha : {1e-3, 0.1, 2.0}) {
    const auto fq = scale_variable(f, alpha);
    for (int t = 0; t < 20; ++t) {
      const auto v = random_unit_phase_vector<double>(rng, 3);
      const double expected = evaluate(f, std::sqrt(alpha) * v) / alpha;
      CHECK(evaluate(fq, v) == doctest::Approx(expected).epsilon(1e-13));
    }
    const Matrix<double> h = assemble(hessian_at_zero(f).op);
    const Matrix<double> hq = assemble(hessian_at_zero(fq).op);
    CHECK(max_abs(Matrix<double>(h - hq)) < 1e-8);
  }
  CHECK_THROWS_AS(scale_variable(f, 0.0), DomainError);
}
