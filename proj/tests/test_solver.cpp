#include <doctest.h>

#include <cmath>

#include "bvp/solver.hpp"
#include "test_support.hpp"

using namespace bvp;

namespace {

std::shared_ptr<const DifferentialSystem> constant_system(Interval iv, int m, int r, int n,
                                                          std::vector<Matrix> coeffs) {
    std::vector<CoefficientFunction> fns;
    for (Matrix& c : coeffs) fns.push_back(CoefficientFunction::constant(std::move(c)));
    return std::make_shared<const DifferentialSystem>(iv, m, r, n, std::move(fns));
}

Matrix scalar(double x) {
    Matrix m(1, 1);
    m << x;
    return m;
}

}  // namespace

TEST_CASE("Cauchy conditions give the unique solution of y' + y = 1") {
    const Interval iv(0.0, 2.0);
    auto system = constant_system(iv, 1, 1, 0, {scalar(1.0)});
    const BoundaryOperator B(iv, SystemSignature{1, 1, 0}, 1,
                             {PointTerm{0.0, 0.0, scalar(1.0)}});
    const BvpSolver solver(system, B);
    CHECK(solver.report().invertible);

    Vector c(1);
    c << 0.0;
    const auto sol = solver.solve(CoefficientFunction::constant(scalar(1.0)), c);
    REQUIRE(sol.status == SolutionStatus::Unique);
    REQUIRE(sol.particular.has_value());
    for (double t : {0.5, 1.0, 2.0})
        CHECK(std::abs(sol.particular->value(t)(0, 0) - (1.0 - std::exp(-t))) < 1e-9);
    CHECK(sol.residual < 1e-12);
    CHECK(sol.kernel_basis.empty());
    CHECK(max_ode_residual(*sol.particular) < 1e-8);
}

TEST_CASE("a Dirichlet problem for y'' = f reproduces the parabola") {
    // y'' = -2, y(0) = y(1) = 0, solution y = t(1 - t).
    const Interval iv(0.0, 1.0);
    auto system = constant_system(iv, 1, 2, 0, {scalar(0.0), scalar(0.0)});
    const BoundaryOperator B(iv, SystemSignature{1, 2, 0}, 2,
                             {PointTerm{0.0, 0.0, Matrix((Matrix(2, 1) << 1.0, 0.0).finished())},
                              PointTerm{1.0, 0.0, Matrix((Matrix(2, 1) << 0.0, 1.0).finished())}});
    const BvpSolver solver(system, B);
    CHECK(solver.report().invertible);

    const auto sol =
        solver.solve(CoefficientFunction::constant(scalar(-2.0)), Vector::Zero(2));
    REQUIRE(sol.status == SolutionStatus::Unique);
    for (double t : {0.25, 0.5, 0.9})
        CHECK(std::abs(sol.particular->value(t)(0, 0) - t * (1.0 - t)) < 1e-9);
    CHECK(std::abs(sol.particular->derivative(0.5, 1)(0, 0)) < 1e-9);  // vertex
}

TEST_CASE("the periodic problem classifies as a one-parameter family") {
    const Interval iv(0.0, 1.0);
    auto system = constant_system(iv, 1, 1, 0, {scalar(0.0)});
    const BoundaryOperator B(iv, SystemSignature{1, 1, 0}, 1,
                             {PointTerm{0.0, 0.0, scalar(-1.0)},
                              PointTerm{1.0, 0.0, scalar(1.0)}});
    const BvpSolver solver(system, B);

    Vector c(1);
    c << 1.0;
    const auto sol = solver.solve(CoefficientFunction::constant(scalar(1.0)), c);
    REQUIRE(sol.status == SolutionStatus::Family);
    CHECK(sol.dim_ker == 1);
    REQUIRE(sol.kernel_basis.size() == 1);
    // Any members y(t) = t + const solve the problem; the kernel is constant.
    const Complex k0 = sol.kernel_basis[0].value(0.2)(0, 0);
    CHECK(std::abs(sol.kernel_basis[0].value(0.8)(0, 0) - k0) < 1e-9);
    CHECK(std::abs((sol.particular->value(0.75)(0, 0) - sol.particular->value(0.25)(0, 0)) -
                   0.5) < 1e-9);
    CHECK(sol.residual < 1e-9);
}

TEST_CASE("the impossible periodic problem is certified inconsistent") {
    // y' = 1 forces y(1) - y(0) = 1; demanding 0 leaves defect exactly 1.
    const Interval iv(0.0, 1.0);
    auto system = constant_system(iv, 1, 1, 0, {scalar(0.0)});
    const BoundaryOperator B(iv, SystemSignature{1, 1, 0}, 1,
                             {PointTerm{0.0, 0.0, scalar(-1.0)},
                              PointTerm{1.0, 0.0, scalar(1.0)}});
    const BvpSolver solver(system, B);
    const auto sol =
        solver.solve(CoefficientFunction::constant(scalar(1.0)), Vector::Zero(1));
    CHECK(sol.status == SolutionStatus::Inconsistent);
    CHECK(sol.residual == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(sol.particular.has_value());
}

TEST_CASE("overdetermined problems distinguish consistent from inconsistent data") {
    // y' = 0 with both y(0) and y(1) prescribed: l = 2 > rm = 1.
    const Interval iv(0.0, 1.0);
    auto system = constant_system(iv, 1, 1, 0, {scalar(0.0)});
    const BoundaryOperator B(iv, SystemSignature{1, 1, 0}, 2,
                             {PointTerm{0.0, 0.0, Matrix((Matrix(2, 1) << 1.0, 0.0).finished())},
                              PointTerm{1.0, 0.0, Matrix((Matrix(2, 1) << 0.0, 1.0).finished())}});
    const BvpSolver solver(system, B);
    CHECK(solver.report().index == -1);
    CHECK(solver.report().dim_coker == 1);

    const auto f = CoefficientFunction::constant(scalar(0.0));

    SUBCASE("matching endpoint data: a single rigid solution") {
        Vector c(2);
        c << 1.0, 1.0;
        const auto sol = solver.solve(f, c);
        REQUIRE(sol.status == SolutionStatus::Family);  // solvable, not invertible
        CHECK(sol.dim_ker == 0);
        CHECK(sol.kernel_basis.empty());
        CHECK(std::abs(sol.particular->value(0.5)(0, 0) - 1.0) < 1e-9);
    }

    SUBCASE("contradictory endpoint data: least-squares defect sqrt(1/2)") {
        Vector c(2);
        c << 1.0, 2.0;
        const auto sol = solver.solve(f, c);
        CHECK(sol.status == SolutionStatus::Inconsistent);
        CHECK(sol.residual == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    }
}

TEST_CASE("solver rejects mismatched right-hand sides and data") {
    const Interval iv(0.0, 1.0);
    auto system = constant_system(iv, 1, 1, 0, {scalar(0.0)});
    const BoundaryOperator B(iv, SystemSignature{1, 1, 0}, 1,
                             {PointTerm{0.0, 0.0, scalar(1.0)}});
    const BvpSolver solver(system, B);
    const auto f2 = CoefficientFunction::constant(Matrix::Zero(2, 1));
    CHECK_THROWS_AS(solver.solve(f2, Vector::Zero(1)), ShapeMismatch);
    const auto f = CoefficientFunction::constant(scalar(0.0));
    CHECK_THROWS_AS(solver.solve(f, Vector::Zero(2)), ShapeMismatch);
}

TEST_CASE("the one-shot wrapper matches the solver object") {
    const Interval iv(0.0, 1.0);
    auto system = constant_system(iv, 1, 1, 0, {scalar(1.0)});
    const BoundaryOperator B(iv, SystemSignature{1, 1, 0}, 1,
                             {PointTerm{1.0, 0.0, scalar(1.0)}});
    Vector c(1);
    c << 0.5;
    const auto f = CoefficientFunction::constant(scalar(0.0));
    const auto direct = solve_bvp(*system, B, f, c, 1e-10);
    REQUIRE(direct.status == SolutionStatus::Unique);
    // y = 0.5 e^{1 - t}: decay hitting 0.5 at t = 1.
    CHECK(std::abs(direct.particular->value(0.0)(0, 0) - 0.5 * std::exp(1.0)) < 1e-8);
}

TEST_CASE("solutions respect superposition") {
    const Interval iv(0.0, 1.0);
    auto system = constant_system(iv, 1, 1, 0, {scalar(1.0)});
    const BoundaryOperator B(iv, SystemSignature{1, 1, 0}, 1,
                             {PointTerm{0.0, 0.0, scalar(1.0)}});
    const BvpSolver solver(system, B);
    Vector c1(1), c2(1);
    c1 << 1.0;
    c2 << -2.0;
    const auto f1 = CoefficientFunction::constant(scalar(1.0));
    const auto f0 = CoefficientFunction::constant(scalar(0.0));
    const auto s1 = solver.solve(f1, c1);
    const auto s2 = solver.solve(f0, c2);
    const auto sum = solver.solve(f1, Vector(c1 + c2));
    for (double t : {0.3, 0.8}) {
        const Complex lhs = s1.particular->value(t)(0, 0) + s2.particular->value(t)(0, 0);
        CHECK(std::abs(lhs - sum.particular->value(t)(0, 0)) < 1e-9);
    }
}
