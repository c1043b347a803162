#include <doctest.h>

#include <cmath>

#include "bvp/system.hpp"
#include "test_support.hpp"

using namespace bvp;
using testsup::max_gap;

TEST_CASE("interval validates its endpoints") {
    CHECK_NOTHROW(Interval(0.0, 1.0));
    CHECK_THROWS_AS(Interval(1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(Interval(2.0, 1.0), ValidationError);
    const Interval iv(-1.0, 3.0);
    CHECK(iv.length() == doctest::Approx(4.0));
    CHECK(iv.contains(0.0));
    CHECK(iv.contains(-1.0));
    CHECK(iv.contains(3.0));
    CHECK_FALSE(iv.contains(3.0001));
}

TEST_CASE("constant coefficients have vanishing derivatives of every order") {
    Matrix value(2, 2);
    value << Complex(1, 2), Complex(0, 0), Complex(3, 0), Complex(-1, 1);
    const auto fn = CoefficientFunction::constant(value);
    CHECK(fn.rows() == 2);
    CHECK(fn.cols() == 2);
    CHECK(fn.is_constant());
    CHECK(fn.max_derivative() == kUnlimitedDerivatives);
    CHECK(max_gap(fn.eval(0.37), value) == 0.0);
    CHECK(testsup::max_abs(fn.derivative(0.37, 1)) == 0.0);
    CHECK(testsup::max_abs(fn.derivative(-5.0, 7)) == 0.0);
}

TEST_CASE("polynomial coefficients differentiate exactly") {
    // P(t) = C0 + C1 (t - 1/2) + C2 (t - 1/2)^2 with scalar blocks; the
    // expected values below are plain calculus done by hand.
    Matrix c0(1, 1), c1(1, 1), c2(1, 1);
    c0 << 2.0;
    c1 << -3.0;
    c2 << 0.5;
    const auto fn = CoefficientFunction::polynomial({c0, c1, c2}, 0.5);
    CHECK(fn.max_derivative() == kUnlimitedDerivatives);

    const double t = 1.25;
    const double u = t - 0.5;
    CHECK(fn.eval(t)(0, 0).real() == doctest::Approx(2.0 - 3.0 * u + 0.5 * u * u));
    CHECK(fn.derivative(t, 1)(0, 0).real() == doctest::Approx(-3.0 + u));
    CHECK(fn.derivative(t, 2)(0, 0).real() == doctest::Approx(1.0));
    CHECK(testsup::max_abs(fn.derivative(t, 3)) == 0.0);
}

TEST_CASE("sampled coefficients interpolate and refuse unavailable derivatives") {
    std::vector<double> points;
    std::vector<Matrix> values;
    const int count = 41;
    for (int i = 0; i < count; ++i) {
        const double t = i / double(count - 1);
        points.push_back(t);
        Matrix v(1, 1);
        v << std::sin(t);
        values.push_back(v);
    }
    const auto fn = CoefficientFunction::sampled(points, values, 5);
    CHECK(fn.max_derivative() == 4);
    CHECK(fn.eval(0.437)(0, 0).real() == doctest::Approx(std::sin(0.437)).epsilon(1e-8));
    CHECK(fn.derivative(0.437, 1)(0, 0).real() ==
          doctest::Approx(std::cos(0.437)).epsilon(1e-5));
    CHECK_THROWS_AS(fn.derivative(0.437, 5), OrderUnavailable);
}

TEST_CASE("sampled construction rejects malformed grids") {
    Matrix v(1, 1);
    v << 1.0;
    CHECK_THROWS_AS(CoefficientFunction::sampled({0.0, 0.0, 1.0}, {v, v, v}, 1),
                    ValidationError);
    CHECK_THROWS_AS(CoefficientFunction::sampled({0.0, 1.0}, {v, v, v}, 1), ValidationError);
    CHECK_THROWS_AS(CoefficientFunction::sampled({0.0, 1.0}, {v, v}, 3), ValidationError);
}

TEST_CASE("shifted_by adds a constant matrix to any representation") {
    Matrix delta(1, 1);
    delta << Complex(0.25, -1.0);

    Matrix c(1, 1);
    c << 2.0;
    const auto constant = CoefficientFunction::constant(c).shifted_by(delta);
    CHECK(constant.eval(0.7)(0, 0) == Complex(2.25, -1.0));

    const auto poly =
        CoefficientFunction::polynomial({c, c}, 0.0).shifted_by(delta);
    CHECK(poly.eval(0.5)(0, 0) == Complex(2.0 + 1.0 + 0.25, -1.0));
    // Only the order-0 part moves.
    CHECK(poly.derivative(0.5, 1)(0, 0) == Complex(2.0, 0.0));

    Matrix wrong(2, 2);
    wrong.setZero();
    CHECK_THROWS_AS(CoefficientFunction::constant(c).shifted_by(wrong), ValidationError);
}

TEST_CASE("differential system validates its shape") {
    const Interval iv(0.0, 1.0);
    const auto zero2 = CoefficientFunction::constant(Matrix::Zero(2, 2));
    CHECK_NOTHROW(DifferentialSystem(iv, 2, 1, 0, {zero2}));
    CHECK_THROWS_AS(DifferentialSystem(iv, 0, 1, 0, {zero2}), ValidationError);
    CHECK_THROWS_AS(DifferentialSystem(iv, 2, 0, 0, {}), ValidationError);
    CHECK_THROWS_AS(DifferentialSystem(iv, 2, 1, -1, {zero2}), ValidationError);
    CHECK_THROWS_AS(DifferentialSystem(iv, 2, 2, 0, {zero2}), ValidationError);
    const auto zero3 = CoefficientFunction::constant(Matrix::Zero(3, 3));
    CHECK_THROWS_AS(DifferentialSystem(iv, 2, 1, 0, {zero3}), ValidationError);

    const DifferentialSystem sys(iv, 2, 2, 1, {zero2, zero2});
    CHECK(sys.companion_dimension() == 4);
}

TEST_CASE("sampled coefficients must support n derivatives") {
    const Interval iv(0.0, 1.0);
    Matrix v(1, 1);
    v << 1.0;
    std::vector<double> pts{0.0, 0.5, 1.0};
    const auto fn = CoefficientFunction::sampled(pts, {v, v, v}, 2);  // 1 derivative only
    CHECK_NOTHROW(DifferentialSystem(iv, 1, 1, 1, {fn}));
    CHECK_THROWS_AS(DifferentialSystem(iv, 1, 1, 2, {fn}), ValidationError);
}

TEST_CASE("companion matrix has the block structure of the order reduction") {
    const Interval iv(0.0, 2.0);
    Matrix a0(2, 2), a1(2, 2);
    a0 << 1, 2, 3, 4;
    a1 << 5, 6, 7, 8;
    auto system = std::make_shared<const DifferentialSystem>(
        iv, 2, 2, 0,
        std::vector<CoefficientFunction>{CoefficientFunction::constant(a0),
                                         CoefficientFunction::constant(a1)});
    const CompanionSystem companion = build_companion(system);
    CHECK(companion.dimension() == 4);

    const Matrix K = companion.eval(0.5);
    // x' + K x = 0 with x = col(y, y'): top block row is y' - y' = 0, i.e.
    // K has -I on the superdiagonal; the bottom block row carries (A_0, A_1).
    CHECK(max_gap(K.block(0, 2, 2, 2), Matrix(-Matrix::Identity(2, 2))) == 0.0);
    CHECK(testsup::max_abs(K.block(0, 0, 2, 2)) == 0.0);
    CHECK(max_gap(K.block(2, 0, 2, 2), a0) == 0.0);
    CHECK(max_gap(K.block(2, 2, 2, 2), a1) == 0.0);
}

TEST_CASE("first-order companion is the coefficient itself") {
    const Interval iv(0.0, 1.0);
    Matrix a0(2, 2);
    a0 << 0, 1, -1, 0;
    auto system = std::make_shared<const DifferentialSystem>(
        iv, 2, 1, 0,
        std::vector<CoefficientFunction>{CoefficientFunction::constant(a0)});
    const CompanionSystem companion = build_companion(system);
    CHECK(companion.dimension() == 2);
    CHECK(max_gap(companion.eval(0.3), a0) == 0.0);
}
