#include "bvp/boundary.hpp"

#include <cmath>

#include "bvp/quadrature.hpp"

namespace bvp {

namespace {

constexpr double kIntegerSnap = 1e-12;

bool is_integer_order(double order) {
    return std::abs(order - std::round(order)) < kIntegerSnap;
}

int classical_order_needed(const BoundaryTerm& term) {
    if (const auto* pt = std::get_if<PointTerm>(&term))
        return static_cast<int>(std::ceil(pt->order - kIntegerSnap));
    return std::get<IntegralTerm>(term).derivative_order;
}

}  // namespace

BoundaryOperator::BoundaryOperator(Interval interval, SystemSignature signature,
                                   Eigen::Index l, std::vector<BoundaryTerm> terms)
    : interval_(interval), signature_(signature), l_(l), terms_(std::move(terms)),
      max_order_(0) {
    if (signature_.m < 1 || signature_.r < 1 || signature_.n < 0)
        throw ValidationError("boundary operator signature must have m,r >= 1 and n >= 0");
    if (l_ < 1) throw ValidationError("a boundary operator needs at least one condition");
    const int smoothness = signature_.n + signature_.r;
    for (const BoundaryTerm& term : terms_) {
        if (const auto* pt = std::get_if<PointTerm>(&term)) {
            if (!interval_.contains(pt->point))
                throw ValidationError("point term lies outside the interval");
            if (pt->order < 0.0)
                throw ValidationError("point term derivative order must be non-negative");
            if (pt->alpha.rows() != l_ || pt->alpha.cols() != signature_.m)
                throw ShapeMismatch("point term matrix must be l x m");
        } else {
            const auto& it = std::get<IntegralTerm>(term);
            if (it.derivative_order < 0)
                throw ValidationError("integral term derivative order must be non-negative");
            if (it.kernel.rows() != l_ || it.kernel.cols() != signature_.m)
                throw ShapeMismatch("integral kernel must be l x m");
        }
        const int needed = classical_order_needed(term);
        if (needed > smoothness)
            throw ValidationError("boundary term needs derivative order " +
                                  std::to_string(needed) + " but solutions only have " +
                                  std::to_string(smoothness));
        max_order_ = std::max(max_order_, needed);
    }
}

bool BoundaryOperator::matches(const DifferentialSystem& system) const {
    return system.m == signature_.m && system.r == signature_.r && system.n == signature_.n &&
           std::abs(system.interval.a - interval_.a) < 1e-12 &&
           std::abs(system.interval.b - interval_.b) < 1e-12;
}

Matrix apply_to_function(const BoundaryOperator& B, const Trajectory& y, double quad_tol) {
    if (y.rows() != B.m())
        throw ShapeMismatch("trajectory row count does not match the boundary operator");
    if (std::abs(y.interval().a - B.interval().a) > 1e-12 ||
        std::abs(y.interval().b - B.interval().b) > 1e-12)
        throw ValidationError("trajectory interval does not match the boundary operator");
    if (B.max_derivative_order() > y.max_order())
        throw OrderUnavailable("trajectory does not supply the derivatives the operator needs");

    Matrix result = Matrix::Zero(B.l(), y.cols());
    for (const BoundaryTerm& term : B.terms()) {
        if (const auto* pt = std::get_if<PointTerm>(&term)) {
            Matrix value;
            if (is_integer_order(pt->order))
                value = y.derivative(pt->point, static_cast<int>(std::round(pt->order)));
            else
                value = caputo_derivative(y, pt->order, pt->point, quad_tol);
            result.noalias() += pt->alpha * value;
        } else {
            const auto& it = std::get<IntegralTerm>(term);
            auto integrand = [&](double t) -> Matrix {
                return it.kernel.eval(t) * y.derivative(t, it.derivative_order);
            };
            result += quadrature::integrate(integrand, B.interval().a, B.interval().b,
                                            quad_tol);
        }
    }
    return result;
}

Matrix apply_to_matrix(const BoundaryOperator& B, const Trajectory& Y, double quad_tol) {
    return apply_to_function(B, Y, quad_tol);
}

Matrix caputo_derivative(const Trajectory& y, double beta, double t, double quad_tol) {
    if (beta < 0.0) throw ValidationError("fractional derivative order must be >= 0");
    if (is_integer_order(beta)) return y.derivative(t, static_cast<int>(std::round(beta)));

    const int q = static_cast<int>(std::ceil(beta));
    if (q > y.max_order())
        throw OrderUnavailable("Caputo derivative needs classical order " + std::to_string(q));
    const double a = y.interval().a;
    if (!y.interval().contains(t)) throw DomainError("Caputo derivative outside interval");
    if (t <= a) return Matrix::Zero(y.rows(), y.cols());

    // Substituting s = t - T v^gamma removes the (t-s)^(q-1-beta) endpoint
    // singularity: the transformed integrand is C^3 at v = 0 once
    // gamma >= 4/(q-beta).
    const double T = t - a;
    const double mu = q - beta;  // in (0, 1)
    const double gamma = std::max(1.0, std::ceil(4.0 / mu));
    auto integrand = [&](double v) -> Matrix {
        const double vw = std::pow(v, gamma * mu - 1.0);
        return vw * y.derivative(t - T * std::pow(v, gamma), q);
    };
    const Matrix core = quadrature::integrate(integrand, 0.0, 1.0, quad_tol);
    return (gamma * std::pow(T, mu) / std::tgamma(mu)) * core;
}

}  // namespace bvp
