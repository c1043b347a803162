#pragma once

#include <variant>
#include <vector>

#include "bvp/ode_core.hpp"
#include "bvp/system.hpp"

namespace bvp {

/// alpha · (D^order y)(point); `order` may be fractional, in which case the
/// derivative is taken in the Caputo sense.
struct PointTerm {
    double point;
    double order;
    Matrix alpha;  // l x m
};

/// ∫_a^b kernel(t) · y^(d)(t) dt with d = derivative_order.
struct IntegralTerm {
    CoefficientFunction kernel;  // l x m function of t
    int derivative_order;
};

using BoundaryTerm = std::variant<PointTerm, IntegralTerm>;

/// Shape of the differential systems an operator applies to.
struct SystemSignature {
    Eigen::Index m;
    int r;
    int n;
};

/// A continuous linear map y ↦ C^l given by its analytic representation:
/// a sum of (possibly fractional-order) point terms and integral terms.
class BoundaryOperator {
public:
    BoundaryOperator(Interval interval, SystemSignature signature, Eigen::Index l,
                     std::vector<BoundaryTerm> terms);

    Eigen::Index l() const { return l_; }
    Eigen::Index m() const { return signature_.m; }
    const Interval& interval() const { return interval_; }
    const SystemSignature& signature() const { return signature_; }
    const std::vector<BoundaryTerm>& terms() const { return terms_; }

    bool matches(const DifferentialSystem& system) const;

    /// Highest classical derivative order any term needs.
    int max_derivative_order() const { return max_order_; }

private:
    Interval interval_;
    SystemSignature signature_;
    Eigen::Index l_;
    std::vector<BoundaryTerm> terms_;
    int max_order_;
};

/// Applies B column-wise: y may have any number of columns, and the result
/// is l x cols(y).  Terms are summed in ascending index order so results
/// are bit-reproducible.
Matrix apply_to_function(const BoundaryOperator& B, const Trajectory& y,
                         double quad_tol = 1e-10);

/// Same computation, named for the matrix-trajectory reading [BY]: column j
/// of the result is B applied to column j of Y.
Matrix apply_to_matrix(const BoundaryOperator& B, const Trajectory& Y,
                       double quad_tol = 1e-10);

/// Caputo fractional derivative
///   (D^beta y)(t) = (1/Γ(q-beta)) ∫_a^t (t-s)^(q-1-beta) y^(q)(s) ds,
/// q = ⌈beta⌉, with the weak endpoint singularity removed by a graded
/// power substitution.  Integer beta routes to the classical derivative;
/// the value at t = a is 0 (the integral is empty).
Matrix caputo_derivative(const Trajectory& y, double beta, double t,
                         double quad_tol = 1e-10);

}  // namespace bvp
