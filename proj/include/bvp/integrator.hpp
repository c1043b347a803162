#pragma once

#include <functional>
#include <vector>

#include "bvp/system.hpp"

namespace bvp {

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    long max_steps = 1'000'000;

    static IntegratorOptions from_tol(double tol) {
        IntegratorOptions opts;
        opts.rtol = tol;
        opts.atol = tol * 1e-2;
        return opts;
    }
};

/// Archived dense output of one adaptive Dormand-Prince (RK5(4)) run.
///
/// Every accepted step keeps the quartic interpolant of Hairer's dopri5,
/// so the trajectory can be evaluated anywhere in [a, b] after the fact.
/// Evaluation at a step's left endpoint reproduces the stored state
/// exactly; in particular value(a) is the initial matrix, bit for bit.
class DenseOutput {
public:
    struct Step {
        double t0;
        double h;
        Matrix c1, c2, c3, c4, c5;  // interpolant coefficients
    };

    DenseOutput(Interval interval, Eigen::Index rows, Eigen::Index cols,
                std::vector<Step> steps);

    Interval interval() const { return interval_; }
    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    std::size_t step_count() const { return steps_.size(); }

    Matrix value(double t) const;

    /// d/dt of the piecewise interpolant. Independent of the ODE right-hand
    /// side, so residual checks built on it are not circular.
    Matrix derivative(double t) const;

private:
    const Step& locate(double t) const;

    Interval interval_;
    Eigen::Index rows_, cols_;
    std::vector<Step> steps_;
};

/// Integrates X'(t) = F(t, X) from X(a) = initial over the interval.
/// Throws IntegrationFailure on step underflow or step budget exhaustion.
DenseOutput integrate_dopri5(const std::function<Matrix(double, const Matrix&)>& rhs,
                             Interval interval, const Matrix& initial,
                             const IntegratorOptions& opts);

}  // namespace bvp
