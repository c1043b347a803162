#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bvp/integrator.hpp"
#include "bvp/system.hpp"

namespace bvp {

/// A matrix-valued function of t on an interval with derivative access.
///
/// `derivative(t, 0)` is the value; orders up to `max_order()` are
/// available and anything beyond throws OrderUnavailable.
class Trajectory {
public:
    virtual ~Trajectory() = default;

    virtual Matrix derivative(double t, int order) const = 0;
    Matrix value(double t) const { return derivative(t, 0); }

    virtual Eigen::Index rows() const = 0;
    virtual Eigen::Index cols() const = 0;
    virtual int max_order() const = 0;
    virtual Interval interval() const = 0;
};

/// Adapts a CoefficientFunction (constant / polynomial / sampled data) to
/// the Trajectory interface.
class CoefficientTrajectory final : public Trajectory {
public:
    CoefficientTrajectory(CoefficientFunction fn, Interval interval)
        : fn_(std::move(fn)), interval_(interval) {}

    Matrix derivative(double t, int order) const override {
        if (!interval_.contains(t)) throw DomainError("evaluation outside interval");
        return fn_.derivative(t, order);
    }
    Eigen::Index rows() const override { return fn_.rows(); }
    Eigen::Index cols() const override { return fn_.cols(); }
    int max_order() const override { return fn_.max_derivative(); }
    Interval interval() const override { return interval_; }

private:
    CoefficientFunction fn_;
    Interval interval_;
};

/// Trajectory defined by an arbitrary callable (t, order) -> matrix.
class FunctionTrajectory final : public Trajectory {
public:
    FunctionTrajectory(std::function<Matrix(double, int)> fn, Eigen::Index rows,
                       Eigen::Index cols, int max_order, Interval interval)
        : fn_(std::move(fn)), rows_(rows), cols_(cols), max_order_(max_order),
          interval_(interval) {}

    Matrix derivative(double t, int order) const override {
        if (order > max_order_) throw OrderUnavailable("derivative order unavailable");
        return fn_(t, order);
    }
    Eigen::Index rows() const override { return rows_; }
    Eigen::Index cols() const override { return cols_; }
    int max_order() const override { return max_order_; }
    Interval interval() const override { return interval_; }

private:
    std::function<Matrix(double, int)> fn_;
    Eigen::Index rows_, cols_;
    int max_order_;
    Interval interval_;
};

/// Dense-output solution X(t) of the companion system x' + K(t)x = g(t),
/// viewed as the underlying m x q function y(t) = first block of X.
///
/// Block j of X holds y^(j) for j < r; higher derivatives (up to n + r)
/// come from the differentiated ODE,
///   y^(r+s) = f^(s) - sum_k sum_{q<=s} C(s,q) A_k^(q) y^(k+s-q),
/// which needs only coefficient derivatives and lower-order blocks.
class CompanionTrajectory final : public Trajectory {
public:
    CompanionTrajectory(std::shared_ptr<const DifferentialSystem> system, DenseOutput dense,
                        std::optional<CoefficientFunction> rhs = std::nullopt);

    /// Full companion state X(t), size rm x q.
    Matrix state(double t) const { return dense_.value(t); }

    /// Interpolant time-derivative of the state; independent of the ODE
    /// right-hand side, used for residual diagnostics.
    Matrix state_derivative(double t) const { return dense_.derivative(t); }

    Matrix derivative(double t, int order) const override;

    Eigen::Index rows() const override { return system_->m; }
    Eigen::Index cols() const override { return q_; }
    int max_order() const override { return system_->n + system_->r; }
    Interval interval() const override { return system_->interval; }

    const DifferentialSystem& system() const { return *system_; }
    std::shared_ptr<const DifferentialSystem> system_ptr() const { return system_; }
    const DenseOutput& dense() const { return dense_; }
    const std::optional<CoefficientFunction>& rhs() const { return rhs_; }

private:
    std::shared_ptr<const DifferentialSystem> system_;
    DenseOutput dense_;
    std::optional<CoefficientFunction> rhs_;
    Eigen::Index q_;
};

/// One of the r fundamental matrix solutions Y_i (1-based index), a view
/// into the shared rm x rm companion solve.  Y_i^(j-1)(a) = delta_{ij} I_m
/// holds exactly: the initial state is stored, not integrated.
class FundamentalSolution final : public Trajectory {
public:
    FundamentalSolution(std::shared_ptr<const CompanionTrajectory> full, int index);

    int index() const { return index_; }

    Matrix derivative_at(double t, int order) const { return derivative(t, order); }
    Matrix derivative(double t, int order) const override;

    Eigen::Index rows() const override { return full_->rows(); }
    Eigen::Index cols() const override { return full_->rows(); }
    int max_order() const override { return full_->max_order(); }
    Interval interval() const override { return full_->interval(); }

    const CompanionTrajectory& companion() const { return *full_; }

private:
    std::shared_ptr<const CompanionTrajectory> full_;
    int index_;
};

/// The cached rm x rm fundamental solve Z(a) = I_{rm}; all r fundamental
/// solutions (and every kernel lift) are views into it.
class FundamentalSystem {
public:
    FundamentalSystem(std::shared_ptr<const DifferentialSystem> system,
                      const IntegratorOptions& opts);

    const DifferentialSystem& system() const { return trajectory_->system(); }
    std::shared_ptr<const CompanionTrajectory> trajectory() const { return trajectory_; }

    /// Z(t), the rm x rm fundamental matrix of the companion system.
    Matrix state(double t) const { return trajectory_->state(t); }

    FundamentalSolution solution(int index) const;
    std::vector<FundamentalSolution> solutions() const;

    const IntegratorOptions& options() const { return options_; }

    /// Relative tolerance the solve was run at; recorded as provenance by
    /// consumers that must reason about the noise level of derived values.
    double integrator_tolerance() const { return options_.rtol; }

private:
    std::shared_ptr<const CompanionTrajectory> trajectory_;
    IntegratorOptions options_;
};

/// y(t) = sum_i Y_i(t) q_i (+ particular), i.e. the function-space lift of a
/// vector q in C^{rm} through the fundamental solutions, optionally shifted
/// by a particular solution of the inhomogeneous equation.
class BvpTrajectory final : public Trajectory {
public:
    BvpTrajectory(std::shared_ptr<const CompanionTrajectory> fundamental, Vector q,
                  std::shared_ptr<const CompanionTrajectory> particular = nullptr);

    Matrix derivative(double t, int order) const override;

    Eigen::Index rows() const override { return fundamental_->rows(); }
    Eigen::Index cols() const override { return 1; }
    int max_order() const override { return fundamental_->max_order(); }
    Interval interval() const override { return fundamental_->interval(); }

    const Vector& coefficients() const { return q_; }
    bool has_particular() const { return particular_ != nullptr; }
    const DifferentialSystem& system() const { return fundamental_->system(); }

    /// Companion state col(y, ..., y^(r-1))(t).
    Vector state(double t) const;
    Vector state_derivative(double t) const;
    const std::optional<CoefficientFunction>& rhs() const;

private:
    std::shared_ptr<const CompanionTrajectory> fundamental_;
    Vector q_;
    std::shared_ptr<const CompanionTrajectory> particular_;
};

/// Solves Z' + K(t) Z = O, Z(a) = initial (rm rows, any number of columns).
DenseOutput solve_matrix_cauchy(const CompanionSystem& companion, const Matrix& initial,
                                const IntegratorOptions& opts);
DenseOutput solve_matrix_cauchy(const CompanionSystem& companion, const Matrix& initial,
                                double tol);

/// The r fundamental solutions of the system, computed from one companion
/// solve with identity initial data.
std::vector<FundamentalSolution> fundamental_solutions(const DifferentialSystem& system,
                                                       double tol);

/// Solves Ly = f with col(y(a), ..., y^(r-1)(a)) = initial.
CompanionTrajectory solve_inhomogeneous_cauchy(std::shared_ptr<const DifferentialSystem> system,
                                               const CoefficientFunction& f,
                                               const Vector& initial,
                                               const IntegratorOptions& opts);

/// sup over a uniform grid of |Ly - f| evaluated with the interpolant
/// estimate of the r-th derivative (not the recursion, which would make the
/// residual vanish identically).
double max_ode_residual(const CompanionTrajectory& traj, int grid_points = 101);
double max_ode_residual(const BvpTrajectory& y, int grid_points = 101);

}  // namespace bvp
