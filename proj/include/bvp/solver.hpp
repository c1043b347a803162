#pragma once

#include <optional>

#include "bvp/fredholm.hpp"

namespace bvp {

enum class SolutionStatus { Unique, Family, Inconsistent };

/// Outcome of solving Ly = f, By = c.
///
/// Unique: the operator is invertible and `particular` is the solution.
/// Family: solutions exist but the operator is not invertible; the full
///   solution set is particular + span(kernel_basis).  dim_ker may be 0
///   for an overdetermined-but-consistent problem (a single solution that
///   does not depend continuously on the data).
/// Inconsistent: no solution; `residual` is the least-squares defect of
///   M q = c - B y_p, which certifies the failure.
struct BvpSolution {
    SolutionStatus status = SolutionStatus::Inconsistent;
    Eigen::Index dim_ker = 0;
    double residual = 0.0;
    std::optional<BvpTrajectory> particular;
    std::vector<BvpTrajectory> kernel_basis;
    Vector q_particular;  // Cauchy data col(y(a), ..., y^(r-1)(a)) of `particular`
};

struct SolverOptions {
    IntegratorOptions integrator{};
    double quad_tol = 1e-10;
    double rank_tol = 1e-10;
    double consistency_tol = 1e-7;

    static SolverOptions from_tol(double tol) {
        SolverOptions opts;
        opts.integrator = IntegratorOptions::from_tol(tol);
        opts.quad_tol = tol;
        return opts;
    }
};

/// Solves many (f, c) pairs against one (L, B): the fundamental solve, the
/// characteristic matrix, its SVD-backed report and the kernel basis are
/// computed once and shared.  Immutable after construction.
class BvpSolver {
public:
    BvpSolver(std::shared_ptr<const DifferentialSystem> system, BoundaryOperator boundary,
              SolverOptions options = {});

    const DifferentialSystem& system() const { return fundamentals_.system(); }
    const BoundaryOperator& boundary() const { return boundary_; }
    const SolverOptions& options() const { return options_; }
    const FundamentalSystem& fundamentals() const { return fundamentals_; }
    const CharacteristicMatrix& matrix() const { return matrix_; }
    const FredholmReport& report() const { return report_; }

    /// Kernel of the homogeneous problem (may be empty).
    std::vector<BvpTrajectory> kernel() const;

    BvpSolution solve(const CoefficientFunction& f, const Vector& c) const;

private:
    BoundaryOperator boundary_;
    SolverOptions options_;
    FundamentalSystem fundamentals_;
    CharacteristicMatrix matrix_;
    FredholmReport report_;
};

/// One-shot convenience wrapper around BvpSolver.
BvpSolution solve_bvp(const DifferentialSystem& system, const BoundaryOperator& B,
                      const CoefficientFunction& f, const Vector& c, double tol);

}  // namespace bvp
