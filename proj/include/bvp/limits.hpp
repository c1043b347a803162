#pragma once

#include <functional>

#include "bvp/fredholm.hpp"
#include "bvp/solver.hpp"

namespace bvp {

/// Parameters of the norm ||y||_{n,p} = sum_{k=0}^n ||y^(k)||_p, summed
/// over matrix entries.  p = infinity uses the maximum over `grid_points`
/// uniform samples (a lower bound of the true sup); p < infinity uses
/// adaptive quadrature of |.|^p.
struct SobolevNorm {
    int n = 0;
    double p = 2.0;
    int grid_points = 257;
};

double sobolev_norm(const Trajectory& y, const SobolevNorm& norm, double quad_tol = 1e-10);

/// A base problem together with a family of perturbed problems indexed by
/// k.  All members must share (m, r, n, l, interval).
struct PerturbationSequence {
    std::shared_ptr<const DifferentialSystem> base_system;
    BoundaryOperator base_operator;
    std::function<std::pair<std::shared_ptr<const DifferentialSystem>, BoundaryOperator>(int)>
        member;
    std::vector<int> k_values;
};

/// Everything measured for one member of the sequence.
struct ConvergenceRow {
    int k = 0;
    std::vector<double> coeff_norm_gaps;  // ||A_j(.,k) - A_j||_{n,p} by coefficient index
    std::vector<double> fundsol_gaps;     // ||Y_i(.,k) - Y_i||_{n+r,p} by i
    double char_matrix_gap = 0.0;         // ||M_k - M||_F
    Eigen::Index rank_k = 0;
    Eigen::Index dim_ker_k = 0;
    Eigen::Index dim_coker_k = 0;
    long index_k = 0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    Eigen::Index rank_base = 0;
    Eigen::Index dim_ker_base = 0;
    Eigen::Index dim_coker_base = 0;
    std::vector<double> base_singular_values;
    double convergence_tol = 0.0;
    bool matrices_converge = false;
    bool semicontinuity_holds = false;
    /// Log-log least-squares slope of char_matrix_gap vs k; NaN when fewer
    /// than 4 usable (positive-gap) points exist.
    double fitted_rate = 0.0;
};

/// Runs the whole family: per-k coefficient / fundamental-solution /
/// characteristic-matrix gaps and Fredholm data, then the verdicts.
///
/// matrices_converge: the matrix gap ends below `tol` and did not grow.
/// semicontinuity_holds: once the matrix gap is below sigma_rho/2 (the
/// smallest kept singular value of the base M), rank_k >= rank_base for
/// every later member — exactly the lower-semicontinuity implication.
ConvergenceReport run_sequence(const PerturbationSequence& seq, const SobolevNorm& norm,
                               double tol, const SolverOptions& options = {});

/// Result of the rank-one instability experiment.
struct InstabilityDemo {
    FredholmReport before;
    FredholmReport after;
    Matrix matrix_before;
    Matrix matrix_after;
    double epsilon = 0.0;
};

/// Perturbs B by the rank-one operator eps·u (v^H col(y(a),...,y^(r-1)(a)))
/// built from the first discarded singular pair of M(L,B), so the
/// perturbed characteristic matrix is exactly M + eps·u v^H: the rank rises
/// by one, both Fredholm numbers drop by one, and the index is unchanged.
/// Throws NotApplicable when M already has full rank min(l, rm).
InstabilityDemo finite_rank_instability_demo(const DifferentialSystem& system,
                                             const BoundaryOperator& B, double epsilon,
                                             const SolverOptions& options = {});

}  // namespace bvp
