#include "bvp/solver.hpp"

#include <Eigen/SVD>

namespace bvp {

BvpSolver::BvpSolver(std::shared_ptr<const DifferentialSystem> system,
                     BoundaryOperator boundary, SolverOptions options)
    : boundary_(std::move(boundary)), options_(options),
      fundamentals_(std::move(system), options.integrator),
      matrix_(characteristic_matrix(fundamentals_, boundary_, options.quad_tol)),
      report_(fredholm_report(matrix_, options.rank_tol)) {}

std::vector<BvpTrajectory> BvpSolver::kernel() const {
    return kernel_basis_functions(fundamentals_, matrix_, options_.rank_tol);
}

BvpSolution BvpSolver::solve(const CoefficientFunction& f, const Vector& c) const {
    const DifferentialSystem& sys = fundamentals_.system();
    if (c.size() != boundary_.l())
        throw ShapeMismatch("boundary data c must have l entries");

    // Particular solution of the differential equation alone, with zero
    // Cauchy data; its boundary defect is what M q must make up.
    const Eigen::Index dim = sys.companion_dimension();
    auto particular = std::make_shared<const CompanionTrajectory>(solve_inhomogeneous_cauchy(
        fundamentals_.trajectory()->system_ptr(), f, Vector::Zero(dim), options_.integrator));
    const Vector defect =
        c - apply_to_function(boundary_, *particular, options_.quad_tol).col(0);

    // Minimum-norm least squares through the same SVD thresholding as the
    // rank decision, so the particular solution is deterministic.
    Eigen::JacobiSVD<Matrix> svd(matrix_.data(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double threshold =
        std::max(options_.rank_tol * sigma_max *
                     static_cast<double>(std::max(matrix_.rows(), matrix_.cols())),
                 matrix_.noise_floor());
    Vector projected = svd.matrixU().adjoint() * defect;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        projected(i) = sigma(i) > threshold ? projected(i) / sigma(i) : Complex(0.0, 0.0);
    const Vector q = svd.matrixV() * projected;
    const double residual = (matrix_.data() * q - defect).norm();

    BvpSolution solution;
    solution.residual = residual;
    solution.q_particular = q;
    if (residual > options_.consistency_tol * (1.0 + c.norm())) {
        solution.status = SolutionStatus::Inconsistent;
        return solution;
    }
    solution.particular.emplace(fundamentals_.trajectory(), q, particular);
    if (report_.invertible) {
        solution.status = SolutionStatus::Unique;
    } else {
        solution.status = SolutionStatus::Family;
        solution.dim_ker = report_.dim_ker;
        solution.kernel_basis = kernel();
    }
    return solution;
}

BvpSolution solve_bvp(const DifferentialSystem& system, const BoundaryOperator& B,
                      const CoefficientFunction& f, const Vector& c, double tol) {
    auto shared = std::make_shared<const DifferentialSystem>(system);
    return BvpSolver(shared, B, SolverOptions::from_tol(tol)).solve(f, c);
}

}  // namespace bvp
