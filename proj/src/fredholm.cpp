#include "bvp/fredholm.hpp"

#include <Eigen/SVD>

namespace bvp {

namespace {

struct RankAnalysis {
    Eigen::JacobiSVD<Matrix> svd;
    double threshold;
    Eigen::Index rank;
};

RankAnalysis analyze(const CharacteristicMatrix& M, double rank_tol, unsigned options) {
    if (!(rank_tol >= 0.0)) throw ValidationError("rank tolerance must be >= 0");
    RankAnalysis out{Eigen::JacobiSVD<Matrix>(M.data(), options), 0.0, 0};
    const auto& sigma = out.svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double dim = static_cast<double>(std::max(M.rows(), M.cols()));
    out.threshold = std::max(rank_tol * sigma_max * dim, M.noise_floor());
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > out.threshold) ++out.rank;
    return out;
}

}  // namespace

CharacteristicMatrix::CharacteristicMatrix(Matrix data, MatrixProvenance provenance)
    : data_(std::move(data)), provenance_(provenance) {
    if (provenance_.m < 1 || provenance_.r < 1)
        throw ValidationError("characteristic matrix needs m, r >= 1");
    if (provenance_.l < 1)
        throw ValidationError("characteristic matrix needs at least one condition row");
    if (data_.rows() != provenance_.l || data_.cols() != provenance_.m * provenance_.r)
        throw ShapeMismatch("characteristic matrix must be l x (r m)");
    if (!(provenance_.integrator_tol >= 0.0 && provenance_.quad_tol >= 0.0))
        throw ValidationError("provenance tolerances must be >= 0");
}

Eigen::Block<const Matrix> CharacteristicMatrix::block_column(int i) const {
    if (i < 1 || i > provenance_.r)
        throw ValidationError("block column index must lie in 1..r");
    return data_.block(0, (i - 1) * provenance_.m, data_.rows(), provenance_.m);
}

CharacteristicMatrix characteristic_matrix(const FundamentalSystem& fundamentals,
                                           const BoundaryOperator& B, double quad_tol) {
    const DifferentialSystem& sys = fundamentals.system();
    if (!B.matches(sys))
        throw ValidationError("boundary operator does not match the system shape");
    const Eigen::Index m = sys.m;
    Matrix M(B.l(), sys.r * m);
    for (int i = 1; i <= sys.r; ++i)
        M.block(0, (i - 1) * m, B.l(), m) =
            apply_to_matrix(B, fundamentals.solution(i), quad_tol);
    MatrixProvenance prov;
    prov.m = m;
    prov.r = sys.r;
    prov.l = B.l();
    prov.integrator_tol = fundamentals.integrator_tolerance();
    prov.quad_tol = quad_tol;
    return CharacteristicMatrix(std::move(M), prov);
}

CharacteristicMatrix characteristic_matrix(const DifferentialSystem& system,
                                           const BoundaryOperator& B, double tol) {
    auto shared = std::make_shared<const DifferentialSystem>(system);
    FundamentalSystem fundamentals(shared, IntegratorOptions::from_tol(tol));
    return characteristic_matrix(fundamentals, B, tol);
}

FredholmReport fredholm_report(const CharacteristicMatrix& M, double rank_tol) {
    const RankAnalysis analysis = analyze(M, rank_tol, 0);
    const Eigen::Index l = M.rows();
    const Eigen::Index rm = M.cols();

    FredholmReport report;
    report.index = static_cast<long>(rm) - static_cast<long>(l);
    report.rank = analysis.rank;
    report.dim_ker = rm - analysis.rank;
    report.dim_coker = l - analysis.rank;
    report.rank_tol = rank_tol;
    report.invertible = (l == rm) && (analysis.rank == rm);
    const auto& sigma = analysis.svd.singularValues();
    report.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
    return report;
}

std::vector<Vector> null_space_basis(const CharacteristicMatrix& M, double rank_tol) {
    const RankAnalysis analysis = analyze(M, rank_tol, Eigen::ComputeFullV);
    const Eigen::Index rm = M.cols();
    std::vector<Vector> basis;
    basis.reserve(static_cast<std::size_t>(rm - analysis.rank));
    for (Eigen::Index j = analysis.rank; j < rm; ++j) {
        Vector q = analysis.svd.matrixV().col(j);
        // Deterministic sign: rotate the largest-magnitude component onto
        // the positive real axis.
        Eigen::Index imax = 0;
        q.cwiseAbs().maxCoeff(&imax);
        const Complex pivot = q(imax);
        if (std::abs(pivot) > 0.0) q *= std::conj(pivot) / std::abs(pivot);
        basis.push_back(std::move(q));
    }
    return basis;
}

std::vector<BvpTrajectory> kernel_basis_functions(const FundamentalSystem& fundamentals,
                                                  const CharacteristicMatrix& M,
                                                  double rank_tol) {
    const DifferentialSystem& sys = fundamentals.system();
    if (M.cols() != sys.companion_dimension() || M.provenance().m != sys.m)
        throw ShapeMismatch("characteristic matrix does not match the system");
    std::vector<BvpTrajectory> kernel;
    for (Vector& q : null_space_basis(M, rank_tol))
        kernel.emplace_back(fundamentals.trajectory(), std::move(q));
    return kernel;
}

std::vector<BvpTrajectory> kernel_basis_functions(const DifferentialSystem& system,
                                                  const BoundaryOperator& B,
                                                  const CharacteristicMatrix& M,
                                                  double rank_tol) {
    if (!B.matches(system))
        throw ValidationError("boundary operator does not match the system shape");
    auto shared = std::make_shared<const DifferentialSystem>(system);
    FundamentalSystem fundamentals(
        shared, IntegratorOptions::from_tol(M.provenance().integrator_tol > 0.0
                                                ? M.provenance().integrator_tol
                                                : 1e-10));
    return kernel_basis_functions(fundamentals, M, rank_tol);
}

}  // namespace bvp
