#pragma once

#include <vector>

#include "bvp/boundary.hpp"
#include "bvp/ode_core.hpp"

namespace bvp {

/// Where a characteristic matrix came from: problem shape plus the
/// tolerances its entries carry.  Hand-built exact matrices use zero
/// tolerances, which makes the rank decision purely relative.
struct MatrixProvenance {
    Eigen::Index m = 0;
    int r = 1;
    Eigen::Index l = 0;
    double integrator_tol = 0.0;
    double quad_tol = 0.0;
};

/// The l x rm matrix M(L,B) = ([BY_1], ..., [BY_r]) whose kernel and
/// cokernel dimensions equal those of the boundary-value problem.
class CharacteristicMatrix {
public:
    CharacteristicMatrix(Matrix data, MatrixProvenance provenance);

    const Matrix& data() const { return data_; }
    const MatrixProvenance& provenance() const { return provenance_; }

    /// [BY_i] for i in 1..r.
    Eigen::Block<const Matrix> block_column(int i) const;

    Eigen::Index rows() const { return data_.rows(); }
    Eigen::Index cols() const { return data_.cols(); }

    /// Singular values below this cannot be distinguished from the noise
    /// the entries carry; rank decisions never count them.
    double noise_floor() const {
        return 100.0 * (provenance_.integrator_tol + provenance_.quad_tol);
    }

private:
    Matrix data_;
    MatrixProvenance provenance_;
};

/// Solvability character of the problem, read off M(L,B):
/// index = rm - l, dim ker = rm - rank, dim coker = l - rank,
/// invertible iff l = rm and M is nonsingular.
struct FredholmReport {
    long index = 0;
    Eigen::Index rank = 0;
    Eigen::Index dim_ker = 0;
    Eigen::Index dim_coker = 0;
    std::vector<double> singular_values;  // descending
    double rank_tol = 0.0;
    bool invertible = false;
};

/// Assembles M(L,B) by applying B to each fundamental solution of the
/// cached companion solve.
CharacteristicMatrix characteristic_matrix(const FundamentalSystem& fundamentals,
                                           const BoundaryOperator& B, double quad_tol);

/// Convenience entry point: one tolerance drives both the integrator and
/// the quadrature.
CharacteristicMatrix characteristic_matrix(const DifferentialSystem& system,
                                           const BoundaryOperator& B, double tol);

/// Rank decision: singular values above
/// max(rank_tol · sigma_max · max(l, rm), noise floor) are counted.
FredholmReport fredholm_report(const CharacteristicMatrix& M, double rank_tol = 1e-10);

/// Orthonormal null-space basis of M under the same thresholding as
/// fredholm_report, with a deterministic sign convention: the
/// largest-magnitude component of each vector is made real positive.
std::vector<Vector> null_space_basis(const CharacteristicMatrix& M, double rank_tol = 1e-10);

/// Kernel of the homogeneous problem, lifted to function space:
/// q ↦ Σ_i Y_i(·) q_i for each null-space vector q of M.
std::vector<BvpTrajectory> kernel_basis_functions(const FundamentalSystem& fundamentals,
                                                  const CharacteristicMatrix& M,
                                                  double rank_tol = 1e-10);

/// Standalone form that performs the fundamental solve itself.
std::vector<BvpTrajectory> kernel_basis_functions(const DifferentialSystem& system,
                                                  const BoundaryOperator& B,
                                                  const CharacteristicMatrix& M,
                                                  double rank_tol = 1e-10);

}  // namespace bvp
