#include "bvp/limits.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "bvp/quadrature.hpp"

namespace bvp {

namespace {

bool same_shape(const DifferentialSystem& a, const DifferentialSystem& b) {
    return a.m == b.m && a.r == b.r && a.n == b.n &&
           std::abs(a.interval.a - b.interval.a) < 1e-12 &&
           std::abs(a.interval.b - b.interval.b) < 1e-12;
}

// ||y^(k)||_p summed over matrix entries, one derivative order at a time.
double entrywise_lp(const Trajectory& y, int k, double p, int grid_points,
                    double quad_tol) {
    const Interval iv = y.interval();
    if (std::isinf(p)) {
        Eigen::MatrixXd running = Eigen::MatrixXd::Zero(y.rows(), y.cols());
        for (int i = 0; i < grid_points; ++i) {
            const double t = iv.a + (iv.b - iv.a) * i / (grid_points - 1);
            running = running.cwiseMax(y.derivative(t, k).cwiseAbs());
        }
        return running.sum();
    }
    auto integrand = [&](double t) -> Matrix {
        return y.derivative(t, k).cwiseAbs().array().pow(p).matrix().cast<Complex>();
    };
    const Matrix powers = quadrature::integrate(integrand, iv.a, iv.b, quad_tol);
    return powers.real().cwiseMax(0.0).array().pow(1.0 / p).sum();
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    const double n = static_cast<double>(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / denom;
}

}  // namespace

double sobolev_norm(const Trajectory& y, const SobolevNorm& norm, double quad_tol) {
    if (norm.n < 0) throw ValidationError("Sobolev order must be >= 0");
    if (!(norm.p >= 1.0)) throw ValidationError("Sobolev exponent must satisfy p >= 1");
    if (norm.grid_points < 2) throw ValidationError("Sobolev grid needs >= 2 points");
    if (norm.n > y.max_order())
        throw OrderUnavailable("trajectory does not supply the derivatives the norm needs");
    double total = 0.0;
    for (int k = 0; k <= norm.n; ++k)
        total += entrywise_lp(y, k, norm.p, norm.grid_points, quad_tol);
    return total;
}

ConvergenceReport run_sequence(const PerturbationSequence& seq, const SobolevNorm& norm,
                               double tol, const SolverOptions& options) {
    if (!seq.base_system) throw ValidationError("perturbation sequence needs a base system");
    if (!seq.member) throw ValidationError("perturbation sequence needs a member generator");
    if (seq.k_values.empty()) throw ValidationError("perturbation sequence needs k values");

    const DifferentialSystem& base = *seq.base_system;
    FundamentalSystem base_fs(seq.base_system, options.integrator);
    const CharacteristicMatrix base_M =
        characteristic_matrix(base_fs, seq.base_operator, options.quad_tol);
    const FredholmReport base_report = fredholm_report(base_M, options.rank_tol);

    ConvergenceReport report;
    report.rank_base = base_report.rank;
    report.dim_ker_base = base_report.dim_ker;
    report.dim_coker_base = base_report.dim_coker;
    report.base_singular_values = base_report.singular_values;
    report.convergence_tol = tol;

    const SobolevNorm coeff_norm{base.n, norm.p, norm.grid_points};
    const SobolevNorm sol_norm{base.n + base.r, norm.p, norm.grid_points};
    auto base_solutions = base_fs.solutions();

    for (int k : seq.k_values) {
        auto [system_k, operator_k] = seq.member(k);
        if (!system_k || !same_shape(*system_k, base))
            throw ValidationError("sequence member does not share the base problem shape");
        if (operator_k.l() != seq.base_operator.l())
            throw ValidationError("sequence member changes the number of conditions");

        ConvergenceRow row;
        row.k = k;

        for (int j = 0; j < base.r; ++j) {
            const DifferentialSystem* sys_k = system_k.get();
            const DifferentialSystem* sys_0 = &base;
            FunctionTrajectory diff(
                [sys_k, sys_0, j](double t, int order) -> Matrix {
                    return sys_k->coefficient_derivative(j, t, order) -
                           sys_0->coefficient_derivative(j, t, order);
                },
                base.m, base.m, base.n, base.interval);
            row.coeff_norm_gaps.push_back(sobolev_norm(diff, coeff_norm, options.quad_tol));
        }

        FundamentalSystem fs_k(system_k, options.integrator);
        for (int i = 1; i <= base.r; ++i) {
            FundamentalSolution yk = fs_k.solution(i);
            FundamentalSolution y0 = base_solutions[static_cast<std::size_t>(i - 1)];
            FunctionTrajectory diff(
                [yk, y0](double t, int order) -> Matrix {
                    return yk.derivative(t, order) - y0.derivative(t, order);
                },
                base.m, base.m, base.n + base.r, base.interval);
            row.fundsol_gaps.push_back(sobolev_norm(diff, sol_norm, options.quad_tol));
        }

        const CharacteristicMatrix Mk =
            characteristic_matrix(fs_k, operator_k, options.quad_tol);
        row.char_matrix_gap = (Mk.data() - base_M.data()).norm();
        const FredholmReport rk = fredholm_report(Mk, options.rank_tol);
        row.rank_k = rk.rank;
        row.dim_ker_k = rk.dim_ker;
        row.dim_coker_k = rk.dim_coker;
        row.index_k = rk.index;
        report.rows.push_back(std::move(row));
    }

    report.matrices_converge = report.rows.back().char_matrix_gap <= tol &&
                               report.rows.back().char_matrix_gap <=
                                   report.rows.front().char_matrix_gap;

    // Lower semicontinuity of rank: once ||M_k - M|| < sigma_rho/2, no kept
    // singular value of M can have been pushed below sigma_rho/2, so
    // rank_k >= rank must hold from that member on.
    const double sigma_rho =
        base_report.rank > 0
            ? base_report.singular_values[static_cast<std::size_t>(base_report.rank - 1)]
            : 0.0;
    bool holds = true;
    bool reached = false;
    for (const ConvergenceRow& row : report.rows) {
        if (!reached && row.char_matrix_gap < 0.5 * sigma_rho) reached = true;
        if (reached && row.rank_k < report.rank_base) holds = false;
    }
    report.semicontinuity_holds = holds;

    std::vector<std::pair<double, double>> fit_points;
    for (const ConvergenceRow& row : report.rows)
        if (row.k > 0 && row.char_matrix_gap > 0.0)
            fit_points.emplace_back(std::log(static_cast<double>(row.k)),
                                    std::log(row.char_matrix_gap));
    report.fitted_rate = fit_points.size() >= 4
                             ? fit_loglog_slope(fit_points)
                             : std::numeric_limits<double>::quiet_NaN();
    return report;
}

InstabilityDemo finite_rank_instability_demo(const DifferentialSystem& system,
                                             const BoundaryOperator& B, double epsilon,
                                             const SolverOptions& options) {
    if (!(epsilon > 0.0)) throw ValidationError("perturbation size must be positive");
    auto shared = std::make_shared<const DifferentialSystem>(system);
    FundamentalSystem fundamentals(shared, options.integrator);
    const CharacteristicMatrix M =
        characteristic_matrix(fundamentals, B, options.quad_tol);
    const FredholmReport before = fredholm_report(M, options.rank_tol);

    if (before.rank == std::min(M.rows(), M.cols()))
        throw NotApplicable("characteristic matrix already has full rank; no rank-one "
                            "perturbation can raise it");

    // First discarded singular pair of M: adding eps·u v^H raises the rank
    // by exactly one, and the boundary realization below reproduces that
    // matrix perturbation without error, because Y_i^(s-1)(a) = delta_si I.
    Eigen::JacobiSVD<Matrix> svd(M.data(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector u = svd.matrixU().col(before.rank);
    const Vector v = svd.matrixV().col(before.rank);

    std::vector<BoundaryTerm> terms = B.terms();
    const Eigen::Index m = system.m;
    for (int s = 1; s <= system.r; ++s) {
        const Matrix alpha =
            epsilon * u * v.segment((s - 1) * m, m).adjoint();
        terms.push_back(PointTerm{system.interval.a, static_cast<double>(s - 1), alpha});
    }
    const BoundaryOperator perturbed(B.interval(), B.signature(), B.l(), std::move(terms));

    const CharacteristicMatrix M_after =
        characteristic_matrix(fundamentals, perturbed, options.quad_tol);
    const FredholmReport after = fredholm_report(M_after, options.rank_tol);

    InstabilityDemo demo;
    demo.before = before;
    demo.after = after;
    demo.matrix_before = M.data();
    demo.matrix_after = M_after.data();
    demo.epsilon = epsilon;
    return demo;
}

}  // namespace bvp
