#include "bvp/ode_core.hpp"

#include <utility>

namespace bvp {

namespace {

// Row s of Pascal's triangle as doubles: C(s, 0) ... C(s, s).
std::vector<double> binomial_row(int s) {
    std::vector<double> row(static_cast<std::size_t>(s) + 1, 1.0);
    for (int q = 1; q <= s; ++q) row[q] = row[q - 1] * (s - q + 1) / q;
    return row;
}

// |y^(r) + sum_k A_k(t) y^(k) - f(t)|_max at one point, with the companion
// state X = col(y, ..., y^(r-1)) and its interpolant time-derivative Xdot.
double l_residual_at(const DifferentialSystem& sys, double t, const Matrix& X,
                     const Matrix& Xdot, const Matrix& f_value) {
    const Eigen::Index m = sys.m;
    Matrix res = Xdot.bottomRows(m);
    for (int k = 0; k < sys.r; ++k)
        res += sys.coefficient(k, t) * X.middleRows(k * m, m);
    res -= f_value;
    return res.cwiseAbs().maxCoeff();
}

std::vector<double> uniform_grid(const Interval& iv, int points) {
    if (points < 2) throw ValidationError("residual grid needs at least 2 points");
    std::vector<double> ts(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        ts[static_cast<std::size_t>(i)] = iv.a + (iv.b - iv.a) * i / (points - 1);
    ts.back() = iv.b;
    return ts;
}

}  // namespace

CompanionTrajectory::CompanionTrajectory(std::shared_ptr<const DifferentialSystem> system,
                                         DenseOutput dense,
                                         std::optional<CoefficientFunction> rhs)
    : system_(std::move(system)), dense_(std::move(dense)), rhs_(std::move(rhs)),
      q_(dense_.cols()) {
    if (!system_) throw ValidationError("companion trajectory needs a system");
    if (dense_.rows() != system_->companion_dimension())
        throw ShapeMismatch("dense output rows do not match companion dimension");
    if (rhs_) {
        if (rhs_->rows() != system_->m || rhs_->cols() != q_)
            throw ShapeMismatch("right-hand side shape does not match trajectory");
        if (rhs_->max_derivative() < system_->n)
            throw ValidationError("right-hand side must supply n derivatives");
    }
}

Matrix CompanionTrajectory::derivative(double t, int order) const {
    if (order < 0) throw ValidationError("derivative order must be non-negative");
    if (order > max_order())
        throw OrderUnavailable("derivative order " + std::to_string(order) +
                               " exceeds available smoothness " + std::to_string(max_order()));
    const Eigen::Index m = system_->m;
    const int r = system_->r;
    const Matrix X = dense_.value(t);
    if (order < r) return X.middleRows(order * m, m);

    // Differentiate the ODE s = order - r times (Leibniz in the coefficients).
    std::vector<Matrix> ys(static_cast<std::size_t>(order) + 1);
    for (int j = 0; j < r; ++j) ys[static_cast<std::size_t>(j)] = X.middleRows(j * m, m);
    for (int s = 0; s <= order - r; ++s) {
        Matrix next = rhs_ ? rhs_->derivative(t, s) : Matrix::Zero(m, q_);
        const auto binom = binomial_row(s);
        for (int k = 0; k < r; ++k) {
            for (int q = 0; q <= s; ++q) {
                next.noalias() -= binom[static_cast<std::size_t>(q)] *
                                  system_->coefficient_derivative(k, t, q) *
                                  ys[static_cast<std::size_t>(k + s - q)];
            }
        }
        ys[static_cast<std::size_t>(r + s)] = std::move(next);
    }
    return ys[static_cast<std::size_t>(order)];
}

FundamentalSolution::FundamentalSolution(std::shared_ptr<const CompanionTrajectory> full,
                                         int index)
    : full_(std::move(full)), index_(index) {
    if (!full_) throw ValidationError("fundamental solution needs a companion trajectory");
    const int r = full_->system().r;
    if (index_ < 1 || index_ > r)
        throw ValidationError("fundamental solution index must lie in 1.." + std::to_string(r));
    if (full_->cols() != full_->system().companion_dimension())
        throw ShapeMismatch("fundamental solve must have rm columns");
}

Matrix FundamentalSolution::derivative(double t, int order) const {
    const Eigen::Index m = full_->system().m;
    return full_->derivative(t, order).middleCols((index_ - 1) * m, m);
}

FundamentalSystem::FundamentalSystem(std::shared_ptr<const DifferentialSystem> system,
                                     const IntegratorOptions& opts)
    : options_(opts) {
    if (!system) throw ValidationError("fundamental system needs a differential system");
    CompanionSystem companion(system);
    const Eigen::Index dim = companion.dimension();
    DenseOutput dense =
        solve_matrix_cauchy(companion, Matrix::Identity(dim, dim), opts);
    trajectory_ = std::make_shared<const CompanionTrajectory>(system, std::move(dense));
}

FundamentalSolution FundamentalSystem::solution(int index) const {
    return FundamentalSolution(trajectory_, index);
}

std::vector<FundamentalSolution> FundamentalSystem::solutions() const {
    std::vector<FundamentalSolution> out;
    out.reserve(static_cast<std::size_t>(system().r));
    for (int i = 1; i <= system().r; ++i) out.emplace_back(trajectory_, i);
    return out;
}

BvpTrajectory::BvpTrajectory(std::shared_ptr<const CompanionTrajectory> fundamental, Vector q,
                             std::shared_ptr<const CompanionTrajectory> particular)
    : fundamental_(std::move(fundamental)), q_(std::move(q)),
      particular_(std::move(particular)) {
    if (!fundamental_) throw ValidationError("trajectory needs a fundamental solve");
    if (fundamental_->cols() != fundamental_->system().companion_dimension())
        throw ShapeMismatch("fundamental solve must have rm columns");
    if (q_.size() != fundamental_->cols())
        throw ShapeMismatch("coefficient vector must have rm entries");
    if (particular_) {
        if (particular_->cols() != 1)
            throw ShapeMismatch("particular solution must be a single column");
        if (particular_->rows() != fundamental_->rows())
            throw ShapeMismatch("particular solution row count mismatch");
    }
}

Matrix BvpTrajectory::derivative(double t, int order) const {
    Matrix out = fundamental_->derivative(t, order) * q_;
    if (particular_) out += particular_->derivative(t, order);
    return out;
}

Vector BvpTrajectory::state(double t) const {
    Vector out = fundamental_->state(t) * q_;
    if (particular_) out += particular_->state(t);
    return out;
}

Vector BvpTrajectory::state_derivative(double t) const {
    Vector out = fundamental_->state_derivative(t) * q_;
    if (particular_) out += particular_->state_derivative(t);
    return out;
}

const std::optional<CoefficientFunction>& BvpTrajectory::rhs() const {
    static const std::optional<CoefficientFunction> none;
    return particular_ ? particular_->rhs() : none;
}

DenseOutput solve_matrix_cauchy(const CompanionSystem& companion, const Matrix& initial,
                                const IntegratorOptions& opts) {
    if (initial.rows() != companion.dimension())
        throw ShapeMismatch("initial state rows must equal the companion dimension");
    auto rhs = [&companion](double t, const Matrix& x) -> Matrix {
        return -(companion.eval(t) * x);
    };
    return integrate_dopri5(rhs, companion.interval(), initial, opts);
}

DenseOutput solve_matrix_cauchy(const CompanionSystem& companion, const Matrix& initial,
                                double tol) {
    return solve_matrix_cauchy(companion, initial, IntegratorOptions::from_tol(tol));
}

std::vector<FundamentalSolution> fundamental_solutions(const DifferentialSystem& system,
                                                       double tol) {
    auto shared = std::make_shared<const DifferentialSystem>(system);
    return FundamentalSystem(shared, IntegratorOptions::from_tol(tol)).solutions();
}

CompanionTrajectory solve_inhomogeneous_cauchy(std::shared_ptr<const DifferentialSystem> system,
                                               const CoefficientFunction& f,
                                               const Vector& initial,
                                               const IntegratorOptions& opts) {
    if (!system) throw ValidationError("inhomogeneous solve needs a differential system");
    if (f.rows() != system->m || f.cols() != 1)
        throw ShapeMismatch("right-hand side must be an m x 1 function");
    if (f.max_derivative() < system->n)
        throw ValidationError("right-hand side must supply n derivatives");
    CompanionSystem companion(system);
    const Eigen::Index dim = companion.dimension();
    if (initial.size() != dim)
        throw ShapeMismatch("initial state must have rm entries");
    const Eigen::Index m = system->m;
    auto rhs = [&companion, &f, dim, m](double t, const Matrix& x) -> Matrix {
        Matrix out = -(companion.eval(t) * x);
        out.bottomRows(m) += f.eval(t);
        return out;
    };
    DenseOutput dense = integrate_dopri5(rhs, companion.interval(), initial, opts);
    return CompanionTrajectory(std::move(system), std::move(dense), f);
}

double max_ode_residual(const CompanionTrajectory& traj, int grid_points) {
    const DifferentialSystem& sys = traj.system();
    const Matrix zero = Matrix::Zero(sys.m, traj.cols());
    double worst = 0.0;
    for (double t : uniform_grid(sys.interval, grid_points)) {
        const Matrix f_value = traj.rhs() ? traj.rhs()->eval(t) : zero;
        worst = std::max(worst, l_residual_at(sys, t, traj.state(t),
                                              traj.state_derivative(t), f_value));
    }
    return worst;
}

double max_ode_residual(const BvpTrajectory& y, int grid_points) {
    const DifferentialSystem& sys = y.system();
    const Matrix zero = Matrix::Zero(sys.m, 1);
    double worst = 0.0;
    for (double t : uniform_grid(sys.interval, grid_points)) {
        const Matrix f_value = y.rhs() ? y.rhs()->eval(t) : zero;
        worst = std::max(worst, l_residual_at(sys, t, y.state(t),
                                              y.state_derivative(t), f_value));
    }
    return worst;
}

}  // namespace bvp
