#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <variant>
#include <vector>

#include "bvp/errors.hpp"

namespace bvp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Finite interval [a, b], a < b.
struct Interval {
    double a = 0.0;
    double b = 1.0;

    Interval() = default;
    Interval(double a_, double b_);

    double length() const { return b - a; }
    bool contains(double t) const { return t >= a && t <= b; }
};

/// Matrix-valued function on [a, b] with analytic derivatives.
///
/// Three representations are supported:
///   - Constant: a fixed matrix, derivatives of any order available;
///   - Polynomial: coefficients of powers of (t - a), exact derivatives;
///   - Sampled: values on a grid, locally interpolated by a polynomial of
///     the given order; derivatives available up to order - 1 only, and
///     requesting more is an error rather than a silent fallback.
class CoefficientFunction {
public:
    struct Constant {
        Matrix value;
    };
    struct Polynomial {
        std::vector<Matrix> coefficients;  // of (t-a)^0, (t-a)^1, ...
        double base = 0.0;                 // the interval's left endpoint a
    };
    struct Sampled {
        std::vector<double> points;  // strictly increasing, spanning [a,b]
        std::vector<Matrix> values;
        int order = 3;  // local interpolation polynomial degree
    };

    static CoefficientFunction constant(Matrix value);
    static CoefficientFunction polynomial(std::vector<Matrix> coefficients, double base);
    static CoefficientFunction sampled(std::vector<double> points, std::vector<Matrix> values,
                                       int order);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

    /// Highest derivative order with analytic meaning. Unbounded
    /// (represented by a large sentinel) for Constant and Polynomial.
    int max_derivative() const { return max_derivative_; }

    Matrix eval(double t) const { return derivative(t, 0); }
    Matrix derivative(double t, int order) const;

    bool is_constant() const { return std::holds_alternative<Constant>(rep_); }

    const std::variant<Constant, Polynomial, Sampled>& representation() const { return rep_; }

    /// Entrywise sum with a constant matrix (used by perturbation families).
    CoefficientFunction shifted_by(const Matrix& delta) const;

private:
    CoefficientFunction(std::variant<Constant, Polynomial, Sampled> rep);

    std::variant<Constant, Polynomial, Sampled> rep_;
    Eigen::Index rows_ = 0, cols_ = 0;
    int max_derivative_ = 0;
};

/// Practically unbounded derivative order for exact representations.
inline constexpr int kUnlimitedDerivatives = 1 << 20;

/// The differential expression (Ly)(t) = y^(r)(t) + sum_j A_{r-j}(t) y^(r-j)(t)
/// on an interval, with system dimension m, order r, and smoothness index n.
///
/// `coefficients[k]` is A_k, the matrix multiplying y^(k); there are exactly
/// r of them, each m x m, and each must support at least n derivatives.
struct DifferentialSystem {
    Interval interval;
    int m = 1;
    int r = 1;
    int n = 0;
    std::vector<CoefficientFunction> coefficients;  // A_0, ..., A_{r-1}

    DifferentialSystem(Interval interval_, int m_, int r_, int n_,
                       std::vector<CoefficientFunction> coefficients_);

    int companion_dimension() const { return r * m; }

    /// A_k(t), the coefficient of y^(k).
    Matrix coefficient(int k, double t) const { return coefficients.at(k).eval(t); }
    Matrix coefficient_derivative(int k, double t, int order) const {
        return coefficients.at(k).derivative(t, order);
    }
};

/// First-order reduction x' + K(t) x = g of an order-r system, where
/// x = col(y, y', ..., y^(r-1)).  K has -I_m on the block superdiagonal and
/// (A_0, ..., A_{r-1}) in the last block row; for r = 1 it is just A_0.
class CompanionSystem {
public:
    explicit CompanionSystem(std::shared_ptr<const DifferentialSystem> system);

    int dimension() const { return dimension_; }
    const DifferentialSystem& system() const { return *system_; }
    std::shared_ptr<const DifferentialSystem> system_ptr() const { return system_; }
    Interval interval() const { return system_->interval; }

    Matrix eval(double t) const;

private:
    std::shared_ptr<const DifferentialSystem> system_;
    int dimension_;
};

CompanionSystem build_companion(std::shared_ptr<const DifferentialSystem> system);
CompanionSystem build_companion(const DifferentialSystem& system);

}  // namespace bvp
