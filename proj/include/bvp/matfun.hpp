#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "bvp/errors.hpp"
#include "bvp/system.hpp"

namespace bvp::matfun {

enum class Method { EigenDecomposition, HermiteInterpolation, PowerSeries, ScalingSquaring };

/// Value of a matrix function together with how it was obtained.  For the
/// interpolation path the Newton-form polynomial is exposed so its degree
/// (<= m-1) can be audited.
struct MatrixFunctionResult {
    Matrix value;
    Method method;
    double condition_estimate;
    std::vector<Complex> newton_coefficients;  // empty for series methods
    std::vector<Complex> newton_nodes;
};

/// exp(s·A) by Pade scaling-and-squaring.
Matrix matrix_exponential(const Matrix& A, double s);

/// φ(A, t) with φ(λ, t) = (1 - exp(-λ(t-a)))/λ, entire in λ; evaluated as
/// (t-a)·ψ(-A(t-a)) with ψ(X) = Σ X^k/(k+1)!, so singular A needs no
/// special casing.
Matrix phi_function(const Matrix& A, double t, double a);

/// C = cos(√A s) and S = (√A)^{-1} sin(√A s) in their even/odd power-series
/// forms (both entire in A, no square-root branch involved): these are the
/// two fundamental solutions of Y'' + AY = 0 at s = t - a.
std::pair<Matrix, Matrix> sqrt_trig(const Matrix& A, double s);

/// f(A) via the Lagrange-Sylvester (confluent Hermite) interpolation
/// polynomial on the spectrum of A.  `f(lambda, k)` must return the k-th
/// derivative of f at lambda; derivatives up to the largest eigenvalue
/// cluster size minus one are requested.
MatrixFunctionResult lagrange_sylvester(const std::function<Complex(Complex, int)>& f,
                                        const Matrix& A);

/// A fractional-order point term of the multipoint boundary operator:
/// alpha · (D^order y)(point), order >= 0 and possibly non-integer.
struct FractionalTerm {
    double point;
    double order;
    Matrix alpha;
};

/// Data for the five closed-form model problems:
///   1: y' + Ay,  B = Σ alpha_k y^(k)(a)                 -> Σ alpha_k (-A)^k
///   2: y' (A=O), multipoint fractional conditions        -> Σ of order-0 alphas
///   3: y'' + Ay', B = Σ alpha_k y^(k)(a) + beta_k y^(k)(b)
///   4: y'' + Ay,  same B shape
///   5: y' (A=O), arbitrary B with constant coefficient alpha_0 -> alpha_0
struct ExampleParams {
    Matrix A;                   // examples 1, 3, 4
    std::vector<Matrix> alpha;  // left-endpoint matrices by order (1, 3, 4, 5)
    std::vector<Matrix> beta;   // right-endpoint matrices (3, 4); empty = one-point
    Interval interval{0.0, 1.0};
    std::vector<FractionalTerm> fractional_terms;  // example 2
};

/// The closed-form characteristic matrix of the chosen model problem,
/// assembled from this module's matrix functions only (no ODE solves).
Matrix oracle_characteristic_matrix(int example_id, const ExampleParams& params);

}  // namespace bvp::matfun
