#pragma once

#include <functional>
#include <vector>

#include "bvp/errors.hpp"
#include "bvp/system.hpp"

namespace bvp::quadrature {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes/weights for an n-point rule (cached; thread-safe).
const Rule& gauss_legendre(int n);

/// Single-panel n-point Gauss-Legendre approximation of ∫_a^b f.
Matrix fixed_panel(const std::function<Matrix(double)>& f, double a, double b, int n);

/// Adaptive composite Gauss-Legendre integration of a matrix-valued
/// integrand.  A panel is accepted when bisecting it changes the result by
/// at most the panel's share of `tol` (measured entrywise); otherwise it is
/// split.  Throws QuadratureFailure when the split budget is exhausted.
Matrix integrate(const std::function<Matrix(double)>& f, double a, double b, double tol,
                 int panel_nodes = 32, int max_depth = 48);

}  // namespace bvp::quadrature
