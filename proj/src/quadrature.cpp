#include "bvp/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace bvp::quadrature {

namespace {

// Newton iteration on P_n from the cosine initial guess; standard
// Golub-Welsch-free construction, accurate to machine precision.
Rule build_rule(int n) {
    if (n < 1) throw ValidationError("quadrature rule needs at least one node");
    Rule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence: evaluates P_n(x) and P_n'(x).
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // One clean evaluation at the converged node for the weight.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

struct Budget {
    long evaluations_left;
};

Matrix panel_value(const std::function<Matrix(double)>& f, double a, double b, const Rule& rule,
                   Budget& budget) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Matrix sum;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        if (--budget.evaluations_left < 0)
            throw QuadratureFailure("adaptive quadrature evaluation budget exhausted");
        const Matrix v = f(mid + half * rule.nodes[i]);
        if (i == 0)
            sum = rule.weights[i] * v;
        else
            sum += rule.weights[i] * v;
    }
    return half * sum;
}

Matrix adaptive(const std::function<Matrix(double)>& f, double a, double b, double tol,
                const Rule& rule, const Matrix& whole, int depth, int max_depth,
                Budget& budget) {
    const double mid = 0.5 * (a + b);
    const Matrix left = panel_value(f, a, mid, rule, budget);
    const Matrix right = panel_value(f, mid, b, rule, budget);
    const double err = (left + right - whole).cwiseAbs().maxCoeff();
    if (err <= tol || depth >= max_depth) {
        if (err > tol)
            throw QuadratureFailure("adaptive quadrature did not converge at depth limit");
        return left + right;
    }
    return adaptive(f, a, mid, 0.5 * tol, rule, left, depth + 1, max_depth, budget) +
           adaptive(f, mid, b, 0.5 * tol, rule, right, depth + 1, max_depth, budget);
}

}  // namespace

const Rule& gauss_legendre(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

Matrix fixed_panel(const std::function<Matrix(double)>& f, double a, double b, int n) {
    Budget budget{static_cast<long>(n) + 1};
    return panel_value(f, a, b, gauss_legendre(n), budget);
}

Matrix integrate(const std::function<Matrix(double)>& f, double a, double b, double tol,
                 int panel_nodes, int max_depth) {
    if (!(tol > 0.0)) throw ValidationError("quadrature tolerance must be positive");
    if (a == b) {
        const Matrix probe = f(a);
        return Matrix::Zero(probe.rows(), probe.cols());
    }
    const double sign = a < b ? 1.0 : -1.0;
    const double lo = std::min(a, b), hi = std::max(a, b);
    const Rule& rule = gauss_legendre(panel_nodes);
    Budget budget{20'000'000};
    const Matrix whole = panel_value(f, lo, hi, rule, budget);
    return sign * adaptive(f, lo, hi, tol, rule, whole, 0, max_depth, budget);
}

}  // namespace bvp::quadrature
