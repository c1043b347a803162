#include "bvp/system.hpp"

#include <algorithm>
#include <cmath>

namespace bvp {

Interval::Interval(double a_, double b_) : a(a_), b(b_) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw ValidationError("interval requires finite endpoints with a < b");
    }
}

namespace {

void require_same_shape(const std::vector<Matrix>& ms, const char* what) {
    if (ms.empty()) throw ValidationError(std::string(what) + ": empty matrix list");
    for (const auto& m : ms) {
        if (m.rows() != ms.front().rows() || m.cols() != ms.front().cols()) {
            throw ValidationError(std::string(what) + ": inconsistent matrix shapes");
        }
    }
}

}  // namespace

CoefficientFunction::CoefficientFunction(std::variant<Constant, Polynomial, Sampled> rep)
    : rep_(std::move(rep)) {
    if (auto* c = std::get_if<Constant>(&rep_)) {
        rows_ = c->value.rows();
        cols_ = c->value.cols();
        max_derivative_ = kUnlimitedDerivatives;
    } else if (auto* p = std::get_if<Polynomial>(&rep_)) {
        require_same_shape(p->coefficients, "polynomial coefficient");
        rows_ = p->coefficients.front().rows();
        cols_ = p->coefficients.front().cols();
        max_derivative_ = kUnlimitedDerivatives;
    } else {
        auto& s = std::get<Sampled>(rep_);
        require_same_shape(s.values, "sampled value");
        if (s.points.size() != s.values.size()) {
            throw ValidationError("sampled function: points/values size mismatch");
        }
        if (s.order < 1 || static_cast<std::size_t>(s.order) + 1 > s.points.size()) {
            throw ValidationError("sampled function: interpolation order needs order+1 points");
        }
        if (!std::is_sorted(s.points.begin(), s.points.end()) ||
            std::adjacent_find(s.points.begin(), s.points.end()) != s.points.end()) {
            throw ValidationError("sampled function: points must be strictly increasing");
        }
        rows_ = s.values.front().rows();
        cols_ = s.values.front().cols();
        max_derivative_ = s.order - 1;
    }
    if (rows_ == 0 || cols_ == 0) throw ValidationError("coefficient function: empty matrix");
}

CoefficientFunction CoefficientFunction::constant(Matrix value) {
    return CoefficientFunction(Constant{std::move(value)});
}

CoefficientFunction CoefficientFunction::polynomial(std::vector<Matrix> coefficients,
                                                    double base) {
    return CoefficientFunction(Polynomial{std::move(coefficients), base});
}

CoefficientFunction CoefficientFunction::sampled(std::vector<double> points,
                                                 std::vector<Matrix> values, int order) {
    return CoefficientFunction(Sampled{std::move(points), std::move(values), order});
}

namespace {

// Newton-form interpolation through points[w..w+d] of per-entry divided
// differences, evaluated together with derivatives 0..max_order at t.
Matrix sampled_derivative(const CoefficientFunction::Sampled& s, double t, int order) {
    const int d = s.order;
    const auto n = static_cast<int>(s.points.size());

    // window of d+1 nodes nearest to t
    int idx = static_cast<int>(std::lower_bound(s.points.begin(), s.points.end(), t) -
                               s.points.begin());
    int w = std::clamp(idx - (d + 1) / 2, 0, n - (d + 1));

    // divided-difference table, per matrix entry
    std::vector<Matrix> dd(s.values.begin() + w, s.values.begin() + w + d + 1);
    for (int level = 1; level <= d; ++level) {
        for (int i = d; i >= level; --i) {
            dd[i] = (dd[i] - dd[i - 1]) / (s.points[w + i] - s.points[w + i - level]);
        }
    }

    // Horner evaluation of the Newton form and its derivatives:
    // p(t) = dd[0] + (t-x0)(dd[1] + (t-x1)(...)), run `order` nested passes.
    std::vector<Matrix> der(order + 1,
                            Matrix::Zero(s.values.front().rows(), s.values.front().cols()));
    der[0] = dd[d];
    for (int i = d - 1; i >= 0; --i) {
        const double dt = t - s.points[w + i];
        for (int k = std::min(order, d - i); k >= 1; --k) {
            der[k] = der[k] * dt + der[k - 1] * static_cast<double>(k);
        }
        der[0] = der[0] * dt + dd[i];
    }
    return der[order];
}

}  // namespace

Matrix CoefficientFunction::derivative(double t, int order) const {
    if (order < 0) throw OrderUnavailable("negative derivative order");
    if (order > max_derivative_) {
        throw OrderUnavailable("coefficient derivative order " + std::to_string(order) +
                               " exceeds available order " + std::to_string(max_derivative_));
    }
    if (auto* c = std::get_if<Constant>(&rep_)) {
        if (order == 0) return c->value;
        return Matrix::Zero(rows_, cols_);
    }
    if (auto* p = std::get_if<Polynomial>(&rep_)) {
        const auto deg = static_cast<int>(p->coefficients.size()) - 1;
        if (order > deg) return Matrix::Zero(rows_, cols_);
        // d^k/dt^k sum c_j (t-a)^j = sum_{j>=k} c_j j!/(j-k)! (t-a)^{j-k}, by Horner
        Matrix acc = Matrix::Zero(rows_, cols_);
        const double x = t - p->base;
        for (int j = deg; j >= order; --j) {
            double fall = 1.0;
            for (int q = 0; q < order; ++q) fall *= static_cast<double>(j - q);
            acc = acc * x + fall * p->coefficients[static_cast<std::size_t>(j)];
        }
        return acc;
    }
    return sampled_derivative(std::get<Sampled>(rep_), t, order);
}

CoefficientFunction CoefficientFunction::shifted_by(const Matrix& delta) const {
    if (delta.rows() != rows_ || delta.cols() != cols_) {
        throw ValidationError("shifted_by: shape mismatch");
    }
    if (auto* c = std::get_if<Constant>(&rep_)) {
        return constant(c->value + delta);
    }
    if (auto* p = std::get_if<Polynomial>(&rep_)) {
        auto coeffs = p->coefficients;
        coeffs[0] += delta;
        return polynomial(std::move(coeffs), p->base);
    }
    const auto& s = std::get<Sampled>(rep_);
    auto values = s.values;
    for (auto& v : values) v += delta;
    return sampled(s.points, std::move(values), s.order);
}

DifferentialSystem::DifferentialSystem(Interval interval_, int m_, int r_, int n_,
                                       std::vector<CoefficientFunction> coefficients_)
    : interval(interval_), m(m_), r(r_), n(n_), coefficients(std::move(coefficients_)) {
    if (m < 1 || r < 1 || n < 0) {
        throw ValidationError("differential system requires m >= 1, r >= 1, n >= 0");
    }
    if (static_cast<int>(coefficients.size()) != r) {
        throw ValidationError("differential system requires exactly r coefficient functions");
    }
    for (const auto& c : coefficients) {
        if (c.rows() != m || c.cols() != m) {
            throw ValidationError("coefficient matrices must be m x m");
        }
        if (c.max_derivative() < n) {
            throw ValidationError("coefficient must support at least n derivatives");
        }
    }
}

CompanionSystem::CompanionSystem(std::shared_ptr<const DifferentialSystem> system)
    : system_(std::move(system)), dimension_(system_->companion_dimension()) {}

Matrix CompanionSystem::eval(double t) const {
    const int m = system_->m;
    const int r = system_->r;
    if (r == 1) return system_->coefficient(0, t);

    Matrix K = Matrix::Zero(dimension_, dimension_);
    for (int j = 0; j + 1 < r; ++j) {
        K.block(j * m, (j + 1) * m, m, m) = -Matrix::Identity(m, m);
    }
    for (int j = 0; j < r; ++j) {
        K.block((r - 1) * m, j * m, m, m) = system_->coefficient(j, t);
    }
    return K;
}

CompanionSystem build_companion(std::shared_ptr<const DifferentialSystem> system) {
    return CompanionSystem(std::move(system));
}

CompanionSystem build_companion(const DifferentialSystem& system) {
    return CompanionSystem(std::make_shared<const DifferentialSystem>(system));
}

}  // namespace bvp
