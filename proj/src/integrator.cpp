#include "bvp/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bvp {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - bhat (error estimator weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double scaled_rms(const Matrix& err, const Matrix& y0, const Matrix& y1, double atol,
                  double rtol) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < err.size(); ++j) {
        const double sc =
            atol + rtol * std::max(std::abs(y0.reshaped()(j)), std::abs(y1.reshaped()(j)));
        const double q = std::abs(err.reshaped()(j)) / sc;
        sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

double initial_step(const std::function<Matrix(double, const Matrix&)>& rhs, double t0,
                    const Matrix& y0, const Matrix& f0, double span, double atol, double rtol) {
    auto norm = [&](const Matrix& v, const Matrix& ref) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < v.size(); ++j) {
            const double sc = atol + rtol * std::abs(ref.reshaped()(j));
            const double q = std::abs(v.reshaped()(j)) / sc;
            sum += q * q;
        }
        return std::sqrt(sum / static_cast<double>(v.size()));
    };
    const double dn0 = norm(y0, y0);
    const double dn1 = norm(f0, y0);
    double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    h0 = std::min(h0, span);
    const Matrix y1 = y0 + h0 * f0;
    const Matrix f1 = rhs(t0 + h0, y1);
    const double dn2 = norm(f1 - f0, y0) / h0;
    double h1;
    if (std::max(dn1, dn2) <= 1e-15) {
        h1 = std::max(1e-6, h0 * 1e-3);
    } else {
        h1 = std::pow(0.01 / std::max(dn1, dn2), 0.2);
    }
    return std::min({100.0 * h0, h1, span});
}

}  // namespace

DenseOutput::DenseOutput(Interval interval, Eigen::Index rows, Eigen::Index cols,
                         std::vector<Step> steps)
    : interval_(interval), rows_(rows), cols_(cols), steps_(std::move(steps)) {}

const DenseOutput::Step& DenseOutput::locate(double t) const {
    if (!interval_.contains(t)) {
        throw DomainError("dense output evaluated outside its interval");
    }
    // first step whose start lies strictly past t, then back up one
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double v, const Step& s) { return v < s.t0; });
    if (it != steps_.begin()) --it;
    return *it;
}

Matrix DenseOutput::value(double t) const {
    const Step& s = locate(t);
    const double theta = (t - s.t0) / s.h;
    if (theta == 0.0) return s.c1;
    const double th1 = 1.0 - theta;
    return s.c1 + theta * (s.c2 + th1 * (s.c3 + theta * (s.c4 + th1 * s.c5)));
}

Matrix DenseOutput::derivative(double t) const {
    const Step& s = locate(t);
    const double theta = (t - s.t0) / s.h;
    const double th1 = 1.0 - theta;
    // d/dtheta of c1 + th(c2 + th1(c3 + th(c4 + th1 c5)))
    Matrix inner = s.c4 + th1 * s.c5;
    Matrix dinner = -s.c5;
    Matrix mid = s.c3 + theta * inner;
    Matrix dmid = inner + theta * dinner;
    return (s.c2 + th1 * mid + theta * (-mid + th1 * dmid)) / s.h;
}

DenseOutput integrate_dopri5(const std::function<Matrix(double, const Matrix&)>& rhs,
                             Interval interval, const Matrix& initial,
                             const IntegratorOptions& opts) {
    const double span = interval.length();
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() *
                        std::max({std::abs(interval.a), std::abs(interval.b), 1.0});

    double t = interval.a;
    Matrix y = initial;
    Matrix f = rhs(t, y);
    double h = initial_step(rhs, t, y, f, span, opts.atol, opts.rtol);

    std::vector<DenseOutput::Step> steps;
    steps.reserve(128);

    long nsteps = 0;
    bool rejected = false;
    while (t < interval.b) {
        if (++nsteps > opts.max_steps) {
            throw IntegrationFailure("step budget exhausted (stiffness beyond limits?)");
        }
        h = std::min(h, interval.b - t);
        if (h < hmin) {
            throw IntegrationFailure("step size underflow at t = " + std::to_string(t));
        }

        const Matrix k1 = f;
        const Matrix k2 = rhs(t + c2 * h, y + h * (a21 * k1));
        const Matrix k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Matrix k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Matrix k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Matrix k6 =
            rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Matrix ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Matrix k7 = rhs(t + h, ynew);

        const Matrix err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double norm = scaled_rms(err, y, ynew, opts.atol, opts.rtol);

        if (norm <= 1.0) {
            DenseOutput::Step s;
            s.t0 = t;
            s.h = h;
            s.c1 = y;
            s.c2 = ynew - y;
            s.c3 = h * k1 - s.c2;
            s.c4 = s.c2 - h * k7 - s.c3;
            s.c5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            steps.push_back(std::move(s));

            t += h;
            y = ynew;
            f = k7;  // FSAL

            double factor = (norm == 0.0)
                                ? 10.0
                                : std::min(10.0, std::max(0.2, 0.9 * std::pow(norm, -0.2)));
            if (rejected) factor = std::min(factor, 1.0);
            h *= factor;
            rejected = false;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(norm, -0.2));
            rejected = true;
        }
    }

    return DenseOutput(interval, initial.rows(), initial.cols(), std::move(steps));
}

}  // namespace bvp
