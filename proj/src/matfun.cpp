#include "bvp/matfun.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

namespace bvp::matfun {

namespace {

double one_norm(const Matrix& A) {
    return A.cwiseAbs().colwise().sum().maxCoeff();
}

void require_square(const Matrix& A, const char* what) {
    if (A.rows() != A.cols() || A.rows() < 1)
        throw ShapeMismatch(std::string(what) + " must be a non-empty square matrix");
}

// Degree-13 Pade numerator coefficients (Higham); V uses the even ones.
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

Matrix pade13_exp(const Matrix& B) {
    const Eigen::Index d = B.rows();
    const Matrix I = Matrix::Identity(d, d);
    const Matrix B2 = B * B;
    const Matrix B4 = B2 * B2;
    const Matrix B6 = B2 * B4;
    const Matrix U =
        B * (B6 * (kPade13[13] * B6 + kPade13[11] * B4 + kPade13[9] * B2) +
             kPade13[7] * B6 + kPade13[5] * B4 + kPade13[3] * B2 + kPade13[1] * I);
    const Matrix V = B6 * (kPade13[12] * B6 + kPade13[10] * B4 + kPade13[8] * B2) +
                     kPade13[6] * B6 + kPade13[4] * B4 + kPade13[2] * B2 + kPade13[0] * I;
    return (V - U).partialPivLu().solve(V + U);
}

// psi(X) = sum_{k>=0} X^k/(k+1)! by direct series; valid for small ||X||.
Matrix psi_series(const Matrix& X) {
    const Eigen::Index d = X.rows();
    Matrix term = Matrix::Identity(d, d);
    Matrix sum = term;
    for (int k = 1; k <= 60; ++k) {
        term = (term * X) / static_cast<double>(k + 1);
        sum += term;
        if (one_norm(term) <= 1e-18 * std::max(1.0, one_norm(sum))) break;
    }
    return sum;
}

}  // namespace

Matrix matrix_exponential(const Matrix& A, double s) {
    require_square(A, "matrix exponential argument");
    Matrix B = s * A;
    const double norm = one_norm(B);
    const double theta13 = 5.371920351148152;
    int squarings = 0;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        B /= std::pow(2.0, squarings);
    }
    Matrix F = pade13_exp(B);
    for (int i = 0; i < squarings; ++i) F = F * F;
    return F;
}

Matrix phi_function(const Matrix& A, double t, double a) {
    require_square(A, "phi argument");
    const Eigen::Index d = A.rows();
    const double h = t - a;
    if (h == 0.0) return Matrix::Zero(d, d);
    Matrix X = -h * A;
    // Scale to ||X|| <= 1/2, run the series, then undo the scaling with
    // psi(2X) = (exp(X) + I)·psi(X)/2, which never inverts anything.
    int doublings = 0;
    double norm = one_norm(X);
    while (norm > 0.5) {
        X *= 0.5;
        norm *= 0.5;
        ++doublings;
    }
    Matrix psi = psi_series(X);
    Matrix E = matrix_exponential(X, 1.0);
    const Matrix I = Matrix::Identity(d, d);
    for (int i = 0; i < doublings; ++i) {
        psi = 0.5 * (E + I) * psi;
        if (i + 1 < doublings) E = E * E;
    }
    return h * psi;
}

std::pair<Matrix, Matrix> sqrt_trig(const Matrix& A, double s) {
    require_square(A, "trigonometric argument");
    const Eigen::Index d = A.rows();
    const Matrix I = Matrix::Identity(d, d);
    // Halve s until ||A s^2|| <= 1, sum the even/odd series, then rebuild
    // with the double-angle identities C(2s) = 2C^2 - I, S(2s) = 2SC.
    int doublings = 0;
    double sh = s;
    while (one_norm(A) * sh * sh > 1.0 && doublings < 64) {
        sh *= 0.5;
        ++doublings;
    }
    const Matrix W = (sh * sh) * A;
    // term_k = (-1)^k W^k/(2k)! drives both series: the odd one only
    // divides it further by (2k+1).
    Matrix term = I;
    Matrix C = I;
    Matrix Ssum = I;
    for (int k = 1; k <= 60; ++k) {
        term = -(term * W) / ((2.0 * k - 1.0) * (2.0 * k));
        C += term;
        Ssum += term / (2.0 * k + 1.0);
        if (one_norm(term) <= 1e-18) break;
    }
    Matrix S = sh * Ssum;
    for (int i = 0; i < doublings; ++i) {
        const Matrix Snext = 2.0 * S * C;
        C = 2.0 * C * C - I;
        S = Snext;
    }
    return {C, S};
}

MatrixFunctionResult lagrange_sylvester(const std::function<Complex(Complex, int)>& f,
                                        const Matrix& A) {
    require_square(A, "interpolation argument");
    const Eigen::Index m = A.rows();
    Eigen::ComplexEigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw IllConditioned("eigenvalue computation failed");
    std::vector<Complex> eigs(static_cast<std::size_t>(m));
    double max_abs = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        eigs[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        max_abs = std::max(max_abs, std::abs(eigs[static_cast<std::size_t>(i)]));
    }

    // Greedy clustering: eigenvalues within the relative gap tolerance are
    // one interpolation node with multiplicity (confluent case).
    const double tol = 1e-8 * std::max(1.0, max_abs);
    struct Cluster {
        Complex sum;
        int count;
    };
    std::vector<Cluster> clusters;
    for (const Complex& lambda : eigs) {
        bool placed = false;
        for (Cluster& c : clusters) {
            if (std::abs(lambda - c.sum / static_cast<double>(c.count)) <= tol) {
                c.sum += lambda;
                ++c.count;
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({lambda, 1});
    }
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& x, const Cluster& y) {
        const Complex cx = x.sum / static_cast<double>(x.count);
        const Complex cy = y.sum / static_cast<double>(y.count);
        if (cx.real() != cy.real()) return cx.real() < cy.real();
        return cx.imag() < cy.imag();
    });

    std::vector<Complex> nodes;
    nodes.reserve(static_cast<std::size_t>(m));
    bool confluent = false;
    for (const Cluster& c : clusters) {
        const Complex center = c.sum / static_cast<double>(c.count);
        if (c.count > 1) confluent = true;
        for (int i = 0; i < c.count; ++i) nodes.push_back(center);
    }

    // Confluent Newton divided differences: repeated nodes take derivative
    // values, distinct nodes take difference quotients.
    const std::size_t d = nodes.size();
    std::vector<std::vector<Complex>> table(d);
    double factorial = 1.0;
    for (std::size_t i = 0; i < d; ++i) table[i].resize(d - i);
    for (std::size_t i = 0; i < d; ++i) table[i][0] = f(nodes[i], 0);
    for (std::size_t k = 1; k < d; ++k) {
        factorial *= static_cast<double>(k);
        for (std::size_t i = 0; i + k < d; ++i) {
            const Complex dx = nodes[i + k] - nodes[i];
            if (dx == Complex(0.0, 0.0))
                table[i][k] = f(nodes[i], static_cast<int>(k)) / factorial;
            else
                table[i][k] = (table[i + 1][k - 1] - table[i][k - 1]) / dx;
        }
    }
    std::vector<Complex> coeffs(d);
    for (std::size_t k = 0; k < d; ++k) coeffs[k] = table[0][k];

    // Horner evaluation of the Newton-form polynomial at the matrix.
    const Matrix I = Matrix::Identity(m, m);
    Matrix P = coeffs[d - 1] * I;
    for (std::size_t i = d - 1; i-- > 0;) P = coeffs[i] * I + (A - nodes[i] * I) * P;

    double condition = 0.0;
    double growth = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
        condition += std::abs(coeffs[k]) * growth;
        growth *= 1.0 + max_abs;
    }

    MatrixFunctionResult result;
    result.value = std::move(P);
    result.method = confluent ? Method::HermiteInterpolation : Method::EigenDecomposition;
    result.condition_estimate = condition;
    result.newton_coefficients = std::move(coeffs);
    result.newton_nodes = std::move(nodes);
    return result;
}

namespace {

void require_same_shape(const std::vector<Matrix>& mats, Eigen::Index l, Eigen::Index m,
                        const char* what) {
    for (const Matrix& mat : mats)
        if (mat.rows() != l || mat.cols() != m)
            throw ShapeMismatch(std::string(what) + " matrices must all be l x m");
}

Matrix oracle_example1(const ExampleParams& p) {
    require_square(p.A, "coefficient");
    if (p.alpha.empty()) throw ShapeMismatch("example 1 needs at least alpha_0");
    const Eigen::Index m = p.A.rows();
    const Eigen::Index l = p.alpha.front().rows();
    require_same_shape(p.alpha, l, m, "left-endpoint");
    Matrix M = Matrix::Zero(l, m);
    Matrix P = Matrix::Identity(m, m);  // (-A)^k accumulator
    for (std::size_t k = 0; k < p.alpha.size(); ++k) {
        M += p.alpha[k] * P;
        if (k + 1 < p.alpha.size()) P = -(P * p.A);
    }
    return M;
}

Matrix oracle_example2(const ExampleParams& p) {
    if (p.fractional_terms.empty())
        throw ShapeMismatch("example 2 needs at least one boundary term");
    const Eigen::Index l = p.fractional_terms.front().alpha.rows();
    const Eigen::Index m = p.fractional_terms.front().alpha.cols();
    Matrix M = Matrix::Zero(l, m);
    for (const FractionalTerm& term : p.fractional_terms) {
        if (term.alpha.rows() != l || term.alpha.cols() != m)
            throw ShapeMismatch("example 2 term matrices must agree in shape");
        if (term.order < 0.0) throw ShapeMismatch("derivative orders must be >= 0");
        // Every term of positive (integer or fractional) order annihilates
        // the constant fundamental solution; only order-0 terms survive.
        if (std::abs(term.order) < 1e-12) M += term.alpha;
    }
    return M;
}

Matrix oracle_example3(const ExampleParams& p) {
    require_square(p.A, "coefficient");
    if (p.alpha.empty()) throw ShapeMismatch("example 3 needs at least alpha_0");
    const Eigen::Index m = p.A.rows();
    const Eigen::Index l = p.alpha.front().rows();
    require_same_shape(p.alpha, l, m, "left-endpoint");
    const bool two_point = !p.beta.empty();
    if (two_point && p.beta.size() != p.alpha.size())
        throw ShapeMismatch("example 3 needs matching alpha/beta counts");
    if (two_point) require_same_shape(p.beta, l, m, "right-endpoint");

    const double width = p.interval.b - p.interval.a;
    const Matrix E = two_point ? matrix_exponential(p.A, -width) : Matrix();

    Matrix block1 = p.alpha[0];
    if (two_point) block1 += p.beta[0];

    // Y_2 = phi(A, t): Y_2(a) = O, and Y_2^(k) = (-A)^(k-1) exp(-A(t-a))
    // for k >= 1, so the k = 0 term contributes only beta_0 phi(A, b).
    Matrix block2 = Matrix::Zero(l, m);
    if (two_point) block2 += p.beta[0] * phi_function(p.A, p.interval.b, p.interval.a);
    Matrix P = Matrix::Identity(m, m);  // (-A)^(k-1) accumulator
    for (std::size_t k = 1; k < p.alpha.size(); ++k) {
        Matrix weight = p.alpha[k];
        if (two_point) weight += p.beta[k] * E;
        block2 += weight * P;
        if (k + 1 < p.alpha.size()) P = -(P * p.A);
    }

    Matrix M(l, 2 * m);
    M << block1, block2;
    return M;
}

Matrix oracle_example4(const ExampleParams& p) {
    require_square(p.A, "coefficient");
    if (p.alpha.empty()) throw ShapeMismatch("example 4 needs at least alpha_0");
    const Eigen::Index m = p.A.rows();
    const Eigen::Index l = p.alpha.front().rows();
    require_same_shape(p.alpha, l, m, "left-endpoint");
    const bool two_point = !p.beta.empty();
    if (two_point && p.beta.size() != p.alpha.size())
        throw ShapeMismatch("example 4 needs matching alpha/beta counts");
    if (two_point) require_same_shape(p.beta, l, m, "right-endpoint");

    const double width = p.interval.b - p.interval.a;
    Matrix C = Matrix::Identity(m, m), S = Matrix::Zero(m, m);
    if (two_point) {
        auto cs = sqrt_trig(p.A, width);
        C = std::move(cs.first);
        S = std::move(cs.second);
    }

    // Fundamental pair Y_1 = cos(sqrt(A)(t-a)), Y_2 = sinc form; their
    // derivative ladder alternates parity:
    //   Y_1^(2j) = (-A)^j C,  Y_1^(2j+1) = (-A)^(j+1) S,
    //   Y_2^(2j) = (-A)^j S,  Y_2^(2j+1) = (-A)^j C,
    // and at t = a only C(a) = I survives.
    Matrix block1 = Matrix::Zero(l, m);
    Matrix block2 = Matrix::Zero(l, m);
    Matrix P = Matrix::Identity(m, m);  // (-A)^j for the current parity pair
    for (std::size_t k = 0; k < p.alpha.size(); ++k) {
        const bool even = (k % 2 == 0);
        if (even) {
            block1 += p.alpha[k] * P;
            if (two_point) {
                block1 += p.beta[k] * P * C;
                block2 += p.beta[k] * P * S;
            }
        } else {
            block2 += p.alpha[k] * P;
            if (two_point) {
                block1 += p.beta[k] * (-(P * p.A)) * S;
                block2 += p.beta[k] * P * C;
            }
            P = -(P * p.A);  // advance (-A)^j after finishing an odd order
        }
    }

    Matrix M(l, 2 * m);
    M << block1, block2;
    return M;
}

Matrix oracle_example5(const ExampleParams& p) {
    if (p.alpha.empty()) throw ShapeMismatch("example 5 needs the constant coefficient alpha_0");
    return p.alpha.front();
}

}  // namespace

Matrix oracle_characteristic_matrix(int example_id, const ExampleParams& params) {
    switch (example_id) {
        case 1: return oracle_example1(params);
        case 2: return oracle_example2(params);
        case 3: return oracle_example3(params);
        case 4: return oracle_example4(params);
        case 5: return oracle_example5(params);
        default: throw ValidationError("example id must be in 1..5");
    }
}

}  // namespace bvp::matfun
