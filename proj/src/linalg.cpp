#include "stosc/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "stosc/errors.hpp"

namespace stosc {

SymMatrix::SymMatrix(Mat m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
        throw ValidationError("SymMatrix: expected a non-empty square matrix, got " +
                              std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
    }
    if (!m_.allFinite()) throw ValidationError("SymMatrix: non-finite entry");
    const double scale = m_.cwiseAbs().maxCoeff();
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        throw ValidationError("SymMatrix: asymmetry " + std::to_string(asym) +
                              " exceeds 1e-12 * max|m_ij|");
    }
}

double SpectralDecomposition::max_abs_eigenvalue() const {
    return eigenvalues.cwiseAbs().maxCoeff();
}

double SpectralDecomposition::min_abs_eigenvalue() const {
    return eigenvalues.cwiseAbs().minCoeff();
}

bool SpectralDecomposition::nonsingular() const {
    return min_abs_eigenvalue() > 1e-10 * max_abs_eigenvalue();
}

void SpectralDecomposition::require_nonsingular() const {
    if (!nonsingular()) {
        throw PreconditionError("Lambda is singular: min|lambda| = " +
                                std::to_string(min_abs_eigenvalue()) + ", max|lambda| = " +
                                std::to_string(max_abs_eigenvalue()));
    }
}

Mat SpectralDecomposition::reconstruct() const {
    return vectors * eigenvalues.asDiagonal() * vectors.transpose();
}

namespace {

double off_diagonal_norm(const Mat& a) {
    double s = 0.0;
    for (Eigen::Index p = 0; p < a.rows(); ++p)
        for (Eigen::Index q = p + 1; q < a.cols(); ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
}

// One Jacobi rotation annihilating a(p, q); v accumulates the rotations.
void rotate(Mat& a, Mat& v, Eigen::Index p, Eigen::Index q) {
    const double apq = a(p, q);
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const Eigen::Index n = a.rows();
    for (Eigen::Index r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        const double arp = a(r, p);
        const double arq = a(r, q);
        a(r, p) = a(p, r) = c * arp - s * arq;
        a(r, q) = a(q, r) = s * arp + c * arq;
    }
    a(p, p) -= t * apq;
    a(q, q) += t * apq;
    a(p, q) = a(q, p) = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = c * vrp - s * vrq;
        v(r, q) = s * vrp + c * vrq;
    }
}

}  // namespace

SpectralDecomposition eigh_symmetric(const SymMatrix& m) {
    const Eigen::Index n = m.dim();
    // Work on the exactly symmetrized copy so rotations see one value per pair.
    Mat a = 0.5 * (m.matrix() + m.matrix().transpose());
    Mat v = Mat::Identity(n, n);
    const double norm = a.norm();

    bool converged = false;
    for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
        if (off_diagonal_norm(a) <= 1e-17 * norm) {
            converged = true;
            break;
        }
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = std::abs(a(p, q));
                if (apq == 0.0) continue;
                // Negligible against both diagonal entries: drop it.
                if (sweep > 3 && std::abs(a(p, p)) + 100.0 * apq == std::abs(a(p, p)) &&
                    std::abs(a(q, q)) + 100.0 * apq == std::abs(a(q, q))) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                rotate(a, v, p, q);
            }
        }
    }
    if (!converged && off_diagonal_norm(a) > 1e-17 * norm) {
        throw ConvergenceError("eigh_symmetric: no convergence in " +
                               std::to_string(kMaxJacobiSweeps) + " sweeps");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

    SpectralDecomposition out{Mat(n, n), Vec(n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.eigenvalues(k) = a(src, src);
        Vec col = v.col(src);
        col /= col.norm();
        for (Eigen::Index r = 0; r < n; ++r) {
            if (std::abs(col(r)) > 1e-12) {
                if (col(r) < 0.0) col = -col;
                break;
            }
        }
        out.vectors.col(k) = col;
    }
    return out;
}

TrigBlocks matrix_trig(const SpectralDecomposition& dec, double t) {
    dec.require_nonsingular();
    const Eigen::Index n = dec.dim();
    Vec c(n), inv_s(n), lam_s(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double lam = dec.eigenvalues(k);
        const double s = std::sin(lam * t);
        c(k) = std::cos(lam * t);
        inv_s(k) = s / lam;
        lam_s(k) = lam * s;
    }
    const Mat& p = dec.vectors;
    return TrigBlocks{p * c.asDiagonal() * p.transpose(), p * inv_s.asDiagonal() * p.transpose(),
                      p * lam_s.asDiagonal() * p.transpose()};
}

Mat rotation_matrix(const SpectralDecomposition& dec, double t) {
    const Eigen::Index d = dec.dim();
    const TrigBlocks b = matrix_trig(dec, t);
    Mat r(2 * d, 2 * d);
    r.topLeftCorner(d, d) = b.cos;
    r.topRightCorner(d, d) = b.inv_sin;
    r.bottomLeftCorner(d, d) = -b.lam_sin;
    r.bottomRightCorner(d, d) = b.cos;
    return r;
}

namespace {

constexpr std::array<double, 4> kPade3{120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                       25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                        30270240.0,    2162160.0,    110880.0,     3960.0,
                                        90.0,          1.0};
constexpr std::array<double, 14> kPade13{64764752532480000.0,
                                         32382376266240000.0,
                                         7771770303897600.0,
                                         1187353796428800.0,
                                         129060195264000.0,
                                         10559470521600.0,
                                         670442572800.0,
                                         33522128640.0,
                                         1323241920.0,
                                         40840800.0,
                                         960960.0,
                                         16380.0,
                                         182.0,
                                         1.0};

// 1-norm bounds below which degree m reaches unit roundoff (Higham 2005).
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
Mat pade_low(const Mat& a, const std::array<double, N>& b) {
    const Eigen::Index n = a.rows();
    const Mat ident = Mat::Identity(n, n);
    const Mat a2 = a * a;
    Mat u_inner = b[1] * ident;
    Mat v = b[0] * ident;
    Mat power = ident;
    for (std::size_t k = 2; k < N; k += 2) {
        power = power * a2;
        v += b[k] * power;
        u_inner += b[k + 1] * power;
    }
    const Mat u = a * u_inner;
    return (v - u).partialPivLu().solve(v + u);
}

Mat pade13(const Mat& a) {
    const auto& b = kPade13;
    const Eigen::Index n = a.rows();
    const Mat ident = Mat::Identity(n, n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;
    const Mat u =
        a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
             b[1] * ident);
    const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                  b[2] * a2 + b[0] * ident;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Mat matrix_exp(const Mat& m) {
    if (m.rows() != m.cols()) throw ValidationError("matrix_exp: matrix must be square");
    if (!m.allFinite()) throw NumericError("matrix_exp: non-finite input");
    const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();

    Mat out;
    if (norm1 <= kTheta3) {
        out = pade_low(m, kPade3);
    } else if (norm1 <= kTheta5) {
        out = pade_low(m, kPade5);
    } else if (norm1 <= kTheta7) {
        out = pade_low(m, kPade7);
    } else if (norm1 <= kTheta9) {
        out = pade_low(m, kPade9);
    } else {
        const int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
        out = pade13(m / std::ldexp(1.0, squarings));
        for (int s = 0; s < squarings; ++s) out = out * out;
    }
    if (!out.allFinite()) throw NumericError("matrix_exp: overflow");
    return out;
}

Mat augmented_exp(const Mat& c, double h) {
    if (!(h > 0.0)) throw PreconditionError("augmented_exp: h must be positive");
    return matrix_exp(c * h);
}

}  // namespace stosc
