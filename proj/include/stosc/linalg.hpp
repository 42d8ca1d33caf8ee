#pragma once

#include "stosc/types.hpp"

namespace stosc {

/// Symmetric d x d matrix. Construction rejects inputs whose asymmetry exceeds
/// 1e-12 of the largest entry.
class SymMatrix {
public:
    explicit SymMatrix(Mat m);

    [[nodiscard]] Eigen::Index dim() const { return m_.rows(); }
    [[nodiscard]] const Mat& matrix() const { return m_; }
    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Mat m_;
};

/// Lambda = P diag(eigenvalues) P^T, eigenvalues sorted descending, each
/// eigenvector's first non-negligible entry positive.
struct SpectralDecomposition {
    Mat vectors;     // columns are eigenvectors
    Vec eigenvalues;

    [[nodiscard]] Eigen::Index dim() const { return eigenvalues.size(); }
    [[nodiscard]] double max_abs_eigenvalue() const;
    [[nodiscard]] double min_abs_eigenvalue() const;
    /// min|lambda| > 1e-10 max|lambda|
    [[nodiscard]] bool nonsingular() const;
    void require_nonsingular() const;
    [[nodiscard]] Mat reconstruct() const;
};

inline constexpr int kMaxJacobiSweeps = 100;

/// Cyclic Jacobi eigensolver. Throws ValidationError on asymmetric input and
/// ConvergenceError if kMaxJacobiSweeps sweeps do not annihilate the off-diagonal.
[[nodiscard]] SpectralDecomposition eigh_symmetric(const SymMatrix& m);

/// Two eigenvalue magnitudes are merged into one group when they differ by at
/// most this fraction of max|lambda|.
inline constexpr double kEigenvalueMergeTol = 1e-9;

/// Blocks of the rotation matrix at lag t: cos(Lambda t), Lambda^{-1} sin(Lambda t)
/// and Lambda sin(Lambda t), each built as P diag(f(lambda_k)) P^T.
struct TrigBlocks {
    Mat cos;
    Mat inv_sin;
    Mat lam_sin;
};

/// Throws PreconditionError when the decomposition fails the nonsingularity gate.
[[nodiscard]] TrigBlocks matrix_trig(const SpectralDecomposition& dec, double t);

/// [cos, Lambda^{-1} sin; -Lambda sin, cos] at lag t (the propagator e^{A t}).
[[nodiscard]] Mat rotation_matrix(const SpectralDecomposition& dec, double t);

/// e^{M} by scaling and squaring with a diagonal Pade approximant
/// (degrees 3..13 selected from the 1-norm). Throws NumericError on overflow.
[[nodiscard]] Mat matrix_exp(const Mat& m);

/// e^{C h}; requires h > 0.
[[nodiscard]] Mat augmented_exp(const Mat& c, double h);

}  // namespace stosc
