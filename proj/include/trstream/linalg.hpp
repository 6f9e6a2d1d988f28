#pragma once

#include <trstream/errors.hpp>
#include <trstream/tensor.hpp>

#include <Eigen/Dense>

#include <cmath>

namespace trstream {

inline constexpr double kDefaultPinvRcond = 1e-12;

/// Returns P * Q^+ for symmetric Q, using a symmetric eigendecomposition and
/// dropping eigenvalues with |lambda| <= rcond * max|lambda|. On a
/// rank-deficient Q this is the minimum-norm solution of X Q = P.
inline Matrix solve_normal(const Matrix& q, const Matrix& p, double rcond = kDefaultPinvRcond) {
    if (q.rows() != q.cols()) throw domain_error("solve_normal: Q is not square");
    if (p.cols() != q.rows())
        throw domain_error("solve_normal: P has " + std::to_string(p.cols()) + " columns, Q is " +
                           std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
    if (!q.allFinite() || !p.allFinite()) throw numeric_error("solve_normal: non-finite input");
    const Matrix sym = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector& lambda = eig.eigenvalues();
    const double top = lambda.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(lambda.size());
    if (top > 0.0)
        for (Eigen::Index i = 0; i < lambda.size(); ++i)
            if (std::abs(lambda(i)) > rcond * top) inv(i) = 1.0 / lambda(i);
    const Matrix& v = eig.eigenvectors();
    return ((p * v) * inv.asDiagonal()) * v.transpose();
}

/// Squared row norms of an orthonormal basis of range(M), computed with a
/// column-pivoted QR truncated at rcond. Scores sum to rank(M).
inline Vector leverage_scores(const Matrix& m, double rcond = kDefaultPinvRcond) {
    if (!m.allFinite()) throw numeric_error("leverage_scores: non-finite input");
    if (m.size() == 0) return Vector::Zero(m.rows());
    Eigen::ColPivHouseholderQR<Matrix> qr(m);
    qr.setThreshold(rcond);
    const Eigen::Index r = qr.rank();
    if (r == 0) return Vector::Zero(m.rows());
    Matrix basis = Matrix::Identity(m.rows(), r);
    basis = qr.householderQ() * basis;
    return basis.rowwise().squaredNorm();
}

/// Numerical rank consistent with leverage_scores.
inline Eigen::Index numerical_rank(const Matrix& m, double rcond = kDefaultPinvRcond) {
    if (m.size() == 0) return 0;
    Eigen::ColPivHouseholderQR<Matrix> qr(m);
    qr.setThreshold(rcond);
    return qr.rank();
}

/// Smallest eigenvalue of the symmetric part; used by PSD checks.
inline double min_symmetric_eigenvalue(const Matrix& q) {
    const Matrix sym = 0.5 * (q + q.transpose());
    return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

} // namespace trstream
