#pragma once

// Dense real matrix kernels: norms, effective rank, dilation, truncation,
// stability checks and stationary VAR(1) covariance algebra.
//
// Storage and eigensolves are delegated to Eigen. The two value types below
// only add the invariants (finite entries, exact symmetry) that the rest of
// the library relies on.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "acov/error.hpp"

namespace acov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
    if (m.rows() < 1 || m.cols() < 1) {
        throw InputError(std::string(what) + ": matrix must have at least one row and column");
    }
    if (!m.allFinite()) {
        throw InputError(std::string(what) + ": non-finite entry");
    }
}

/// Largest |eigenvalue| of a symmetric matrix (only the upper triangle is read).
inline double symmetric_spectral_norm(const Matrix& s) {
    if (s.rows() == 1) return std::abs(s(0, 0));
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Largest singular value through the smaller Gram matrix.
inline double rectangular_spectral_norm(const Matrix& m) {
    Matrix gram;
    if (m.rows() <= m.cols()) {
        gram.noalias() = m * m.transpose();
    } else {
        gram.noalias() = m.transpose() * m;
    }
    if (gram.rows() == 1) return std::sqrt(std::max(gram(0, 0), 0.0));
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

inline double symmetric_lambda_max(const Matrix& s) {
    if (s.rows() == 1) return s(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(s.rows() - 1);
}

}  // namespace detail

/// Real matrix with at least one row and column and finite entries.
class DenseMatrix {
public:
    DenseMatrix() : m_(Matrix::Zero(1, 1)) {}

    template <typename Derived>
    DenseMatrix(const Eigen::MatrixBase<Derived>& m) : m_(m) {  // NOLINT(implicit)
        detail::require_finite(m_, "DenseMatrix");
    }

    DenseMatrix(Matrix&& m) : m_(std::move(m)) {  // NOLINT(implicit)
        detail::require_finite(m_, "DenseMatrix");
    }

    static DenseMatrix zeros(Eigen::Index rows, Eigen::Index cols) {
        return DenseMatrix(Matrix::Zero(rows, cols));
    }
    static DenseMatrix identity(Eigen::Index n) { return DenseMatrix(Matrix::Identity(n, n)); }

    Eigen::Index rows() const noexcept { return m_.rows(); }
    Eigen::Index cols() const noexcept { return m_.cols(); }
    bool square() const noexcept { return m_.rows() == m_.cols(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    const Matrix& eigen() const noexcept { return m_; }
    DenseMatrix transpose() const { return DenseMatrix(Matrix(m_.transpose())); }

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a.m_ == b.m_;
    }

private:
    Matrix m_;
};

/// Symmetric matrix. Only the upper triangle of the source is read; the lower
/// triangle is mirrored from it, so symmetry holds bit-exactly.
class SymmetricMatrix {
public:
    SymmetricMatrix() : m_(Matrix::Zero(1, 1)) {}

    template <typename Derived>
    explicit SymmetricMatrix(const Eigen::MatrixBase<Derived>& m) : m_(m) {
        init();
    }

    explicit SymmetricMatrix(Matrix&& m) : m_(std::move(m)) { init(); }

    static SymmetricMatrix identity(Eigen::Index n) {
        return SymmetricMatrix(Matrix::Identity(n, n));
    }
    static SymmetricMatrix diagonal(const Vector& d) {
        return SymmetricMatrix(Matrix(d.asDiagonal()));
    }

    Eigen::Index dim() const noexcept { return m_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    double trace() const { return m_.trace(); }

    const Matrix& eigen() const noexcept { return m_; }
    DenseMatrix dense() const { return DenseMatrix(m_); }

    /// Eigenvalues in ascending order.
    Vector eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    double lambda_max() const { return detail::symmetric_lambda_max(m_); }

    /// PSD up to a relative tolerance: lambda_min >= -tol * max|lambda|.
    bool is_psd(double tol = 1e-10) const {
        const Vector ev = eigenvalues();
        const double scale = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
        return ev(0) >= -tol * scale;
    }

    friend bool operator==(const SymmetricMatrix& a, const SymmetricMatrix& b) {
        return a.dim() == b.dim() && a.m_ == b.m_;
    }

private:
    void init() {
        if (m_.rows() != m_.cols()) throw InputError("SymmetricMatrix: matrix must be square");
        detail::require_finite(m_, "SymmetricMatrix");
        m_.triangularView<Eigen::StrictlyLower>() = m_.transpose();
    }

    Matrix m_;
};

/// Largest singular value.
inline double spectral_norm(const DenseMatrix& m) {
    if (m.square() && m.eigen() == m.eigen().transpose()) {
        return detail::symmetric_spectral_norm(m.eigen());
    }
    return detail::rectangular_spectral_norm(m.eigen());
}

inline double spectral_norm(const SymmetricMatrix& s) {
    return detail::symmetric_spectral_norm(s.eigen());
}

/// Sum of singular values.
inline double nuclear_norm(const DenseMatrix& m) {
    Eigen::BDCSVD<Matrix> svd(m.eigen());
    return svd.singularValues().sum();
}

inline double nuclear_norm(const SymmetricMatrix& s) {
    return s.eigenvalues().cwiseAbs().sum();
}

/// Tr(s) / ||s|| for a nonzero PSD matrix.
inline double effective_rank(const SymmetricMatrix& s) {
    const Vector ev = s.eigenvalues();
    const double top = ev(ev.size() - 1);
    const double scale = std::max(std::abs(ev(0)), std::abs(top));
    if (scale == 0.0) throw DomainError("effective_rank: zero matrix");
    if (ev(0) < -1e-10 * scale) throw DomainError("effective_rank: matrix is not PSD");
    return s.trace() / top;
}

/// [[0, z], [z^T, 0]]; its largest eigenvalue equals ||z||.
inline SymmetricMatrix dilate(const DenseMatrix& z) {
    const auto r = z.rows();
    const auto c = z.cols();
    Matrix out = Matrix::Zero(r + c, r + c);
    out.topRightCorner(r, c) = z.eigen();
    return SymmetricMatrix(std::move(out));
}

/// Rescales x to spectral norm min(level, ||x||). The zero matrix is returned
/// unchanged.
inline DenseMatrix truncate(const DenseMatrix& x, double level) {
    if (!(level > 0.0)) throw DomainError("truncate: level must be positive");
    const double norm = spectral_norm(x);
    if (norm <= level) return x;
    return DenseMatrix(Matrix((level / norm) * x.eigen()));
}

inline SymmetricMatrix truncate(const SymmetricMatrix& x, double level) {
    if (!(level > 0.0)) throw DomainError("truncate: level must be positive");
    const double norm = spectral_norm(x);
    if (norm <= level) return x;
    return SymmetricMatrix(Matrix((level / norm) * x.eigen()));
}

/// Max modulus over the (possibly complex) eigenvalues.
inline double spectral_radius(const DenseMatrix& a) {
    if (!a.square()) throw InputError("spectral_radius: matrix must be square");
    if (a.rows() == 1) return std::abs(a(0, 0));
    Eigen::EigenSolver<Matrix> es(a.eigen(), false);
    if (es.info() != Eigen::Success) throw NumericalError("spectral_radius: eigensolver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// d x d companion matrix: first row `a`, ones on the subdiagonal.
inline DenseMatrix companion_matrix(std::span<const double> a) {
    if (a.empty()) throw InputError("companion_matrix: coefficient vector is empty");
    const auto d = static_cast<Eigen::Index>(a.size());
    Matrix c = Matrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) c(0, k) = a[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 1; k < d; ++k) c(k, k - 1) = 1.0;
    return DenseMatrix(std::move(c));
}

/// Solves S = A S A^T + sigma_e by summing sum_k A^k sigma_e (A^T)^k.
///
/// The series is accumulated by doubling (S <- S + A_j S A_j^T, A_j <- A_j^2),
/// which visits the same partial sums at indices 2^j - 1; summation stops once
/// the newest block has norm below 1e-14 ||sigma_e||.
inline SymmetricMatrix stationary_var1_covariance(const DenseMatrix& a,
                                                  const SymmetricMatrix& sigma_e) {
    if (!a.square() || a.rows() != sigma_e.dim()) {
        throw InputError("stationary_var1_covariance: dimension mismatch");
    }
    if (spectral_radius(a) >= 1.0 - 1e-6) {
        throw InstabilityError("stationary_var1_covariance: spectral radius >= 1 - 1e-6");
    }
    const double scale = spectral_norm(sigma_e);
    if (scale == 0.0) return sigma_e;

    Matrix power = a.eigen();
    Matrix sum = sigma_e.eigen();
    for (int iter = 0; iter < 200; ++iter) {
        Matrix block = power * sum * power.transpose();
        block = 0.5 * (block + block.transpose()).eval();
        const double block_norm = detail::symmetric_spectral_norm(block);
        sum += block;
        if (block_norm < 1e-14 * scale) break;
        power = (power * power).eval();
    }
    sum = 0.5 * (sum + sum.transpose()).eval();

    const Matrix residual = sum - a.eigen() * sum * a.eigen().transpose() - sigma_e.eigen();
    if (detail::symmetric_spectral_norm(0.5 * (residual + residual.transpose())) > 1e-10 * scale) {
        throw NumericalError("stationary_var1_covariance: residual criterion not met");
    }
    return SymmetricMatrix(std::move(sum));
}

/// Population lag-m autocovariance E Y_t Y_{t+m}^T = sigma0 (A^T)^m of a
/// stationary VAR(1).
inline DenseMatrix var1_autocovariance(const DenseMatrix& a, const SymmetricMatrix& sigma0,
                                       std::size_t m) {
    if (!a.square() || a.rows() != sigma0.dim()) {
        throw InputError("var1_autocovariance: dimension mismatch");
    }
    Matrix out = sigma0.eigen();
    const Matrix at = a.eigen().transpose();
    for (std::size_t k = 0; k < m; ++k) out = (out * at).eval();
    return DenseMatrix(std::move(out));
}

/// Factor with L L^T = s, L lower triangular. Falls back to a QR of the
/// symmetric square root when s is only semidefinite.
inline Matrix lower_factor(const SymmetricMatrix& s) {
    Eigen::LLT<Matrix> llt(s.eigen());
    if (llt.info() == Eigen::Success) return llt.matrixL();
    if (!s.is_psd()) throw DomainError("lower_factor: matrix is not PSD");
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.eigen());
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sqrt_s = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    Eigen::HouseholderQR<Matrix> qr(sqrt_s);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    return r.transpose();
}

}  // namespace acov
