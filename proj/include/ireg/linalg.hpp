#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <utility>

#include "ireg/matrix.hpp"

namespace ireg {

/// Lower-triangular L with L L' = a.
inline Matrix cholesky(const SymPosDef& a) {
    return a.lower_factor();
}

struct SymEigen {
    Vector values;   // descending
    Matrix vectors;  // columns, orthonormal
};

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
/// Eigenvector signs are fixed so the first coordinate of magnitude
/// above 1e-12 * ||v|| is positive.
inline SymEigen sym_eigen(const Matrix& a, double sym_tol = 1e-10) {
    if (a.rows() != a.cols())
        throw ShapeMismatch("sym_eigen: matrix must be square");
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale > 0.0 && (a - a.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
        throw NonSymmetric("sym_eigen: input asymmetric beyond tolerance");
    Eigen::SelfAdjointEigenSolver<Matrix> es(((a + a.transpose()) / 2.0).eval());
    if (es.info() != Eigen::Success)
        throw NoConvergence("sym_eigen: eigensolver did not converge");
    const Eigen::Index n = a.rows();
    SymEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = es.eigenvalues()(n - 1 - i);
        Vector v = es.eigenvectors().col(n - 1 - i);
        const double vnorm = v.norm();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(v(j)) > 1e-12 * vnorm) {
                if (v(j) < 0.0) v = -v;
                break;
            }
        }
        out.vectors.col(i) = v;
    }
    return out;
}

inline SymPosDef spd_inverse(const SymPosDef& a) {
    Matrix inv = a.solve(Matrix::Identity(a.dim(), a.dim()));
    return SymPosDef(std::move(inv), 1e-8);
}

/// Moore-Penrose pseudo-inverse. Singular values below
/// max(rows, cols) * eps * sigma_max are treated as zero.
inline Matrix pseudo_inverse(const Matrix& a) {
    if (a.size() == 0) return a.transpose();
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cutoff = std::max(a.rows(), a.cols()) *
                          std::numeric_limits<double>::epsilon() *
                          svd.singularValues()(0);
    Vector inv_sv = svd.singularValues();
    for (Eigen::Index i = 0; i < inv_sv.size(); ++i)
        inv_sv(i) = inv_sv(i) > cutoff ? 1.0 / inv_sv(i) : 0.0;
    return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

/// Rank by counting singular values above rel_tol * sigma_max.
inline int numeric_rank(const Matrix& a, double rel_tol = 1e-8) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_tol * sv(0)) ++r;
    return r;
}

struct MatrixNorms {
    double frobenius;
    double spectral;
};

inline MatrixNorms norms(const Matrix& a) {
    MatrixNorms out;
    out.frobenius = a.norm();
    if (a.size() == 0 || out.frobenius == 0.0) {
        out.spectral = 0.0;
    } else {
        Eigen::JacobiSVD<Matrix> svd(a);
        out.spectral = svd.singularValues()(0);
    }
    return out;
}

inline double spectral_norm(const Matrix& a) {
    return norms(a).spectral;
}

/// Symmetric positive definite square root via eigendecomposition.
inline SymPosDef spd_sqrt(const SymPosDef& a) {
    SymEigen es = sym_eigen(a.matrix());
    if (es.values.minCoeff() <= 0.0)
        throw NotPositiveDefinite("spd_sqrt: non-positive eigenvalue");
    Matrix root = es.vectors * es.values.cwiseSqrt().asDiagonal() * es.vectors.transpose();
    return SymPosDef(std::move(root), 1e-8);
}

/// The four marginal parameters hidden inside a joint covariance.
///
/// delta_inv inverts the Schur complement Sigma_XX - Sigma_XY Sigma_YY^-1 Sigma_XY',
/// eta = Sigma_YY^-1 Sigma_XY', sigma_e_inv inverts the opposite Schur complement,
/// and beta = Sigma_XX^-1 Sigma_XY. The Woodbury identity
/// sigma_e_inv = Sigma_YY^-1 + eta delta_inv eta' holds by construction and is
/// asserted in the test suite.
struct PartitionedPrecision {
    SymPosDef delta_inv;
    Matrix eta;  // q x p
    SymPosDef sigma_e_inv;
    Matrix beta;  // p x q
};

inline PartitionedPrecision partitioned_precision(const JointCovariance& jc) {
    const Matrix sxx = jc.xx();
    const Matrix sxy = jc.xy();
    const Matrix syy = jc.yy();
    SymPosDef syy_spd{syy};
    SymPosDef sxx_spd{sxx};

    Matrix delta = sxx - sxy * syy_spd.solve(sxy.transpose());
    Matrix sigma_e = syy - sxy.transpose() * sxx_spd.solve(sxy);
    SymPosDef delta_spd{std::move(delta), 1e-8};
    SymPosDef sigma_e_spd{std::move(sigma_e), 1e-8};

    return PartitionedPrecision{
        spd_inverse(delta_spd),
        syy_spd.solve(sxy.transpose()),
        spd_inverse(sigma_e_spd),
        sxx_spd.solve(sxy),
    };
}

}  // namespace ireg
