#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <utility>

#include "ireg/errors.hpp"

namespace ireg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A symmetric positive definite matrix, validated on construction.
///
/// Inputs are symmetrized as (A + A')/2 since sample covariances pick up
/// round-off asymmetry. Positive definiteness is defined operationally:
/// the Cholesky factorization must succeed with every pivot above
/// dim * eps * max|diagonal|. The lower factor is kept for reuse.
class SymPosDef {
  public:
    explicit SymPosDef(Matrix a, double sym_tol = 1e-12) {
        if (a.rows() != a.cols() || a.rows() < 1)
            throw ShapeMismatch("SymPosDef: matrix must be square and non-empty");
        if (!a.allFinite())
            throw BadArgument("SymPosDef: non-finite entries");
        const double scale = a.cwiseAbs().maxCoeff();
        const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
        if (scale > 0.0 && asym > sym_tol * scale)
            throw NonSymmetric("SymPosDef: asymmetry " + std::to_string(asym / scale) +
                               " exceeds relative tolerance");
        mat_ = ((a + a.transpose()) / 2.0).eval();
        Eigen::LLT<Matrix> llt(mat_);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("SymPosDef: Cholesky factorization failed");
        lower_ = llt.matrixL();
        const double max_diag = mat_.diagonal().maxCoeff();
        const double pivot_floor =
            static_cast<double>(mat_.rows()) * std::numeric_limits<double>::epsilon() * max_diag;
        for (Eigen::Index i = 0; i < lower_.rows(); ++i) {
            const double pivot = lower_(i, i) * lower_(i, i);
            if (!(pivot > pivot_floor))
                throw NotPositiveDefinite("SymPosDef: pivot " + std::to_string(pivot) +
                                          " at index " + std::to_string(i) + " below floor");
        }
    }

    Eigen::Index dim() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }
    const Matrix& lower_factor() const { return lower_; }

    /// Solves a x = b for x using the stored factor.
    Matrix solve(const Matrix& b) const {
        Matrix y = lower_.triangularView<Eigen::Lower>().solve(b);
        return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
    }

    double log_det() const {
        return 2.0 * lower_.diagonal().array().log().sum();
    }

  private:
    Matrix mat_;
    Matrix lower_;
};

/// Joint covariance of (X', Y')' with the X block leading.
class JointCovariance {
  public:
    JointCovariance(Eigen::Index p, Eigen::Index q, SymPosDef sigma)
        : p_(p), q_(q), sigma_(std::move(sigma)) {
        if (p < 1 || q < 1 || sigma_.dim() != p + q)
            throw ShapeMismatch("JointCovariance: sigma must be (p+q) x (p+q)");
        // The marginal blocks must themselves be positive definite.
        (void)SymPosDef(xx());
        (void)SymPosDef(yy());
    }

    Eigen::Index p() const { return p_; }
    Eigen::Index q() const { return q_; }
    const SymPosDef& sigma() const { return sigma_; }

    Matrix xx() const { return sigma_.matrix().topLeftCorner(p_, p_); }
    Matrix xy() const { return sigma_.matrix().topRightCorner(p_, q_); }
    Matrix yy() const { return sigma_.matrix().bottomRightCorner(q_, q_); }

  private:
    Eigen::Index p_;
    Eigen::Index q_;
    SymPosDef sigma_;
};

}  // namespace ireg
