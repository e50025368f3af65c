#pragma once

#include <algorithm>
#include <vector>

#include "ireg/linalg.hpp"
#include "ireg/matrix.hpp"
#include "ireg/simgen.hpp"

namespace ireg {

/// Rank-constrained multivariate regression fit of response on design.
struct RrrFit {
    Matrix coef;         // design-dim x response-dim, rank <= requested
    SymPosDef precision; // inverse of the rank-constrained residual covariance
    int rank = 0;
    double objective = 0.0;  // n^{-1} tr(E'E Omega) - log det Omega at the fit
};

namespace detail {

// Shared pieces of the closed-form solution: OLS coefficients, residual
// covariance whitener and its inverse, and the eigenvectors ordering the
// whitened fitted second-moment matrix.
struct RrrParts {
    Matrix b_ols;
    Matrix whiten;     // residual covariance ^ {-1/2}
    Matrix unwhiten;   // residual covariance ^ {+1/2}
    Matrix vectors;    // eigenvectors, descending eigenvalue order
};

inline RrrParts rrr_parts(const Matrix& design, const Matrix& response) {
    if (design.rows() != response.rows())
        throw ShapeMismatch("rrr: design and response row counts disagree");
    const Eigen::Index n = design.rows();
    const Eigen::Index a = design.cols();
    const Eigen::Index b = response.cols();
    if (n <= std::max(a, b))
        throw BadArgument("rrr: needs more rows than either column dimension");

    RrrParts parts;
    {
        SymPosDef gram(design.transpose() * design);
        parts.b_ols = gram.solve(design.transpose() * response);
    }
    const Matrix resid = response - design * parts.b_ols;
    SymPosDef resid_cov(Matrix(resid.transpose() * resid / double(n)));
    parts.whiten = spd_inverse(spd_sqrt(resid_cov)).matrix();
    parts.unwhiten = spd_sqrt(resid_cov).matrix();

    const Matrix fitted = design * parts.b_ols;
    const Matrix m =
        parts.whiten * (fitted.transpose() * fitted) * parts.whiten;
    parts.vectors = sym_eigen(m).vectors;
    return parts;
}

inline Matrix rrr_coef_from_parts(const RrrParts& parts, int rank) {
    const Eigen::Index b = parts.vectors.rows();
    if (rank == 0) return Matrix::Zero(parts.b_ols.rows(), b);
    const Matrix vr = parts.vectors.leftCols(rank);
    return parts.b_ols * parts.whiten * vr * (vr.transpose() * parts.unwhiten);
}

}  // namespace detail

/// Normal-likelihood reduced-rank regression, closed form: whiten the
/// responses by the OLS residual covariance, project the coefficient matrix
/// onto the leading eigenvectors of the whitened fitted second-moment
/// matrix, and invert the resulting residual covariance. rank 0 gives the
/// zero fit, full rank recovers OLS.
inline RrrFit rrr_fit(const Matrix& design, const Matrix& response, int rank) {
    const Eigen::Index a = design.cols();
    const Eigen::Index b = response.cols();
    if (rank < 0 || rank > std::min(a, b))
        throw RankTooLarge("rrr_fit: rank outside [0, min(dim_design, dim_response)]");
    const detail::RrrParts parts = detail::rrr_parts(design, response);

    Matrix coef = detail::rrr_coef_from_parts(parts, rank);
    const Matrix resid = response - design * coef;
    const double n = double(design.rows());
    const Matrix resid_cov = resid.transpose() * resid / n;
    auto precision = [&] {
        try {
            return spd_inverse(SymPosDef(resid_cov));
        } catch (const NotPositiveDefinite&) {
            throw Singular("rrr_fit: rank-constrained residual covariance is singular");
        }
    }();
    const double objective =
        resid_cov.cwiseProduct(precision.matrix()).sum() - precision.log_det();
    return RrrFit{std::move(coef), std::move(precision), rank, objective};
}

/// All coefficient matrices for ranks 0..min(a, b), one factorization.
inline std::vector<Matrix> rrr_coef_path(const Matrix& design, const Matrix& response) {
    const int rmax = int(std::min(design.cols(), response.cols()));
    const detail::RrrParts parts = detail::rrr_parts(design, response);
    std::vector<Matrix> coefs;
    coefs.reserve(rmax + 1);
    for (int r = 0; r <= rmax; ++r)
        coefs.push_back(detail::rrr_coef_from_parts(parts, r));
    return coefs;
}

/// Inverse orientation (predictors regressed on responses): coef is q x p.
inline RrrFit rrr_inverse(const Dataset& data, int rank) {
    return rrr_fit(data.y, data.x, rank);
}

/// Forward orientation: coef is p x q.
inline RrrFit rrr_forward(const Dataset& data, int rank) {
    return rrr_fit(data.x, data.y, rank);
}

}  // namespace ireg
