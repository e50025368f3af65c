#pragma once

#include "ireg/linalg.hpp"
#include "ireg/matrix.hpp"
#include "ireg/simgen.hpp"

namespace ireg {

/// Least-squares coefficients Y on X; falls back to the minimum-norm
/// (pseudoinverse) solution when X'X is rank deficient or n <= p.
inline Matrix ols(const Dataset& data) {
    if (data.n() > data.p()) {
        try {
            const SymPosDef gram(data.x.transpose() * data.x);
            return gram.solve(data.x.transpose() * data.y);
        } catch (const NotPositiveDefinite&) {
            // fall through to the pseudoinverse
        }
    }
    return pseudo_inverse(data.x) * data.y;
}

/// Ridge solution (X'X + lambda_m I) beta_m = X'y_m with one penalty per
/// response column; computed in the eigenbasis of X'X so a whole penalty
/// grid costs one factorization.
inline Matrix ridge_ls(const Dataset& data, const Vector& lambdas) {
    if (lambdas.size() != data.q())
        throw ShapeMismatch("ridge_ls: need one lambda per response column");
    const Matrix gram = data.x.transpose() * data.x;
    const SymEigen es = sym_eigen(gram);
    const Matrix xty = data.x.transpose() * data.y;  // p x q
    const Matrix rot = es.vectors.transpose() * xty;
    Matrix beta(data.p(), data.q());
    for (Eigen::Index m = 0; m < data.q(); ++m) {
        const double lam = lambdas(m);
        if (lam < 0.0) throw BadArgument("ridge_ls: lambda must be >= 0");
        Vector scaled(data.p());
        for (Eigen::Index j = 0; j < data.p(); ++j) {
            const double denom = es.values(j) + lam;
            if (!(denom > 0.0))
                throw Singular("ridge_ls: lambda = 0 with a singular gram matrix");
            scaled(j) = rot(j, m) / denom;
        }
        beta.col(m) = es.vectors * scaled;
    }
    return beta;
}

/// Single shared penalty across all responses.
inline Matrix ridge_ls(const Dataset& data, double lambda) {
    return ridge_ls(data, Vector::Constant(data.q(), lambda));
}

}  // namespace ireg
