#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "ireg/lasso.hpp"
#include "ireg/linalg.hpp"
#include "ireg/matrix.hpp"

namespace ireg {

struct GlassoOptions {
    double kkt_tol = 1e-8;      // on S - Omega^{-1}, scaled by max(1, max diag of S)
    double inner_tol = 1e-10;   // coordinate-change tolerance of the column lassos
    int max_sweeps = 2000;
    int max_inner_sweeps = 10000;
    double blowup = 1e12;       // abort when a column solution exceeds this
    // When > 0, give up once this many full sweeps pass without the
    // stationarity residual improving by at least 5%. Off by default so a
    // final fit stays as patient as the sweep cap allows; cross-validation
    // probes turn it on because a degenerate fold fit plateaus almost
    // immediately.
    int stall_sweeps = 0;
};

/// Warm-start state carried across calls with the same input matrix
/// (used along a descending penalty grid).
struct GlassoWarm {
    Matrix w;     // working covariance estimate
    Matrix b;     // (p-1) x p stacked column coefficients
    bool valid = false;
};

namespace detail {

// min_beta 1/2 beta' A beta - s'beta + gamma ||beta||_1 by coordinate descent.
inline void glasso_column_cd(const Matrix& a, const Vector& s, double gamma,
                             Vector& beta, const GlassoOptions& opts) {
    const Eigen::Index m = s.size();
    Vector grad = s - a * beta;
    for (int it = 0; it < opts.max_inner_sweeps; ++it) {
        double max_change = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            const double akk = a(k, k);
            if (akk <= 0.0) continue;
            const double old = beta(k);
            const double neu = soft_threshold(grad(k) + akk * old, gamma) / akk;
            if (neu != old) {
                grad.noalias() -= a.col(k) * (neu - old);
                beta(k) = neu;
                max_change = std::max(max_change, std::fabs(neu - old));
            }
        }
        const double bmax = m > 0 ? beta.cwiseAbs().maxCoeff() : 0.0;
        if (bmax > opts.blowup)
            throw NoConvergence("glasso: column subproblem diverged (near-singular block)");
        if (max_change <= opts.inner_tol * (1.0 + bmax)) return;
    }
    throw NoConvergence("glasso: column subproblem sweep cap reached");
}

// Largest stationarity violation of Omega for the off-diagonal-only penalty:
// zero on the diagonal of S - Omega^{-1}, within gamma where omega_jk = 0,
// equal to -gamma sgn(omega_jk) elsewhere.
inline double glasso_kkt_violation(const Matrix& s, const Matrix& omega, double gamma) {
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Eigen::Index p = s.rows();
    const Matrix resid = s - llt.solve(Matrix::Identity(p, p));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        worst = std::max(worst, std::fabs(resid(j, j)));
        for (Eigen::Index k = j + 1; k < p; ++k) {
            const double r = resid(j, k);
            if (omega(j, k) == 0.0)
                worst = std::max(worst, std::fabs(r) - gamma);
            else
                worst = std::max(worst, std::fabs(r + gamma * (omega(j, k) > 0 ? 1.0 : -1.0)));
        }
    }
    return worst;
}

}  // namespace detail

/// L1-penalized precision estimate: maximizes log det Omega - tr(S Omega)
/// - gamma * sum_{j != k} |omega_jk| by blockwise coordinate descent on the
/// working covariance W (one penalized quadratic program per column, diagonal
/// of W pinned to the diagonal of S). Convergence is declared on the
/// stationarity conditions of the recovered Omega. gamma = 0 requires a
/// positive definite input and short-circuits to a plain inverse.
inline SymPosDef glasso(const Matrix& s_in, double gamma, const GlassoOptions& opts = {},
                        GlassoWarm* warm = nullptr) {
    if (gamma < 0.0) throw BadArgument("glasso: gamma must be >= 0");
    if (s_in.rows() != s_in.cols()) throw NonSymmetric("glasso: input must be square");
    const Eigen::Index p = s_in.rows();
    const Matrix s = ((s_in + s_in.transpose()) / 2.0).eval();
    for (Eigen::Index j = 0; j < p; ++j)
        if (!(s(j, j) > 0.0)) throw BadArgument("glasso: diagonal entries must be positive");

    if (gamma == 0.0) {
        try {
            return spd_inverse(SymPosDef(s));
        } catch (const NotPositiveDefinite&) {
            throw Singular("glasso: gamma = 0 needs a positive definite input");
        }
    }
    if (p == 1) return SymPosDef(Matrix::Constant(1, 1, 1.0 / s(0, 0)));

    Matrix w;
    Matrix b;
    if (warm != nullptr && warm->valid && warm->w.rows() == p) {
        w = warm->w;
        b = warm->b;
        for (Eigen::Index j = 0; j < p; ++j) w(j, j) = s(j, j);
    } else {
        w = s;
        b = Matrix::Zero(p - 1, p);
    }

    const double kkt_scale = std::max(1.0, s.diagonal().maxCoeff());
    Matrix a(p - 1, p - 1);
    Vector s12(p - 1), beta(p - 1), w12(p - 1);
    Matrix omega(p, p);

    double best_violation = std::numeric_limits<double>::infinity();
    int sweeps_since_improve = 0;

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        for (Eigen::Index j = 0; j < p; ++j) {
            Eigen::Index r = 0;
            for (Eigen::Index k = 0; k < p; ++k) {
                if (k == j) continue;
                s12(r) = s(k, j);
                Eigen::Index c = 0;
                for (Eigen::Index l = 0; l < p; ++l) {
                    if (l == j) continue;
                    a(r, c) = w(k, l);
                    ++c;
                }
                ++r;
            }
            beta = b.col(j);
            detail::glasso_column_cd(a, s12, gamma, beta, opts);
            b.col(j) = beta;
            w12.noalias() = a * beta;
            r = 0;
            for (Eigen::Index k = 0; k < p; ++k) {
                if (k == j) continue;
                w(k, j) = w12(r);
                w(j, k) = w12(r);
                ++r;
            }
        }

        // Recover Omega from (W, B) and test its stationarity conditions.
        bool ok = true;
        for (Eigen::Index j = 0; j < p && ok; ++j) {
            double dot = 0.0;
            Eigen::Index r = 0;
            for (Eigen::Index k = 0; k < p; ++k) {
                if (k == j) continue;
                dot += w(k, j) * b(r, j);
                ++r;
            }
            const double denom = w(j, j) - dot;
            if (!(denom > 0.0)) {
                ok = false;
                break;
            }
            const double ojj = 1.0 / denom;
            omega(j, j) = ojj;
            r = 0;
            for (Eigen::Index k = 0; k < p; ++k) {
                if (k == j) continue;
                omega(k, j) = -b(r, j) * ojj;
                ++r;
            }
        }
        // A sweep that cannot even recover a positive diagonal counts as
        // non-improving, so a run of them trips the stall check too.
        double v = std::numeric_limits<double>::infinity();
        if (ok) {
            const Matrix omega_sym = ((omega + omega.transpose()) / 2.0).eval();
            v = detail::glasso_kkt_violation(s, omega_sym, gamma);
            if (v <= opts.kkt_tol * kkt_scale) {
                if (warm != nullptr) {
                    warm->w = w;
                    warm->b = b;
                    warm->valid = true;
                }
                return SymPosDef(omega_sym);
            }
        }
        if (v < 0.95 * best_violation) {
            best_violation = v;
            sweeps_since_improve = 0;
        } else if (opts.stall_sweeps > 0 && ++sweeps_since_improve >= opts.stall_sweeps) {
            throw NoConvergence("glasso: stationarity residual stopped improving");
        }
    }
    throw NoConvergence("glasso: sweep cap reached before stationarity");
}

/// Closed-form minimizer of tr(S Omega) - log det Omega + gamma ||Omega||_F^2
/// over positive definite Omega: share the eigenbasis of S and solve the
/// per-eigenvalue quadratic, theta_j = (-d_j + sqrt(d_j^2 + 8 gamma)) / (4 gamma).
inline SymPosDef ridge_precision(const Matrix& s_in, double gamma) {
    if (!(gamma > 0.0)) throw BadArgument("ridge_precision: gamma must be > 0");
    if (s_in.rows() != s_in.cols()) throw NonSymmetric("ridge_precision: input must be square");
    const SymEigen es = sym_eigen(s_in);
    Vector theta(es.values.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double d = es.values(j);
        theta(j) = (-d + std::sqrt(d * d + 8.0 * gamma)) / (4.0 * gamma);
    }
    const Matrix omega =
        es.vectors * theta.asDiagonal() * es.vectors.transpose();
    return SymPosDef(omega);
}

/// Frobenius norm of the ridge-precision stationarity residual S - Omega^{-1} + 2 gamma Omega.
inline double ridge_precision_residual(const Matrix& s, const SymPosDef& omega, double gamma) {
    const Matrix inv = spd_inverse(omega).matrix();
    return (((s + s.transpose()) / 2.0) - inv + 2.0 * gamma * omega.matrix()).norm();
}

}  // namespace ireg
