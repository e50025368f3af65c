#pragma once

#include <cstdint>
#include <utility>

#include "ireg/linalg.hpp"
#include "ireg/matrix.hpp"
#include "ireg/rng.hpp"

namespace ireg {

struct Ar1Spec {
    Eigen::Index dim;
    double rho;
};

/// AR(1) covariance: entry (i,j) = rho^|i-j|.
inline SymPosDef ar1(const Ar1Spec& spec) {
    if (!(std::fabs(spec.rho) < 1.0))
        throw BadArgument("ar1: |rho| must be < 1");
    if (spec.dim < 1) throw BadArgument("ar1: dim must be >= 1");
    Matrix m(spec.dim, spec.dim);
    for (Eigen::Index i = 0; i < spec.dim; ++i)
        for (Eigen::Index j = 0; j < spec.dim; ++j)
            m(i, j) = i == j ? 1.0 : std::pow(spec.rho, std::abs(static_cast<long>(i - j)));
    return SymPosDef(std::move(m));
}

/// Centered data with the removed column means retained for intercepts.
struct Dataset {
    Matrix x;  // n x p, column means removed
    Matrix y;  // n x q, column means removed
    Vector x_mean;
    Vector y_mean;

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }
    Eigen::Index q() const { return y.cols(); }
};

inline Dataset center(const Matrix& raw_x, const Matrix& raw_y) {
    if (raw_x.rows() != raw_y.rows())
        throw ShapeMismatch("center: predictor and response row counts differ");
    if (raw_x.rows() < 2) throw ShapeMismatch("center: need at least 2 rows");
    Dataset d;
    d.x_mean = raw_x.colwise().mean();
    d.y_mean = raw_y.colwise().mean();
    d.x = raw_x.rowwise() - d.x_mean.transpose();
    d.y = raw_y.rowwise() - d.y_mean.transpose();
    return d;
}

/// True generative parameters of the joint model, in both orientations.
/// mu is fixed at zero for all simulated designs.
struct JointGroundTruth {
    Matrix eta;           // q x p, inverse regression coefficients
    SymPosDef delta;      // p x p, inverse regression error covariance
    SymPosDef sigma_yy;   // q x q
    Matrix beta;          // p x q, forward regression coefficients
    SymPosDef sigma_xx;   // p x p
    SymPosDef sigma_e;    // q x q, forward regression error covariance
};

/// n i.i.d. rows from N(0, cov), via the Cholesky factor of cov applied to
/// standard normals drawn row-major.
inline Matrix sample_mvn(const SymPosDef& cov, Eigen::Index n, Xoshiro256pp& rng) {
    if (n < 1) throw BadArgument("sample_mvn: n must be >= 1");
    Matrix g(n, cov.dim());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < cov.dim(); ++j) g(i, j) = rng.normal();
    return g * cov.lower_factor().transpose();
}

inline Matrix sample_mvn(const SymPosDef& cov, Eigen::Index n, std::uint64_t seed) {
    Xoshiro256pp rng(seed);
    return sample_mvn(cov, n, rng);
}

struct SparseInverseModelSpec {
    Eigen::Index n, p, q;
    double rho_y;
    double rho_delta;
    double s_star;  // Bernoulli density of nonzero eta entries, in (0, 1]
    std::uint64_t seed;
};

struct ReducedRankInverseModelSpec {
    Eigen::Index n, p, q;
    double rho_y;
    double rho_delta;
    Eigen::Index r_star;
    std::uint64_t seed;
};

struct ReducedRankForwardModelSpec {
    Eigen::Index n, p, q;
    double rho_x;
    double rho_e;
    Eigen::Index r_star;
    std::uint64_t seed;
};

namespace detail {

// Stream roles under a model seed. Truth parameters and noise use disjoint
// streams so the same truth can be replayed with fresh noise if needed.
inline constexpr std::uint64_t kTruthStream = 0;
inline constexpr std::uint64_t kDataStream = 1;

/// Completes an inverse-orientation truth (eta, delta, sigma_yy given).
inline JointGroundTruth truth_from_inverse(Matrix eta, SymPosDef delta, SymPosDef sigma_yy) {
    Matrix sxx = delta.matrix() + eta.transpose() * sigma_yy.matrix() * eta;
    Matrix sxy = eta.transpose() * sigma_yy.matrix();  // p x q
    SymPosDef sigma_xx(std::move(sxx), 1e-8);
    Matrix beta = sigma_xx.solve(sxy);
    Matrix se = sigma_yy.matrix() - sxy.transpose() * sigma_xx.solve(sxy);
    return JointGroundTruth{std::move(eta),      std::move(delta), std::move(sigma_yy),
                            std::move(beta),     std::move(sigma_xx),
                            SymPosDef(std::move(se), 1e-8)};
}

/// Completes a forward-orientation truth (beta, sigma_xx, sigma_e given).
inline JointGroundTruth truth_from_forward(Matrix beta, SymPosDef sigma_xx, SymPosDef sigma_e) {
    Matrix sxy = sigma_xx.matrix() * beta;  // p x q
    Matrix syy = beta.transpose() * sigma_xx.matrix() * beta + sigma_e.matrix();
    SymPosDef sigma_yy(std::move(syy), 1e-8);
    Matrix eta = sigma_yy.solve(sxy.transpose());  // q x p
    Matrix delta = sigma_xx.matrix() - sxy * sigma_yy.solve(sxy.transpose());
    return JointGroundTruth{std::move(eta),  SymPosDef(std::move(delta), 1e-8),
                            std::move(sigma_yy), std::move(beta),
                            std::move(sigma_xx), std::move(sigma_e)};
}

}  // namespace detail

/// Sparse inverse design: eta* = Z o A with Z standard normal and A
/// Bernoulli(s_star); Y ~ N(0, AR1(rho_y)), X|Y = eta*'y + N(0, AR1(rho_delta)).
inline std::pair<JointGroundTruth, Dataset> generate(const SparseInverseModelSpec& spec) {
    if (!(spec.s_star > 0.0 && spec.s_star <= 1.0))
        throw BadArgument("generate: s_star must lie in (0, 1]");
    Xoshiro256pp truth_rng(derive_stream(spec.seed, detail::kTruthStream));
    Xoshiro256pp data_rng(derive_stream(spec.seed, detail::kDataStream));

    Matrix eta(spec.q, spec.p);
    for (Eigen::Index i = 0; i < spec.q; ++i)
        for (Eigen::Index j = 0; j < spec.p; ++j) eta(i, j) = truth_rng.normal();
    for (Eigen::Index i = 0; i < spec.q; ++i)
        for (Eigen::Index j = 0; j < spec.p; ++j)
            if (!truth_rng.bernoulli(spec.s_star)) eta(i, j) = 0.0;

    SymPosDef sigma_yy = ar1({spec.q, spec.rho_y});
    SymPosDef delta = ar1({spec.p, spec.rho_delta});
    Matrix y = sample_mvn(sigma_yy, spec.n, data_rng);
    Matrix x = y * eta + sample_mvn(delta, spec.n, data_rng);
    return {detail::truth_from_inverse(std::move(eta), std::move(delta), std::move(sigma_yy)),
            center(x, y)};
}

/// Reduced-rank inverse design: eta* = P Q with standard normal factors.
inline std::pair<JointGroundTruth, Dataset> generate(const ReducedRankInverseModelSpec& spec) {
    if (spec.r_star < 1 || spec.r_star > std::min(spec.p, spec.q))
        throw BadArgument("generate: r_star must lie in [1, min(p,q)]");
    Xoshiro256pp truth_rng(derive_stream(spec.seed, detail::kTruthStream));
    Xoshiro256pp data_rng(derive_stream(spec.seed, detail::kDataStream));

    Matrix fac_p(spec.q, spec.r_star);
    for (Eigen::Index i = 0; i < fac_p.rows(); ++i)
        for (Eigen::Index j = 0; j < fac_p.cols(); ++j) fac_p(i, j) = truth_rng.normal();
    Matrix fac_q(spec.r_star, spec.p);
    for (Eigen::Index i = 0; i < fac_q.rows(); ++i)
        for (Eigen::Index j = 0; j < fac_q.cols(); ++j) fac_q(i, j) = truth_rng.normal();
    Matrix eta = fac_p * fac_q;

    SymPosDef sigma_yy = ar1({spec.q, spec.rho_y});
    SymPosDef delta = ar1({spec.p, spec.rho_delta});
    Matrix y = sample_mvn(sigma_yy, spec.n, data_rng);
    Matrix x = y * eta + sample_mvn(delta, spec.n, data_rng);
    return {detail::truth_from_inverse(std::move(eta), std::move(delta), std::move(sigma_yy)),
            center(x, y)};
}

/// Reduced-rank forward design: beta* = Z Q with Z standard normal and Q
/// Uniform(-1/4, 1/4); X ~ N(0, AR1(rho_x)), Y|X = beta*'x + N(0, AR1(rho_e)).
inline std::pair<JointGroundTruth, Dataset> generate(const ReducedRankForwardModelSpec& spec) {
    if (spec.r_star < 1 || spec.r_star > std::min(spec.p, spec.q))
        throw BadArgument("generate: r_star must lie in [1, min(p,q)]");
    Xoshiro256pp truth_rng(derive_stream(spec.seed, detail::kTruthStream));
    Xoshiro256pp data_rng(derive_stream(spec.seed, detail::kDataStream));

    Matrix fac_z(spec.p, spec.r_star);
    for (Eigen::Index i = 0; i < fac_z.rows(); ++i)
        for (Eigen::Index j = 0; j < fac_z.cols(); ++j) fac_z(i, j) = truth_rng.normal();
    Matrix fac_q(spec.r_star, spec.q);
    for (Eigen::Index i = 0; i < fac_q.rows(); ++i)
        for (Eigen::Index j = 0; j < fac_q.cols(); ++j)
            fac_q(i, j) = truth_rng.uniform(-0.25, 0.25);
    Matrix beta = fac_z * fac_q;

    SymPosDef sigma_xx = ar1({spec.p, spec.rho_x});
    SymPosDef sigma_e = ar1({spec.q, spec.rho_e});
    Matrix x = sample_mvn(sigma_xx, spec.n, data_rng);
    Matrix y = x * beta + sample_mvn(sigma_e, spec.n, data_rng);
    return {detail::truth_from_forward(std::move(beta), std::move(sigma_xx), std::move(sigma_e)),
            center(x, y)};
}

}  // namespace ireg
