#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ireg/lasso.hpp"
#include "ireg/linalg.hpp"
#include "ireg/matrix.hpp"
#include "ireg/precision.hpp"
#include "ireg/ridge.hpp"
#include "ireg/rng.hpp"
#include "ireg/rrr.hpp"
#include "ireg/simgen.hpp"

namespace ireg {

/// Ascending penalty grid. The default spans 10^-8 .. 10^8 in half-decade
/// steps (33 points).
struct Grid {
    std::vector<double> values;

    static Grid default_grid() {
        Grid g;
        g.values.reserve(33);
        for (int k = 0; k <= 32; ++k)
            g.values.push_back(std::pow(10.0, -8.0 + 0.5 * double(k)));
        return g;
    }
};

/// Assignment of rows to cross-validation folds, sizes differing by at most one.
struct FoldPlan {
    int folds = 0;
    std::vector<int> assignment;  // assignment[i] in [0, folds)

    std::vector<int> train_rows(int fold) const {
        std::vector<int> out;
        for (int i = 0; i < int(assignment.size()); ++i)
            if (assignment[i] != fold) out.push_back(i);
        return out;
    }
    std::vector<int> validation_rows(int fold) const {
        std::vector<int> out;
        for (int i = 0; i < int(assignment.size()); ++i)
            if (assignment[i] == fold) out.push_back(i);
        return out;
    }
};

inline FoldPlan make_folds(Eigen::Index n, int folds, uint64_t seed) {
    if (folds < 2 || Eigen::Index(folds) > n)
        throw BadArgument("make_folds: need 2 <= folds <= n");
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Xoshiro256pp rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i)
        std::swap(perm[size_t(i)], perm[rng.below(uint64_t(i) + 1)]);
    FoldPlan plan;
    plan.folds = folds;
    plan.assignment.assign(size_t(n), 0);
    for (Eigen::Index i = 0; i < n; ++i)
        plan.assignment[size_t(perm[size_t(i)])] = int(i % folds);
    return plan;
}

/// A tuning decision: the winning grid value, its index, the per-grid-point
/// cross-validation scores, and whether the winner sits on a grid endpoint.
template <class T>
struct CvChoice {
    T value{};
    int index = -1;
    std::vector<double> scores;
    bool at_edge = false;
};

namespace detail {

inline Matrix take_rows(const Matrix& m, const std::vector<int>& idx) {
    Matrix out(Eigen::Index(idx.size()), m.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = m.row(idx[size_t(i)]);
    return out;
}

// Smallest score wins; among exact ties the largest grid value (highest
// index) is kept so penalised fits never lose a coin flip to rougher ones.
inline int pick_largest_tied(const std::vector<double>& scores) {
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < int(scores.size()); ++i) {
        const double s = scores[size_t(i)];
        if (std::isfinite(s) && s <= best_score) {
            best_score = s;
            best = i;
        }
    }
    return best;
}

inline int pick_smallest_tied(const std::vector<double>& scores) {
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < int(scores.size()); ++i) {
        const double s = scores[size_t(i)];
        if (std::isfinite(s) && s < best_score) {
            best_score = s;
            best = i;
        }
    }
    return best;
}

}  // namespace detail

/// Five-fold style prediction cross-validation of one lasso regression of
/// target on design. Folds are re-centered by training-fold means before
/// fitting and scoring; the penalty path runs large-to-small with warm
/// starts. Score is the summed validation squared error.
inline CvChoice<double> cv_lasso_lambda(const Matrix& design, const Vector& target,
                                        const Grid& grid, const FoldPlan& plan,
                                        const LassoOptions& opts = {}) {
    if (grid.values.empty()) throw BadArgument("cv_lasso_lambda: empty grid");
    if (design.rows() != target.size() ||
        Eigen::Index(plan.assignment.size()) != design.rows())
        throw ShapeMismatch("cv_lasso_lambda: rows of design, target, fold plan disagree");
    const int g = int(grid.values.size());
    std::vector<double> scores(size_t(g), 0.0);

    // Fold fits are probes: they only have to score a grid point, so they run
    // under a bounded sweep budget with stall detection on, and a grid point
    // that exceeds either is marked unusable for that fold, like any other
    // degenerate fit. The final refit at the selected value runs under the
    // caller's full budget.
    LassoOptions probe = opts;
    probe.max_sweeps = std::min(probe.max_sweeps, 30000);
    if (probe.stall_sweeps <= 0) probe.stall_sweeps = 2000;

    for (int fold = 0; fold < plan.folds; ++fold) {
        const auto tr = plan.train_rows(fold);
        const auto va = plan.validation_rows(fold);
        Matrix dtr = detail::take_rows(design, tr);
        Matrix dva = detail::take_rows(design, va);
        const Eigen::RowVectorXd dmean = dtr.colwise().mean();
        dtr.rowwise() -= dmean;
        dva.rowwise() -= dmean;
        Vector ttr(Eigen::Index(tr.size())), tva(Eigen::Index(va.size()));
        for (Eigen::Index i = 0; i < ttr.size(); ++i) ttr(i) = target(tr[size_t(i)]);
        for (Eigen::Index i = 0; i < tva.size(); ++i) tva(i) = target(va[size_t(i)]);
        const double tmean = ttr.mean();
        ttr.array() -= tmean;
        tva.array() -= tmean;

        const Matrix gram = dtr.transpose() * dtr;
        const Vector xty = dtr.transpose() * ttr;
        Vector warm = Vector::Zero(design.cols());
        bool have_warm = false;
        for (int gi = g - 1; gi >= 0; --gi) {
            try {
                warm = lasso_gram(gram, xty, grid.values[size_t(gi)],
                                  have_warm ? &warm : nullptr, probe);
                have_warm = true;
                scores[size_t(gi)] += (tva - dva * warm).squaredNorm();
            } catch (const NoConvergence&) {
                scores[size_t(gi)] = std::numeric_limits<double>::infinity();
                // keep the last good iterate as the next warm start; a cold
                // restart at an even smaller penalty is strictly worse
            }
        }
    }

    const int best = detail::pick_largest_tied(scores);
    if (best < 0) throw NoConvergence("cv_lasso_lambda: no grid point converged");
    return CvChoice<double>{grid.values[size_t(best)], best, std::move(scores),
                            best == 0 || best == g - 1};
}

enum class PrecisionPenalty { L1OffDiagonal, L2Frobenius };

/// Validation-likelihood cross-validation of a penalized precision estimate.
/// rows holds one observation per row; per fold, the penalized inverse of the
/// training covariance is scored by tr(Omega S_val) - log det Omega, where
/// S_val is the validation covariance centered at the training-fold mean.
/// A fold where the solver fails marks that grid point unusable.
inline CvChoice<double> cv_precision_gamma(const Matrix& rows, PrecisionPenalty penalty,
                                           const Grid& grid, const FoldPlan& plan,
                                           const GlassoOptions& opts = {}) {
    if (grid.values.empty()) throw BadArgument("cv_precision_gamma: empty grid");
    if (Eigen::Index(plan.assignment.size()) != rows.rows())
        throw ShapeMismatch("cv_precision_gamma: fold plan does not match row count");
    const int g = int(grid.values.size());
    const Eigen::Index p = rows.cols();
    std::vector<double> scores(size_t(g), 0.0);

    for (int fold = 0; fold < plan.folds; ++fold) {
        const auto tr = plan.train_rows(fold);
        const auto va = plan.validation_rows(fold);
        Matrix rtr = detail::take_rows(rows, tr);
        Matrix rva = detail::take_rows(rows, va);
        const Eigen::RowVectorXd mean = rtr.colwise().mean();
        rtr.rowwise() -= mean;
        rva.rowwise() -= mean;
        const Matrix s_tr = rtr.transpose() * rtr / double(rtr.rows());
        const Matrix s_va = rva.transpose() * rva / double(rva.rows());

        if (penalty == PrecisionPenalty::L2Frobenius) {
            // One eigendecomposition serves the whole grid.
            const SymEigen es = sym_eigen(s_tr);
            const Matrix s_va_rot = es.vectors.transpose() * s_va * es.vectors;
            for (int gi = 0; gi < g; ++gi) {
                const double gamma = grid.values[size_t(gi)];
                if (!(gamma > 0.0)) {
                    scores[size_t(gi)] = std::numeric_limits<double>::infinity();
                    continue;
                }
                double trace = 0.0, logdet = 0.0;
                for (Eigen::Index j = 0; j < p; ++j) {
                    const double d = es.values(j);
                    const double theta = (-d + std::sqrt(d * d + 8.0 * gamma)) / (4.0 * gamma);
                    trace += theta * s_va_rot(j, j);
                    logdet += std::log(theta);
                }
                scores[size_t(gi)] += trace - logdet;
            }
        } else {
            // Fold fits only have to score a grid point, so they run under a
            // bounded sweep budget with stall detection on; a grid point that
            // exceeds either is marked unusable for that fold, like any other
            // degenerate fit. Callers refit at the selected value under their
            // full budget.
            GlassoOptions probe = opts;
            probe.max_sweeps = std::min(probe.max_sweeps, 800);
            if (probe.stall_sweeps <= 0) probe.stall_sweeps = 100;
            GlassoWarm warm;
            for (int gi = g - 1; gi >= 0; --gi) {
                if (!std::isfinite(scores[size_t(gi)])) continue;
                try {
                    const SymPosDef omega = glasso(s_tr, grid.values[size_t(gi)], probe, &warm);
                    scores[size_t(gi)] +=
                        omega.matrix().cwiseProduct(s_va).sum() - omega.log_det();
                } catch (const Error&) {
                    scores[size_t(gi)] = std::numeric_limits<double>::infinity();
                    warm.valid = false;
                }
            }
        }
    }

    const int best = detail::pick_largest_tied(scores);
    if (best < 0)
        throw NoConvergence("cv_precision_gamma: no grid point produced a usable fit");
    return CvChoice<double>{grid.values[size_t(best)], best, std::move(scores),
                            best == 0 || best == g - 1};
}

/// Prediction cross-validation of the rank of a reduced-rank regression of
/// response on design, over ranks 0..min(dims). Ties prefer the smaller rank.
inline CvChoice<int> cv_rank(const Matrix& design, const Matrix& response,
                             const FoldPlan& plan) {
    if (design.rows() != response.rows() ||
        Eigen::Index(plan.assignment.size()) != design.rows())
        throw ShapeMismatch("cv_rank: rows of design, response, fold plan disagree");
    const int rmax = int(std::min(design.cols(), response.cols()));
    std::vector<double> scores(size_t(rmax) + 1, 0.0);

    for (int fold = 0; fold < plan.folds; ++fold) {
        const auto tr = plan.train_rows(fold);
        const auto va = plan.validation_rows(fold);
        Matrix dtr = detail::take_rows(design, tr);
        Matrix dva = detail::take_rows(design, va);
        Matrix rtr = detail::take_rows(response, tr);
        Matrix rva = detail::take_rows(response, va);
        const Eigen::RowVectorXd dmean = dtr.colwise().mean();
        const Eigen::RowVectorXd rmean = rtr.colwise().mean();
        dtr.rowwise() -= dmean;
        dva.rowwise() -= dmean;
        rtr.rowwise() -= rmean;
        rva.rowwise() -= rmean;
        const std::vector<Matrix> coefs = rrr_coef_path(dtr, rtr);
        for (int r = 0; r <= rmax; ++r)
            scores[size_t(r)] += (rva - dva * coefs[size_t(r)]).squaredNorm();
    }

    const int best = detail::pick_smallest_tied(scores);
    if (best < 0) throw NoConvergence("cv_rank: no rank produced a usable fit");
    return CvChoice<int>{best, best, std::move(scores), false};
}

/// Per-response validation squared-error curves of the ridge baseline:
/// entry (grid index, response) sums over folds. Shared across the
/// single-penalty and per-response tuners.
inline Matrix cv_ridge_curves(const Dataset& data, const Grid& grid, const FoldPlan& plan) {
    if (grid.values.empty()) throw BadArgument("cv_ridge_curves: empty grid");
    if (Eigen::Index(plan.assignment.size()) != data.n())
        throw ShapeMismatch("cv_ridge_curves: fold plan does not match row count");
    const int g = int(grid.values.size());
    Matrix scores = Matrix::Zero(g, data.q());

    for (int fold = 0; fold < plan.folds; ++fold) {
        const auto tr = plan.train_rows(fold);
        const auto va = plan.validation_rows(fold);
        Matrix xtr = detail::take_rows(data.x, tr);
        Matrix xva = detail::take_rows(data.x, va);
        Matrix ytr = detail::take_rows(data.y, tr);
        Matrix yva = detail::take_rows(data.y, va);
        const Eigen::RowVectorXd xmean = xtr.colwise().mean();
        const Eigen::RowVectorXd ymean = ytr.colwise().mean();
        xtr.rowwise() -= xmean;
        xva.rowwise() -= xmean;
        ytr.rowwise() -= ymean;
        yva.rowwise() -= ymean;

        const SymEigen es = sym_eigen(Matrix(xtr.transpose() * xtr));
        const Matrix rot = es.vectors.transpose() * (xtr.transpose() * ytr);
        const Matrix xva_rot = xva * es.vectors;
        for (int gi = 0; gi < g; ++gi) {
            const double lam = grid.values[size_t(gi)];
            for (Eigen::Index m = 0; m < data.q(); ++m) {
                Vector scaled(data.p());
                bool usable = true;
                for (Eigen::Index j = 0; j < data.p(); ++j) {
                    const double denom = es.values(j) + lam;
                    if (!(denom > 0.0)) {
                        usable = false;
                        break;
                    }
                    scaled(j) = rot(j, m) / denom;
                }
                if (!usable) {
                    scores(gi, m) = std::numeric_limits<double>::infinity();
                    continue;
                }
                scores(gi, m) += (yva.col(m) - xva_rot * scaled).squaredNorm();
            }
        }
    }
    return scores;
}

/// One shared ridge penalty, scored by total validation error over responses.
inline CvChoice<double> cv_ridge_single(const Dataset& data, const Grid& grid,
                                        const FoldPlan& plan) {
    const Matrix curves = cv_ridge_curves(data, grid, plan);
    std::vector<double> totals(size_t(curves.rows()));
    for (Eigen::Index gi = 0; gi < curves.rows(); ++gi)
        totals[size_t(gi)] = curves.row(gi).sum();
    const int best = detail::pick_largest_tied(totals);
    if (best < 0) throw NoConvergence("cv_ridge_single: no grid point produced a usable fit");
    return CvChoice<double>{grid.values[size_t(best)], best, std::move(totals),
                            best == 0 || best + 1 == int(grid.values.size())};
}

/// Independent ridge penalties, one per response column.
inline std::vector<CvChoice<double>> cv_ridge_per_response(const Dataset& data,
                                                           const Grid& grid,
                                                           const FoldPlan& plan) {
    const Matrix curves = cv_ridge_curves(data, grid, plan);
    std::vector<CvChoice<double>> out;
    out.reserve(size_t(data.q()));
    for (Eigen::Index m = 0; m < data.q(); ++m) {
        std::vector<double> col(size_t(curves.rows()));
        for (Eigen::Index gi = 0; gi < curves.rows(); ++gi) col[size_t(gi)] = curves(gi, m);
        const int best = detail::pick_largest_tied(col);
        if (best < 0)
            throw NoConvergence("cv_ridge_per_response: no grid point produced a usable fit");
        out.push_back(CvChoice<double>{grid.values[size_t(best)], best, std::move(col),
                                       best == 0 || best + 1 == int(grid.values.size())});
    }
    return out;
}

}  // namespace ireg
