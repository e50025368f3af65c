#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ireg/lasso.hpp"
#include "ireg/linalg.hpp"
#include "ireg/matrix.hpp"
#include "ireg/precision.hpp"
#include "ireg/ridge.hpp"
#include "ireg/rrr.hpp"
#include "ireg/simgen.hpp"
#include "ireg/tuning.hpp"

namespace ireg {

/// The three plug-ins of the indirect construction: the inverse-regression
/// coefficients eta (q x p) and positive definite estimates of the inverse
/// conditional covariance of X given Y (p x p) and the inverse marginal
/// covariance of Y (q x q).
struct InversePlugins {
    Matrix eta;
    SymPosDef delta_inv;
    SymPosDef sigma_yy_inv;
};

/// Forward coefficients from inverse-regression plug-ins:
///     beta = Dinv eta' (Syyinv + eta Dinv eta')^{-1},
/// solved through a Cholesky factorization of the inner matrix (positive
/// definite whenever the plug-ins are). The result inherits the rank of eta.
inline Matrix assemble_beta(const InversePlugins& pl) {
    const Eigen::Index p = pl.delta_inv.dim();
    const Eigen::Index q = pl.sigma_yy_inv.dim();
    if (pl.eta.rows() != q || pl.eta.cols() != p)
        throw ShapeMismatch("assemble_beta: eta must be q x p");
    const Matrix c = pl.delta_inv.matrix() * pl.eta.transpose();  // p x q
    Matrix inner = pl.sigma_yy_inv.matrix() + pl.eta * c;
    inner = ((inner + inner.transpose()) / 2.0).eval();
    const SymPosDef inner_spd(inner);
    return inner_spd.solve(c.transpose()).transpose();
}

inline int rank_of(const Matrix& a, double rel_tol = 1e-8) {
    return numeric_rank(a, rel_tol);
}

/// The estimators the benchmark knows how to run. Names below mirror the
/// report and CLI identifiers.
enum class EstimatorKind {
    IndirectLasso,        // I_L1
    IndirectSample,       // I_S
    IndirectLassoRidge,   // I_L2
    IndirectRank,         // I_r
    IndirectRankML,       // I_ML_r
    OracleBoth,           // O
    OracleDelta,          // O_delta
    OracleY,              // O_Y
    OracleBothRank,       // O_r
    OracleDeltaRank,      // O_delta_r
    OracleYRank,          // O_Y_r
    OlsPseudo,            // OLS_MP
    RidgeSingle,          // R
    RidgePerResponse,     // L2
    LassoPerResponse,     // L1
    ReducedRankForward,   // RR
};

inline const char* estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::IndirectLasso: return "I_L1";
        case EstimatorKind::IndirectSample: return "I_S";
        case EstimatorKind::IndirectLassoRidge: return "I_L2";
        case EstimatorKind::IndirectRank: return "I_r";
        case EstimatorKind::IndirectRankML: return "I_ML_r";
        case EstimatorKind::OracleBoth: return "O";
        case EstimatorKind::OracleDelta: return "O_delta";
        case EstimatorKind::OracleY: return "O_Y";
        case EstimatorKind::OracleBothRank: return "O_r";
        case EstimatorKind::OracleDeltaRank: return "O_delta_r";
        case EstimatorKind::OracleYRank: return "O_Y_r";
        case EstimatorKind::OlsPseudo: return "OLS_MP";
        case EstimatorKind::RidgeSingle: return "R";
        case EstimatorKind::RidgePerResponse: return "L2";
        case EstimatorKind::LassoPerResponse: return "L1";
        case EstimatorKind::ReducedRankForward: return "RR";
    }
    throw BadArgument("estimator_name: unknown kind");
}

inline std::vector<EstimatorKind> all_estimators() {
    return {EstimatorKind::IndirectLasso,      EstimatorKind::IndirectSample,
            EstimatorKind::IndirectLassoRidge, EstimatorKind::IndirectRank,
            EstimatorKind::IndirectRankML,     EstimatorKind::OracleBoth,
            EstimatorKind::OracleDelta,        EstimatorKind::OracleY,
            EstimatorKind::OracleBothRank,     EstimatorKind::OracleDeltaRank,
            EstimatorKind::OracleYRank,        EstimatorKind::OlsPseudo,
            EstimatorKind::RidgeSingle,        EstimatorKind::RidgePerResponse,
            EstimatorKind::LassoPerResponse,   EstimatorKind::ReducedRankForward};
}

inline EstimatorKind parse_estimator(const std::string& name) {
    for (EstimatorKind kind : all_estimators())
        if (name == estimator_name(kind)) return kind;
    throw BadArgument("unknown estimator name: " + name);
}

inline bool needs_oracle(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::OracleBoth:
        case EstimatorKind::OracleDelta:
        case EstimatorKind::OracleY:
        case EstimatorKind::OracleBothRank:
        case EstimatorKind::OracleDeltaRank:
        case EstimatorKind::OracleYRank:
            return true;
        default:
            return false;
    }
}

/// Tuning decisions and warnings attached to a fitted estimator.
struct FitMetadata {
    std::vector<std::pair<std::string, double>> params;
    std::vector<std::string> notes;
};

struct BetaEstimate {
    Matrix beta;       // p x q
    Vector intercept;  // q, recovered from the training means
    FitMetadata metadata;
};

/// Fits every registered estimator on one dataset, sharing the expensive
/// intermediates: the per-column lasso inverse regression and its tuning, the
/// penalized precision fits, the reduced-rank fits, and a single fold plan.
/// Not thread-safe; use one context per dataset per thread.
class FitContext {
  public:
    FitContext(const Dataset& data, const JointGroundTruth* truth, Grid grid,
               uint64_t fold_seed, int folds = 5)
        : data_(data),
          truth_(truth),
          grid_(std::move(grid)),
          plan_(make_folds(data.n(), folds, fold_seed)) {}

    const FoldPlan& plan() const { return plan_; }
    const Grid& grid() const { return grid_; }

    BetaEstimate fit(EstimatorKind kind) {
        switch (kind) {
            case EstimatorKind::IndirectLasso: {
                FitMetadata meta;
                const auto& el = eta_l1(&meta);
                InversePlugins pl{el.eta, glasso_delta_l1(&meta), glasso_yy(&meta)};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::IndirectSample: {
                FitMetadata meta;
                const auto& el = eta_l1(&meta);
                InversePlugins pl{el.eta, sample_delta_inv(), sample_syy_inv()};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::IndirectLassoRidge: {
                FitMetadata meta;
                const auto& el = eta_l1(&meta);
                InversePlugins pl{el.eta, ridge_delta_l2(&meta), glasso_yy(&meta)};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::IndirectRank: {
                FitMetadata meta;
                const auto& rk = rank_inverse(&meta);
                InversePlugins pl{rk.fit.coef, glasso_delta_rr(&meta), glasso_yy(&meta)};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::IndirectRankML: {
                FitMetadata meta;
                const auto& rk = rank_inverse(&meta);
                InversePlugins pl{rk.fit.coef, rk.fit.precision, sample_syy_inv()};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::OracleBoth: {
                FitMetadata meta;
                const auto& el = eta_l1(&meta);
                InversePlugins pl{el.eta, oracle_delta_inv(), oracle_syy_inv()};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::OracleDelta: {
                FitMetadata meta;
                const auto& el = eta_l1(&meta);
                InversePlugins pl{el.eta, oracle_delta_inv(), glasso_yy(&meta)};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::OracleY: {
                FitMetadata meta;
                const auto& el = eta_l1(&meta);
                InversePlugins pl{el.eta, glasso_delta_l1(&meta), oracle_syy_inv()};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::OracleBothRank: {
                FitMetadata meta;
                const auto& rk = rank_inverse(&meta);
                InversePlugins pl{rk.fit.coef, oracle_delta_inv(), oracle_syy_inv()};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::OracleDeltaRank: {
                FitMetadata meta;
                const auto& rk = rank_inverse(&meta);
                InversePlugins pl{rk.fit.coef, oracle_delta_inv(), glasso_yy(&meta)};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::OracleYRank: {
                FitMetadata meta;
                const auto& rk = rank_inverse(&meta);
                InversePlugins pl{rk.fit.coef, glasso_delta_rr(&meta), oracle_syy_inv()};
                return finish(assemble_beta(pl), std::move(meta));
            }
            case EstimatorKind::OlsPseudo:
                return finish(ols(data_), FitMetadata{});
            case EstimatorKind::RidgeSingle: {
                FitMetadata meta;
                const CvChoice<double> choice = cv_ridge_single(data_, grid_, plan_);
                record(meta, "lambda", choice);
                return finish(ridge_ls(data_, choice.value), std::move(meta));
            }
            case EstimatorKind::RidgePerResponse: {
                FitMetadata meta;
                const auto choices = cv_ridge_per_response(data_, grid_, plan_);
                Vector lambdas(data_.q());
                for (Eigen::Index m = 0; m < data_.q(); ++m) {
                    lambdas(m) = choices[size_t(m)].value;
                    record(meta, "lambda_" + std::to_string(m), choices[size_t(m)]);
                }
                return finish(ridge_ls(data_, lambdas), std::move(meta));
            }
            case EstimatorKind::LassoPerResponse: {
                FitMetadata meta;
                Vector lambdas(data_.q());
                for (Eigen::Index m = 0; m < data_.q(); ++m) {
                    const CvChoice<double> choice =
                        cv_lasso_lambda(data_.x, data_.y.col(m), grid_, plan_);
                    lambdas(m) = choice.value;
                    record(meta, "lambda_" + std::to_string(m), choice);
                }
                return finish(lasso_forward(data_, lambdas), std::move(meta));
            }
            case EstimatorKind::ReducedRankForward: {
                FitMetadata meta;
                const auto& rk = rank_forward(&meta);
                return finish(rk.fit.coef, std::move(meta));
            }
        }
        throw BadArgument("FitContext::fit: unknown estimator kind");
    }

  private:
    struct EtaL1 {
        Matrix eta;
        Vector lambdas;
        std::vector<CvChoice<double>> choices;
    };
    struct RankFit {
        CvChoice<int> choice;
        RrrFit fit;
    };

    BetaEstimate finish(Matrix beta, FitMetadata meta) const {
        Vector intercept = data_.y_mean - beta.transpose() * data_.x_mean;
        return BetaEstimate{std::move(beta), std::move(intercept), std::move(meta)};
    }

    template <class T>
    static void record(FitMetadata& meta, const std::string& name, const CvChoice<T>& choice) {
        meta.params.emplace_back(name, double(choice.value));
        if (choice.at_edge) meta.notes.push_back("grid_edge:" + name);
    }

    const EtaL1& eta_l1(FitMetadata* meta) {
        if (!eta_l1_) {
            EtaL1 el;
            el.lambdas.resize(data_.p());
            el.choices.reserve(size_t(data_.p()));
            for (Eigen::Index j = 0; j < data_.p(); ++j) {
                el.choices.push_back(cv_lasso_lambda(data_.y, data_.x.col(j), grid_, plan_));
                el.lambdas(j) = el.choices.back().value;
            }
            el.eta = eta_lasso(data_, el.lambdas);
            eta_l1_ = std::move(el);
        }
        if (meta != nullptr)
            for (Eigen::Index j = 0; j < data_.p(); ++j)
                record(*meta, "lambda_eta_" + std::to_string(j),
                       eta_l1_->choices[size_t(j)]);
        return *eta_l1_;
    }

    const Matrix& resid_rows_l1() {
        if (!resid_rows_l1_)
            resid_rows_l1_ = data_.x - data_.y * eta_l1(nullptr).eta;
        return *resid_rows_l1_;
    }

    const Matrix& resid_rows_rank() {
        if (!resid_rows_rank_)
            resid_rows_rank_ = data_.x - data_.y * rank_inverse(nullptr).fit.coef;
        return *resid_rows_rank_;
    }

    static Matrix covariance_of(const Matrix& rows) {
        return rows.transpose() * rows / double(rows.rows());
    }

    // Penalized precision of the lasso inverse-regression residuals.
    const SymPosDef& glasso_delta_l1(FitMetadata* meta) {
        if (!glasso_delta_l1_) {
            const Matrix& rows = resid_rows_l1();
            gamma_delta_l1_ =
                cv_precision_gamma(rows, PrecisionPenalty::L1OffDiagonal, grid_, plan_);
            glasso_delta_l1_ = glasso(covariance_of(rows), gamma_delta_l1_->value);
        }
        if (meta != nullptr) record(*meta, "gamma_delta", *gamma_delta_l1_);
        return *glasso_delta_l1_;
    }

    // Penalized precision of the responses.
    const SymPosDef& glasso_yy(FitMetadata* meta) {
        if (!glasso_yy_) {
            gamma_yy_ =
                cv_precision_gamma(data_.y, PrecisionPenalty::L1OffDiagonal, grid_, plan_);
            glasso_yy_ = glasso(covariance_of(data_.y), gamma_yy_->value);
        }
        if (meta != nullptr) record(*meta, "gamma_yy", *gamma_yy_);
        return *glasso_yy_;
    }

    // Frobenius-penalized precision of the lasso residuals.
    const SymPosDef& ridge_delta_l2(FitMetadata* meta) {
        if (!ridge_delta_l2_) {
            const Matrix& rows = resid_rows_l1();
            gamma_delta_l2_ =
                cv_precision_gamma(rows, PrecisionPenalty::L2Frobenius, grid_, plan_);
            ridge_delta_l2_ = ridge_precision(covariance_of(rows), gamma_delta_l2_->value);
        }
        if (meta != nullptr) record(*meta, "gamma_delta", *gamma_delta_l2_);
        return *ridge_delta_l2_;
    }

    // Penalized precision of the reduced-rank inverse-regression residuals.
    const SymPosDef& glasso_delta_rank(FitMetadata* meta) {
        if (!glasso_delta_rank_) {
            const Matrix& rows = resid_rows_rank();
            gamma_delta_rank_ =
                cv_precision_gamma(rows, PrecisionPenalty::L1OffDiagonal, grid_, plan_);
            glasso_delta_rank_ = glasso(covariance_of(rows), gamma_delta_rank_->value);
        }
        if (meta != nullptr) record(*meta, "gamma_delta", *gamma_delta_rank_);
        return *glasso_delta_rank_;
    }
    const SymPosDef& glasso_delta_rr(FitMetadata* meta) { return glasso_delta_rank(meta); }

    const SymPosDef& sample_delta_inv() {
        if (!sample_delta_inv_) {
            try {
                sample_delta_inv_ = spd_inverse(SymPosDef(covariance_of(resid_rows_l1())));
            } catch (const NotPositiveDefinite&) {
                throw Singular("sample plug-in: residual covariance is not invertible");
            }
        }
        return *sample_delta_inv_;
    }

    const SymPosDef& sample_syy_inv() {
        if (!sample_syy_inv_) {
            try {
                sample_syy_inv_ = spd_inverse(SymPosDef(covariance_of(data_.y)));
            } catch (const NotPositiveDefinite&) {
                throw Singular("sample plug-in: response covariance is not invertible");
            }
        }
        return *sample_syy_inv_;
    }

    const SymPosDef& oracle_delta_inv() {
        if (truth_ == nullptr)
            throw MissingOracle("oracle plug-in requested without ground truth");
        if (!oracle_delta_inv_) oracle_delta_inv_ = spd_inverse(truth_->delta);
        return *oracle_delta_inv_;
    }

    const SymPosDef& oracle_syy_inv() {
        if (truth_ == nullptr)
            throw MissingOracle("oracle plug-in requested without ground truth");
        if (!oracle_syy_inv_) oracle_syy_inv_ = spd_inverse(truth_->sigma_yy);
        return *oracle_syy_inv_;
    }

    const RankFit& rank_inverse(FitMetadata* meta) {
        if (!rank_inverse_) {
            CvChoice<int> choice = cv_rank(data_.y, data_.x, plan_);
            RrrFit fit = rrr_inverse(data_, choice.value);
            rank_inverse_ = RankFit{std::move(choice), std::move(fit)};
        }
        if (meta != nullptr) record(*meta, "rank", rank_inverse_->choice);
        return *rank_inverse_;
    }

    const RankFit& rank_forward(FitMetadata* meta) {
        if (!rank_forward_) {
            CvChoice<int> choice = cv_rank(data_.x, data_.y, plan_);
            RrrFit fit = rrr_forward(data_, choice.value);
            rank_forward_ = RankFit{std::move(choice), std::move(fit)};
        }
        if (meta != nullptr) record(*meta, "rank", rank_forward_->choice);
        return *rank_forward_;
    }

    const Dataset& data_;
    const JointGroundTruth* truth_;
    Grid grid_;
    FoldPlan plan_;

    std::optional<EtaL1> eta_l1_;
    std::optional<Matrix> resid_rows_l1_;
    std::optional<Matrix> resid_rows_rank_;
    std::optional<CvChoice<double>> gamma_delta_l1_, gamma_yy_, gamma_delta_l2_,
        gamma_delta_rank_;
    std::optional<SymPosDef> glasso_delta_l1_, glasso_yy_, ridge_delta_l2_,
        glasso_delta_rank_;
    std::optional<SymPosDef> sample_delta_inv_, sample_syy_inv_;
    std::optional<SymPosDef> oracle_delta_inv_, oracle_syy_inv_;
    std::optional<RankFit> rank_inverse_, rank_forward_;
};

}  // namespace ireg
