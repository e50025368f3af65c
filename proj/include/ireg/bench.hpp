#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ireg/indirect.hpp"
#include "ireg/linalg.hpp"
#include "ireg/matrix.hpp"
#include "ireg/simgen.hpp"
#include "ireg/tuning.hpp"

namespace ireg {

enum class DesignFamily { SparseInverse, ReducedRankInverse, ReducedRankForward };

inline const char* design_name(DesignFamily family) {
    switch (family) {
        case DesignFamily::SparseInverse: return "sparse-inverse";
        case DesignFamily::ReducedRankInverse: return "rr-inverse";
        case DesignFamily::ReducedRankForward: return "rr-forward";
    }
    throw BadArgument("design_name: unknown family");
}

inline DesignFamily parse_design(const std::string& name) {
    if (name == "sparse-inverse") return DesignFamily::SparseInverse;
    if (name == "rr-inverse") return DesignFamily::ReducedRankInverse;
    if (name == "rr-forward") return DesignFamily::ReducedRankForward;
    throw BadArgument("unknown design name: " + name);
}

/// One simulation cell. Fields irrelevant to a family stay zero.
struct CellParams {
    Eigen::Index n = 0, p = 0, q = 0;
    double rho_y = 0.0, rho_delta = 0.0;  // inverse-orientation designs
    double rho_x = 0.0, rho_e = 0.0;      // forward-orientation design
    double s_star = 0.0;                  // sparse design only
    Eigen::Index r_star = 0;              // reduced-rank designs only
};

inline std::pair<JointGroundTruth, Dataset> generate_cell(DesignFamily family,
                                                          const CellParams& cell,
                                                          std::uint64_t seed) {
    switch (family) {
        case DesignFamily::SparseInverse:
            return generate(SparseInverseModelSpec{cell.n, cell.p, cell.q, cell.rho_y,
                                                   cell.rho_delta, cell.s_star, seed});
        case DesignFamily::ReducedRankInverse:
            return generate(ReducedRankInverseModelSpec{cell.n, cell.p, cell.q, cell.rho_y,
                                                        cell.rho_delta, cell.r_star, seed});
        case DesignFamily::ReducedRankForward:
            return generate(ReducedRankForwardModelSpec{cell.n, cell.p, cell.q, cell.rho_x,
                                                        cell.rho_e, cell.r_star, seed});
    }
    throw BadArgument("generate_cell: unknown family");
}

/// Squared error in the metric of the true predictor covariance,
/// || Sigma_XX^{1/2} (beta_hat - beta*) ||_F^2.
inline double model_error(const Matrix& beta_hat, const JointGroundTruth& truth) {
    if (beta_hat.rows() != truth.beta.rows() || beta_hat.cols() != truth.beta.cols())
        throw ShapeMismatch("model_error: estimate and truth shapes disagree");
    const Matrix half = spd_sqrt(truth.sigma_xx).matrix();
    return (half * (beta_hat - truth.beta)).squaredNorm();
}

/// Spectral norm of the raw coefficient error (the decay diagnostic's loss).
inline double spectral_error(const Matrix& beta_hat, const JointGroundTruth& truth) {
    if (beta_hat.rows() != truth.beta.rows() || beta_hat.cols() != truth.beta.cols())
        throw ShapeMismatch("spectral_error: estimate and truth shapes disagree");
    return spectral_norm(beta_hat - truth.beta);
}

/// Per-response sum of squared test errors of the affine prediction
/// intercept + beta' x over the rows of a held-out set.
inline Vector prediction_error(const BetaEstimate& est, const Matrix& x_test,
                               const Matrix& y_test) {
    if (x_test.rows() != y_test.rows())
        throw ShapeMismatch("prediction_error: test row counts disagree");
    if (est.beta.rows() != x_test.cols() || est.beta.cols() != y_test.cols())
        throw ShapeMismatch("prediction_error: coefficient shape does not match data");
    Matrix pred = x_test * est.beta;
    pred.rowwise() += est.intercept.transpose();
    return (y_test - pred).colwise().squaredNorm().transpose();
}

namespace detail {

// Runs task(0..total-1) across a small thread pool. Any task exception is
// rethrown on the caller's thread after the pool drains.
inline void run_tasks(int threads, int total, const std::function<void(int)>& task) {
    if (threads <= 1 || total <= 1) {
        for (int i = 0; i < total; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const int i = next.fetch_add(1);
            if (i >= total) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min(threads, total);
    pool.reserve(size_t(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline void summarize(const std::vector<double>& losses, int& n_ok, double& mean, double& se) {
    n_ok = 0;
    double sum = 0.0;
    for (double v : losses)
        if (std::isfinite(v)) {
            ++n_ok;
            sum += v;
        }
    if (n_ok == 0) {
        mean = std::numeric_limits<double>::quiet_NaN();
        se = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    mean = sum / n_ok;
    if (n_ok < 2) {
        se = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    double ss = 0.0;
    for (double v : losses)
        if (std::isfinite(v)) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / (n_ok - 1)) / std::sqrt(double(n_ok));
}

}  // namespace detail

struct SimulationConfig {
    DesignFamily design = DesignFamily::SparseInverse;
    std::vector<CellParams> cells;
    std::vector<EstimatorKind> estimators;
    int replications = 50;
    std::uint64_t seed = 1;
    int threads = 1;
    int folds = 5;
    Grid grid = Grid::default_grid();
};

struct ReplicationRecord {
    double loss = std::numeric_limits<double>::quiet_NaN();
    std::string failure;  // nonempty when the estimator was undefined
    FitMetadata metadata;
};

struct CellEstimatorSummary {
    CellParams cell;
    EstimatorKind estimator = EstimatorKind::IndirectLasso;
    std::vector<ReplicationRecord> reps;
    int n_ok = 0;
    double mean = 0.0;
    double se = 0.0;
};

struct SimulationReport {
    DesignFamily design = DesignFamily::SparseInverse;
    std::uint64_t seed = 0;
    int replications = 0;
    std::vector<CellEstimatorSummary> rows;  // cell-major, estimator order preserved
};

/// Runs the Monte Carlo study: every replication draws fresh truth and data,
/// fits each requested estimator through one shared context, and scores the
/// coefficient error. Replications are independent tasks, so worker count
/// cannot change any number in the report.
inline SimulationReport run_simulation(const SimulationConfig& config) {
    if (config.cells.empty()) throw BadArgument("run_simulation: no cells");
    if (config.estimators.empty()) throw BadArgument("run_simulation: no estimators");
    if (config.replications < 1) throw BadArgument("run_simulation: replications must be >= 1");

    const int cells = int(config.cells.size());
    const int ests = int(config.estimators.size());
    const int reps = config.replications;

    SimulationReport report;
    report.design = config.design;
    report.seed = config.seed;
    report.replications = reps;
    report.rows.resize(size_t(cells) * size_t(ests));
    for (int c = 0; c < cells; ++c)
        for (int e = 0; e < ests; ++e) {
            auto& row = report.rows[size_t(c) * size_t(ests) + size_t(e)];
            row.cell = config.cells[size_t(c)];
            row.estimator = config.estimators[size_t(e)];
            row.reps.resize(size_t(reps));
        }

    detail::run_tasks(config.threads, cells * reps, [&](int task) {
        const int c = task / reps;
        const int r = task % reps;
        const std::uint64_t cell_seed = derive_stream(config.seed, std::uint64_t(c));
        const std::uint64_t rep_seed = derive_stream(cell_seed, std::uint64_t(r));
        const auto [truth, data] =
            generate_cell(config.design, config.cells[size_t(c)], derive_stream(rep_seed, 0));
        FitContext ctx(data, &truth, config.grid, derive_stream(rep_seed, 1), config.folds);
        for (int e = 0; e < ests; ++e) {
            auto& rec = report.rows[size_t(c) * size_t(ests) + size_t(e)].reps[size_t(r)];
            try {
                const BetaEstimate est = ctx.fit(config.estimators[size_t(e)]);
                rec.loss = model_error(est.beta, truth);
                rec.metadata = est.metadata;
            } catch (const Error& err) {
                rec.failure = err.what();
            }
        }
    });

    for (auto& row : report.rows) {
        std::vector<double> losses;
        losses.reserve(row.reps.size());
        for (const auto& rec : row.reps) losses.push_back(rec.loss);
        detail::summarize(losses, row.n_ok, row.mean, row.se);
    }
    return report;
}

struct HoldoutConfig {
    Matrix x;  // raw, uncentered
    Matrix y;
    std::vector<EstimatorKind> estimators;
    int replications = 500;
    double test_fraction = 0.4;
    std::uint64_t seed = 1;
    int threads = 1;
    int folds = 5;
    Grid grid = Grid::default_grid();
};

struct HoldoutRow {
    EstimatorKind estimator = EstimatorKind::IndirectLasso;
    Eigen::Index response = 0;
    std::vector<double> losses;  // one per replication, NaN when the fit failed
    int n_ok = 0;
    double mean = 0.0;
    double se = 0.0;
};

struct HoldoutReport {
    std::uint64_t seed = 0;
    int replications = 0;
    Eigen::Index n_test = 0;
    std::vector<HoldoutRow> rows;  // estimator-major, response order inside
    std::vector<std::string> failures;  // distinct failure messages observed
};

/// Random train/test splits of one fixed dataset: fit on the training part
/// (centered there), accumulate per-response held-out squared error.
inline HoldoutReport run_holdout_study(const HoldoutConfig& config) {
    const Eigen::Index n = config.x.rows();
    if (config.y.rows() != n) throw ShapeMismatch("run_holdout_study: row counts disagree");
    if (config.estimators.empty()) throw BadArgument("run_holdout_study: no estimators");
    for (EstimatorKind kind : config.estimators)
        if (needs_oracle(kind))
            throw MissingOracle(std::string("run_holdout_study: ") + estimator_name(kind) +
                                " needs ground truth");
    const Eigen::Index n_test = Eigen::Index(std::lround(config.test_fraction * double(n)));
    if (n_test < 1 || n - n_test < 3)
        throw BadArgument("run_holdout_study: test fraction leaves too few rows");
    const int reps = config.replications;
    if (reps < 1) throw BadArgument("run_holdout_study: replications must be >= 1");

    const int ests = int(config.estimators.size());
    const Eigen::Index q = config.y.cols();
    HoldoutReport report;
    report.seed = config.seed;
    report.replications = reps;
    report.n_test = n_test;
    report.rows.resize(size_t(ests) * size_t(q));
    for (int e = 0; e < ests; ++e)
        for (Eigen::Index m = 0; m < q; ++m) {
            auto& row = report.rows[size_t(e) * size_t(q) + size_t(m)];
            row.estimator = config.estimators[size_t(e)];
            row.response = m;
            row.losses.assign(size_t(reps), std::numeric_limits<double>::quiet_NaN());
        }
    std::vector<std::vector<std::string>> failures(static_cast<size_t>(reps));
    std::mutex failure_mutex;

    detail::run_tasks(config.threads, reps, [&](int r) {
        const std::uint64_t rep_seed = derive_stream(config.seed, std::uint64_t(r));
        Xoshiro256pp rng(derive_stream(rep_seed, 0));
        std::vector<Eigen::Index> perm(static_cast<size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        for (Eigen::Index i = n - 1; i > 0; --i)
            std::swap(perm[size_t(i)], perm[rng.below(std::uint64_t(i) + 1)]);

        Matrix x_test(n_test, config.x.cols()), y_test(n_test, q);
        Matrix x_train(n - n_test, config.x.cols()), y_train(n - n_test, q);
        for (Eigen::Index i = 0; i < n_test; ++i) {
            x_test.row(i) = config.x.row(perm[size_t(i)]);
            y_test.row(i) = config.y.row(perm[size_t(i)]);
        }
        for (Eigen::Index i = n_test; i < n; ++i) {
            x_train.row(i - n_test) = config.x.row(perm[size_t(i)]);
            y_train.row(i - n_test) = config.y.row(perm[size_t(i)]);
        }

        const Dataset train = center(x_train, y_train);
        FitContext ctx(train, nullptr, config.grid, derive_stream(rep_seed, 1), config.folds);
        for (int e = 0; e < ests; ++e) {
            try {
                const BetaEstimate est = ctx.fit(config.estimators[size_t(e)]);
                const Vector loss = prediction_error(est, x_test, y_test);
                for (Eigen::Index m = 0; m < q; ++m)
                    report.rows[size_t(e) * size_t(q) + size_t(m)].losses[size_t(r)] = loss(m);
            } catch (const Error& err) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failures[size_t(r)].push_back(
                    std::string(estimator_name(config.estimators[size_t(e)])) + ": " +
                    err.what());
            }
        }
    });

    for (auto& row : report.rows) detail::summarize(row.losses, row.n_ok, row.mean, row.se);
    for (const auto& per_rep : failures)
        for (const auto& f : per_rep)
            if (std::find(report.failures.begin(), report.failures.end(), f) ==
                report.failures.end())
                report.failures.push_back(f);
    return report;
}

struct DecayConfig {
    DesignFamily design = DesignFamily::SparseInverse;
    CellParams cell;  // n is overridden by each entry of n_values
    std::vector<Eigen::Index> n_values;
    EstimatorKind estimator = EstimatorKind::IndirectLasso;
    int replications = 50;
    std::uint64_t seed = 1;
    int threads = 1;
    int folds = 5;
    Grid grid = Grid::default_grid();
};

struct DecayRow {
    Eigen::Index n = 0;
    std::vector<double> losses;
    int n_ok = 0;
    double mean = 0.0;
    double se = 0.0;
};

struct DecayReport {
    DesignFamily design = DesignFamily::SparseInverse;
    EstimatorKind estimator = EstimatorKind::IndirectLasso;
    std::uint64_t seed = 0;
    int replications = 0;
    std::vector<DecayRow> rows;
};

/// Error decay over a ladder of sample sizes, scored by the spectral norm of
/// the coefficient error.
inline DecayReport run_decay(const DecayConfig& config) {
    if (config.n_values.empty()) throw BadArgument("run_decay: no sample sizes");
    if (config.replications < 1) throw BadArgument("run_decay: replications must be >= 1");
    const int reps = config.replications;
    const int sizes = int(config.n_values.size());

    DecayReport report;
    report.design = config.design;
    report.estimator = config.estimator;
    report.seed = config.seed;
    report.replications = reps;
    report.rows.resize(size_t(sizes));
    for (int s = 0; s < sizes; ++s) {
        report.rows[size_t(s)].n = config.n_values[size_t(s)];
        report.rows[size_t(s)].losses.assign(size_t(reps),
                                             std::numeric_limits<double>::quiet_NaN());
    }

    detail::run_tasks(config.threads, sizes * reps, [&](int task) {
        const int s = task / reps;
        const int r = task % reps;
        CellParams cell = config.cell;
        cell.n = config.n_values[size_t(s)];
        const std::uint64_t size_seed = derive_stream(config.seed, std::uint64_t(s));
        const std::uint64_t rep_seed = derive_stream(size_seed, std::uint64_t(r));
        const auto [truth, data] =
            generate_cell(config.design, cell, derive_stream(rep_seed, 0));
        FitContext ctx(data, &truth, config.grid, derive_stream(rep_seed, 1), config.folds);
        try {
            const BetaEstimate est = ctx.fit(config.estimator);
            report.rows[size_t(s)].losses[size_t(r)] = spectral_error(est.beta, truth);
        } catch (const Error&) {
            // leave NaN
        }
    });

    for (auto& row : report.rows) detail::summarize(row.losses, row.n_ok, row.mean, row.se);
    return report;
}

}  // namespace ireg
