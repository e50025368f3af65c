// Acceptance gate, fast suite. Each check prints one PASS/FAIL line with the
// measured quantities; the process exits nonzero when any check fails. All
// tolerances are pinned here, next to the checks that use them.

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ireg/ireg.hpp"
#include "oracles.hpp"

using namespace ireg;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%-34s %s  %s\n", name.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double rel_spectral(const Matrix& a, const Matrix& b) {
    return spectral_norm(a - b) / std::max(1.0, spectral_norm(b));
}

// Stationarity violation of the column lasso ||x - Y c||^2 + lambda ||c||_1,
// stated on the gram pair (G, b) = (Y'Y, Y'x).
double lasso_violation(const Matrix& gram, const Vector& b, double lambda, const Vector& c) {
    const Vector grad2 = 2.0 * (gram * c - b);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        if (c(k) == 0.0)
            worst = std::max(worst, std::fabs(grad2(k)) - lambda);
        else
            worst = std::max(worst, std::fabs(grad2(k) + lambda * (c(k) > 0 ? 1.0 : -1.0)));
    }
    return worst;
}

// Stationarity violation of the off-diagonal-penalized precision fit.
double glasso_violation(const Matrix& s, const Matrix& omega, double gamma) {
    const Matrix resid = s - spd_inverse(SymPosDef(omega)).matrix();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < s.rows(); ++j) {
        worst = std::max(worst, std::fabs(resid(j, j)));
        for (Eigen::Index k = j + 1; k < s.cols(); ++k) {
            const double r = resid(j, k);
            if (omega(j, k) == 0.0)
                worst = std::max(worst, std::fabs(r) - gamma);
            else
                worst = std::max(worst, std::fabs(r + gamma * (omega(j, k) > 0 ? 1.0 : -1.0)));
        }
    }
    return worst;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------

void check_assembly_identity() {
    const auto start = std::chrono::steady_clock::now();
    Xoshiro256pp rng(101);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const Eigen::Index p = 1 + Eigen::Index(rng.below(12));
        const Eigen::Index q = 1 + Eigen::Index(rng.below(12));
        const Matrix joint = oracle::random_spd(p + q, rng).matrix();
        const Matrix sxx = joint.topLeftCorner(p, p);
        const Matrix sxy = joint.topRightCorner(p, q);
        const SymPosDef syy{Matrix(joint.bottomRightCorner(q, q))};
        const Matrix eta = syy.solve(sxy.transpose());
        Matrix delta = sxx - sxy * eta;
        delta = ((delta + delta.transpose()) / 2.0).eval();
        const Matrix assembled = assemble_beta(
            InversePlugins{eta, spd_inverse(SymPosDef(delta)), spd_inverse(syy)});
        const Matrix direct = SymPosDef{Matrix(sxx)}.solve(sxy);
        worst = std::max(worst, rel_spectral(assembled, direct));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report("assembly-identity-500", worst <= 1e-9 && secs < 10.0,
           "max rel spectral err " + fmt(worst) + ", " + fmt(secs) + "s");
}

void check_ols_equivalence() {
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        const double rho_y = (t % 3 == 0) ? 0.0 : (t % 3 == 1) ? 0.5 : 0.7;
        const auto [truth, data] =
            generate(SparseInverseModelSpec{200, 8, 8, rho_y, 0.3, 0.5, 3000 + t});
        const double n = double(data.n());
        const Matrix eta = SymPosDef{Matrix(data.y.transpose() * data.y)}.solve(
            data.y.transpose() * data.x);
        const Matrix resid = data.x - data.y * eta;
        Matrix delta = resid.transpose() * resid / n;
        delta = ((delta + delta.transpose()) / 2.0).eval();
        const Matrix assembled = assemble_beta(InversePlugins{
            eta, spd_inverse(SymPosDef(delta)),
            spd_inverse(SymPosDef(Matrix(data.y.transpose() * data.y / n)))});
        worst = std::max(worst, rel_spectral(assembled, ols(data)));
    }
    report("sample-plugin-ols-equivalence", worst <= 1e-8,
           "max rel spectral err " + fmt(worst) + " over 100 datasets");
}

void check_rank_propagation() {
    const Eigen::Index p = 12, q = 10;
    int bad = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Xoshiro256pp rng(500 + seed);
        const SymPosDef dinv(oracle::random_spd(p, rng));
        const SymPosDef syyinv(oracle::random_spd(q, rng));
        for (int r = 0; r <= 10; ++r) {
            Matrix eta = Matrix::Zero(q, p);
            if (r > 0)
                eta = oracle::random_matrix(q, r, rng) * oracle::random_matrix(r, p, rng);
            if (rank_of(assemble_beta(InversePlugins{eta, dinv, syyinv})) != r) ++bad;
        }
    }
    report("rank-propagation", bad == 0, std::to_string(bad) + " mismatches in 220 cases");
}

void check_solver_contracts() {
    Xoshiro256pp rng(1700);

    // Column lasso: stationarity on 200 instances, enumeration oracle when
    // the dimension admits exhaustive sign patterns.
    double lasso_worst = 0.0;
    double enum_worst = 0.0;
    int enum_count = 0;
    for (int t = 0; t < 200; ++t) {
        const Eigen::Index q = 1 + Eigen::Index(rng.below(10));
        const Eigen::Index n = q + 5 + Eigen::Index(rng.below(30));
        const Matrix y = oracle::random_matrix(n, q, rng);
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.normal();
        const Matrix gram = y.transpose() * y;
        const Vector b = y.transpose() * x;
        const double lam_max = 2.0 * b.cwiseAbs().maxCoeff();
        const double lambda = lam_max * std::pow(10.0, -3.0 * rng.uniform());
        const Vector c = lasso_gram(gram, b, lambda);
        const double scale = std::max(1.0, 2.0 * b.cwiseAbs().maxCoeff());
        lasso_worst = std::max(lasso_worst, lasso_violation(gram, b, lambda, c) / scale);
        if (q <= 3) {
            ++enum_count;
            const Vector ref = oracle::lasso_enumerate(gram, b, lambda);
            enum_worst = std::max(enum_worst, (c - ref).cwiseAbs().maxCoeff());
        }
    }
    const bool lasso_ok = lasso_worst <= 1e-8 && enum_worst <= 1e-8 && enum_count > 0;

    // Penalized precision: stationarity and objective against an independent
    // first-order (ADMM) solver.
    double gl_kkt = 0.0;
    double gl_obj = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index p = 2 + Eigen::Index(rng.below(9));
        const Matrix s = oracle::random_spd(p, rng).matrix();
        const double gamma = std::pow(10.0, -2.0 + 2.0 * rng.uniform());
        const SymPosDef omega = glasso(s, gamma);
        const double scale = std::max(1.0, s.diagonal().maxCoeff());
        gl_kkt = std::max(gl_kkt, glasso_violation(s, omega.matrix(), gamma) / scale);
        const Matrix ref = oracle::glasso_admm(s, gamma);
        gl_obj = std::max(gl_obj, std::fabs(oracle::glasso_objective(s, omega.matrix(), gamma) -
                                            oracle::glasso_objective(s, ref, gamma)));
    }
    const bool glasso_ok = gl_kkt <= 1e-6 && gl_obj <= 1e-6;

    // Quadratic-penalty precision: closed form must satisfy its stationarity
    // equation, including on singular inputs.
    double ridge_worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index p = 2 + Eigen::Index(rng.below(11));
        Matrix s;
        if (t % 4 == 0) {
            const Matrix g = oracle::random_matrix(p, std::max<Eigen::Index>(1, p / 2), rng);
            s = g * g.transpose() / double(p);
        } else {
            s = oracle::random_spd(p, rng).matrix();
        }
        const double gamma = std::pow(10.0, -4.0 + 5.0 * rng.uniform());
        const SymPosDef omega = ridge_precision(s, gamma);
        const double scale = std::max(1.0, s.norm());
        ridge_worst = std::max(ridge_worst, ridge_precision_residual(s, omega, gamma) / scale);
    }
    const bool ridge_ok = ridge_worst <= 1e-8;

    // Rank-constrained regression: the closed form ties the restarted
    // alternating minimizer.
    double rrr_worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index a = 3 + Eigen::Index(rng.below(4));
        const Eigen::Index b = 3 + Eigen::Index(rng.below(3));
        const int r = 1 + int(rng.below(std::uint64_t(std::min(a, b)) - 1));
        const Matrix x = oracle::random_matrix(40, a, rng);
        const Matrix y = oracle::random_matrix(40, b, rng);
        const RrrFit fit = rrr_fit(x, y, r);
        const double best = oracle::rr_oracle_best(x, y, r, 50, 9000 + std::uint64_t(t));
        rrr_worst = std::max(rrr_worst, fit.objective - best);
        if (fit.objective > best + 1e-6) rrr_worst = std::max(rrr_worst, 1.0);
    }
    const bool rrr_ok = rrr_worst <= 1e-6;

    report("solver-contracts", lasso_ok && glasso_ok && ridge_ok && rrr_ok,
           "lasso kkt " + fmt(lasso_worst) + " enum " + fmt(enum_worst) + " (" +
               std::to_string(enum_count) + " exhaustive); glasso kkt " + fmt(gl_kkt) +
               " obj " + fmt(gl_obj) + "; ridge resid " + fmt(ridge_worst) +
               "; rrr gap " + fmt(rrr_worst));
}

void check_small_study_row() {
    SimulationConfig config = reproduce_table_config(1);
    config.cells = {config.cells[0]};
    config.seed = 20260823;
    const SimulationReport rep = run_simulation(config);

    const std::vector<double> published = {0.61, 0.32, 0.53, 0.40, 1.35, 2.10, 1.23, 1.22};
    bool ok = rep.rows.size() == published.size();
    std::ostringstream detail;
    double mean_il1 = 0.0, mean_mp = 0.0, mean_l2 = 0.0, mean_r = 0.0;
    for (size_t i = 0; i < rep.rows.size() && i < published.size(); ++i) {
        const double m = rep.rows[i].mean;
        const std::string name = estimator_name(rep.rows[i].estimator);
        if (name == "I_L1") mean_il1 = m;
        if (name == "OLS_MP") mean_mp = m;
        if (name == "L2") mean_l2 = m;
        if (name == "R") mean_r = m;
        if (!(std::fabs(m - published[i]) <= 0.15)) ok = false;
        detail << name << " " << fmt(m) << "/" << fmt(published[i]) << " ";
    }
    const bool order_ok = mean_il1 < mean_mp && mean_il1 < mean_l2 && mean_il1 < mean_r;
    report("small-study-row-means", ok && order_ok, detail.str());
}

void check_lowrank_inverse_study() {
    SimulationConfig spot = reproduce_table_config(3);
    spot.cells = {spot.cells[7]};  // rho_y 0.7, rho_delta 0.9, true rank 4
    spot.estimators = {EstimatorKind::IndirectRank, EstimatorKind::IndirectRankML,
                       EstimatorKind::ReducedRankForward};
    spot.seed = 20260824;
    const SimulationReport srep = run_simulation(spot);
    const double m_ir = srep.rows[0].mean;
    const double m_ml = srep.rows[1].mean;
    const double m_rr = srep.rows[2].mean;
    bool ok = std::fabs(m_ir - 0.35) <= 0.15 && std::fabs(m_rr - 0.49) <= 0.15 &&
              std::fabs(m_ml - m_rr) <= 0.1;

    SimulationConfig rest = reproduce_table_config(3);
    rest.cells.erase(rest.cells.begin() + 7);
    rest.estimators = {EstimatorKind::IndirectRankML, EstimatorKind::ReducedRankForward};
    rest.seed = 20260825;
    const SimulationReport rrep = run_simulation(rest);
    double worst_gap = std::fabs(m_ml - m_rr);
    for (size_t c = 0; c < rest.cells.size(); ++c) {
        const double gap = std::fabs(rrep.rows[2 * c].mean - rrep.rows[2 * c + 1].mean);
        worst_gap = std::max(worst_gap, gap);
    }
    if (worst_gap > 0.1) ok = false;
    report("lowrank-inverse-study", ok,
           "I_r " + fmt(m_ir) + "/0.35, RR " + fmt(m_rr) + "/0.49, max |I_ML_r-RR| " +
               fmt(worst_gap) + " over 11 cells");
}

void check_lowrank_forward_rows() {
    SimulationConfig config = reproduce_table_config(4);
    config.cells = {config.cells[7], config.cells[8]};  // true ranks 4 and 8
    config.estimators = {EstimatorKind::IndirectRank, EstimatorKind::IndirectRankML};
    config.seed = 20260826;
    const SimulationReport rep = run_simulation(config);
    const double published[2][2] = {{1.27, 0.95}, {2.39, 2.05}};
    bool ok = true;
    std::ostringstream detail;
    for (size_t c = 0; c < 2; ++c)
        for (size_t e = 0; e < 2; ++e) {
            const double m = rep.rows[2 * c + e].mean;
            if (!(std::fabs(m - published[c][e]) <= 0.63)) ok = false;
            detail << fmt(m) << "/" << published[c][e] << " ";
        }
    report("lowrank-forward-rows", ok, detail.str());
}

void check_shrunk_delta_holdout() {
    int wins = 0;
    for (std::uint64_t run = 0; run < 50; ++run) {
        Xoshiro256pp rng(derive_stream(20260827, run));
        const Eigen::Index p = 6, q = 3;
        // Dense inverse conditional covariance: invert a dense random
        // positive definite matrix.
        const SymPosDef delta = spd_inverse(SymPosDef(oracle::random_spd(p, rng)));
        const SymPosDef sigma_yy = ar1({q, 0.3});
        // Weak signal relative to the conditional noise: the regime where
        // shrinking the precision plug-ins pays off against plain least squares.
        const Matrix eta = 0.12 * oracle::random_matrix(q, p, rng);

        auto draw = [&](Eigen::Index rows) {
            const Matrix y = sample_mvn(sigma_yy, rows, rng);
            const Matrix x = y * eta + sample_mvn(delta, rows, rng);
            return std::pair<Matrix, Matrix>{x, y};
        };
        const auto [x_train, y_train] = draw(25);
        const auto [x_test, y_test] = draw(200);

        const Dataset train = center(x_train, y_train);
        FitContext ctx(train, nullptr, Grid::default_grid(), derive_stream(run, 1));
        const double loss_l2 =
            prediction_error(ctx.fit(EstimatorKind::IndirectLassoRidge), x_test, y_test).sum();
        const double loss_ols =
            prediction_error(ctx.fit(EstimatorKind::OlsPseudo), x_test, y_test).sum();
        if (loss_l2 <= loss_ols) ++wins;
    }
    report("shrunk-delta-small-holdout", wins >= 45,
           "ridge-precision indirect beat OLS in " + std::to_string(wins) + "/50 runs");
}

void check_error_decay() {
    DecayConfig config;
    config.design = DesignFamily::SparseInverse;
    config.cell.p = 20;
    config.cell.q = 20;
    config.cell.rho_y = 0.7;
    config.cell.rho_delta = 0.5;
    config.cell.s_star = 0.1;
    config.n_values = {100, 400, 1600};
    config.estimator = EstimatorKind::IndirectLasso;
    config.replications = 50;
    config.seed = 20260828;
    const DecayReport rep = run_decay(config);
    const double m0 = rep.rows[0].mean, m1 = rep.rows[1].mean, m2 = rep.rows[2].mean;
    report("spectral-error-decay", m0 > m1 && m1 > m2,
           "means " + fmt(m0) + " > " + fmt(m1) + " > " + fmt(m2) + " over n=100,400,1600");
}

void check_determinism() {
    SimulationConfig config;
    config.design = DesignFamily::SparseInverse;
    CellParams cell;
    cell.n = 60;
    cell.p = 6;
    cell.q = 6;
    cell.rho_y = 0.7;
    cell.rho_delta = 0.3;
    cell.s_star = 0.3;
    config.cells = {cell};
    config.estimators = {EstimatorKind::IndirectLasso, EstimatorKind::OlsPseudo,
                         EstimatorKind::RidgeSingle};
    config.replications = 6;
    config.seed = 314;

    std::vector<std::string> outputs;
    for (int threads : {1, 2, 5}) {
        config.threads = threads;
        const SimulationReport rep = run_simulation(config);
        std::ostringstream os;
        write_simulation_csv(rep, config, os);
        outputs.push_back(os.str());
    }
    const bool ok = outputs[0] == outputs[1] && outputs[0] == outputs[2];
    report("worker-count-determinism", ok,
           ok ? "csv bytes identical for 1/2/5 workers" : "csv bytes differ across workers");
}

}  // namespace

int main() {
    check_assembly_identity();
    check_ols_equivalence();
    check_rank_propagation();
    check_solver_contracts();
    check_small_study_row();
    check_lowrank_inverse_study();
    check_lowrank_forward_rows();
    check_shrunk_delta_holdout();
    check_error_decay();
    check_determinism();
    if (g_failures == 0) {
        std::printf("all acceptance checks passed\n");
        return 0;
    }
    std::printf("%d acceptance check(s) failed\n", g_failures);
    return 1;
}
