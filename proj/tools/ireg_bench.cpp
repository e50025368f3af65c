// Benchmark and study driver for the indirect multivariate-regression
// estimators. Subcommands: simulate, holdout, decay, reproduce-table.
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ireg/ireg.hpp"

namespace {

std::vector<ireg::EstimatorKind> parse_estimator_list(const std::string& text) {
    std::vector<ireg::EstimatorKind> out;
    std::string tok;
    std::istringstream is(text);
    while (std::getline(is, tok, ',')) {
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front())))
            tok.erase(tok.begin());
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back())))
            tok.pop_back();
        if (!tok.empty()) out.push_back(ireg::parse_estimator(tok));
    }
    if (out.empty()) throw ireg::BadArgument("estimator list is empty");
    return out;
}

std::string sidecar_path(const std::string& out) {
    const std::string suffix = ".csv";
    if (out.size() > suffix.size() &&
        out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
        return out.substr(0, out.size() - suffix.size()) + ".jsonl";
    return out + ".jsonl";
}

void write_outputs(const std::string& out,
                   const std::function<void(std::ostream&)>& write_csv,
                   const std::function<void(std::ostream&)>& write_jsonl) {
    if (out.empty()) {
        write_csv(std::cout);
        return;
    }
    std::ofstream csv(out);
    if (!csv) throw ireg::BadArgument("cannot open output file: " + out);
    write_csv(csv);
    std::ofstream jsonl(sidecar_path(out));
    if (!jsonl) throw ireg::BadArgument("cannot open output file: " + sidecar_path(out));
    write_jsonl(jsonl);
    std::cerr << "wrote " << out << " and " << sidecar_path(out) << "\n";
}

std::vector<ireg::EstimatorKind> default_estimators(ireg::DesignFamily family) {
    using E = ireg::EstimatorKind;
    if (family == ireg::DesignFamily::SparseInverse)
        return {E::IndirectLasso, E::OracleBoth, E::OracleDelta, E::OracleY,
                E::IndirectSample, E::OlsPseudo, E::RidgePerResponse, E::RidgeSingle};
    return {E::IndirectRank,   E::OracleBothRank, E::OracleDeltaRank, E::OracleYRank,
            E::IndirectRankML, E::OlsPseudo,      E::ReducedRankForward};
}

struct SimulateArgs {
    std::string design = "sparse-inverse";
    std::int64_t n = 100, p = 20, q = 20;
    std::vector<double> rho_y{0.0}, rho_delta{0.0}, rho_x{0.0}, rho_e{0.0};
    std::vector<double> s_star;
    std::vector<std::int64_t> r_star;
    std::string estimators;
    int reps = 50;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
};

void run_simulate(const SimulateArgs& args) {
    ireg::SimulationConfig config;
    config.design = ireg::parse_design(args.design);
    config.replications = args.reps;
    config.seed = args.seed;
    config.threads = args.threads;
    config.estimators = args.estimators.empty() ? default_estimators(config.design)
                                                : parse_estimator_list(args.estimators);

    const bool sparse = config.design == ireg::DesignFamily::SparseInverse;
    const bool forward = config.design == ireg::DesignFamily::ReducedRankForward;
    if (sparse && args.s_star.empty())
        throw ireg::BadArgument("sparse-inverse design needs --s-star");
    if (!sparse && args.r_star.empty())
        throw ireg::BadArgument("reduced-rank designs need --r-star");
    const std::vector<double>& rho_a = forward ? args.rho_x : args.rho_y;
    const std::vector<double>& rho_b = forward ? args.rho_e : args.rho_delta;
    for (double ra : rho_a)
        for (double rb : rho_b) {
            if (sparse) {
                for (double s : args.s_star) {
                    ireg::CellParams c;
                    c.n = args.n;
                    c.p = args.p;
                    c.q = args.q;
                    c.rho_y = ra;
                    c.rho_delta = rb;
                    c.s_star = s;
                    config.cells.push_back(c);
                }
            } else {
                for (std::int64_t r : args.r_star) {
                    ireg::CellParams c;
                    c.n = args.n;
                    c.p = args.p;
                    c.q = args.q;
                    if (forward) {
                        c.rho_x = ra;
                        c.rho_e = rb;
                    } else {
                        c.rho_y = ra;
                        c.rho_delta = rb;
                    }
                    c.r_star = r;
                    config.cells.push_back(c);
                }
            }
        }

    const ireg::SimulationReport report = ireg::run_simulation(config);
    write_outputs(
        args.out, [&](std::ostream& os) { ireg::write_simulation_csv(report, config, os); },
        [&](std::ostream& os) { ireg::write_simulation_jsonl(report, config, os); });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark CLI for indirect multivariate-regression estimation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value file (# comments)");

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Monte Carlo study over simulated design cells");
    simulate->add_option("--design", sim.design,
                         "sparse-inverse | rr-inverse | rr-forward")
        ->capture_default_str();
    simulate->add_option("--n", sim.n, "sample size")->capture_default_str();
    simulate->add_option("--p", sim.p, "predictor dimension")->capture_default_str();
    simulate->add_option("--q", sim.q, "response dimension")->capture_default_str();
    simulate->add_option("--rho-y", sim.rho_y, "response AR(1) correlation(s)")
        ->delimiter(',');
    simulate->add_option("--rho-delta", sim.rho_delta,
                         "inverse-error AR(1) correlation(s)")
        ->delimiter(',');
    simulate->add_option("--rho-x", sim.rho_x, "predictor AR(1) correlation(s)")
        ->delimiter(',');
    simulate->add_option("--rho-e", sim.rho_e, "forward-error AR(1) correlation(s)")
        ->delimiter(',');
    simulate->add_option("--s-star", sim.s_star, "sparsity level(s), sparse design")
        ->delimiter(',');
    simulate->add_option("--r-star", sim.r_star, "true rank(s), reduced-rank designs")
        ->delimiter(',');
    simulate->add_option("--estimators", sim.estimators,
                         "comma list (default: the published set for the design)");
    simulate->add_option("--reps", sim.reps, "replications per cell")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "base seed")->capture_default_str();
    simulate->add_option("--threads", sim.threads, "worker threads")->capture_default_str();
    simulate->add_option("--out", sim.out, "report CSV path (sidecar: .jsonl)");

    struct {
        std::string data;
        double test_frac = 0.4;
        int reps = 500;
        std::string estimators = "I_L2,OLS_MP";
        std::uint64_t seed = 1;
        int threads = 1;
        std::string out;
    } hold;
    CLI::App* holdout = app.add_subcommand(
        "holdout", "Random train/test splits of a CSV dataset (x_*/y_* columns)");
    holdout->add_option("--data", hold.data, "dataset CSV path")->required();
    holdout->add_option("--test-frac", hold.test_frac, "held-out fraction")
        ->capture_default_str();
    holdout->add_option("--reps", hold.reps, "number of random splits")->capture_default_str();
    holdout->add_option("--estimators", hold.estimators, "comma list, no oracle entries")
        ->capture_default_str();
    holdout->add_option("--seed", hold.seed, "base seed")->capture_default_str();
    holdout->add_option("--threads", hold.threads, "worker threads")->capture_default_str();
    holdout->add_option("--out", hold.out, "report CSV path (sidecar: .jsonl)");

    struct {
        std::string design = "sparse-inverse";
        std::int64_t p = 20, q = 20;
        double rho_y = 0.7, rho_delta = 0.5, rho_x = 0.0, rho_e = 0.0;
        double s_star = 0.1;
        std::int64_t r_star = 0;
        std::vector<std::int64_t> n_list;
        std::string estimator = "I_L1";
        int reps = 50;
        std::uint64_t seed = 1;
        int threads = 1;
        std::string out;
    } dec;
    CLI::App* decay = app.add_subcommand(
        "decay", "Spectral-norm error versus sample size for one estimator");
    decay->add_option("--design", dec.design, "sparse-inverse | rr-inverse | rr-forward")
        ->capture_default_str();
    decay->add_option("--p", dec.p, "predictor dimension")->capture_default_str();
    decay->add_option("--q", dec.q, "response dimension")->capture_default_str();
    decay->add_option("--rho-y", dec.rho_y, "response AR(1) correlation")->capture_default_str();
    decay->add_option("--rho-delta", dec.rho_delta, "inverse-error AR(1) correlation")
        ->capture_default_str();
    decay->add_option("--rho-x", dec.rho_x, "predictor AR(1) correlation")->capture_default_str();
    decay->add_option("--rho-e", dec.rho_e, "forward-error AR(1) correlation")
        ->capture_default_str();
    decay->add_option("--s-star", dec.s_star, "sparsity level")->capture_default_str();
    decay->add_option("--r-star", dec.r_star, "true rank")->capture_default_str();
    decay->add_option("--n-list", dec.n_list, "sample sizes, ascending")
        ->delimiter(',')
        ->required();
    decay->add_option("--estimator", dec.estimator, "estimator name")->capture_default_str();
    decay->add_option("--reps", dec.reps, "replications per sample size")
        ->capture_default_str();
    decay->add_option("--seed", dec.seed, "base seed")->capture_default_str();
    decay->add_option("--threads", dec.threads, "worker threads")->capture_default_str();
    decay->add_option("--out", dec.out, "report CSV path (sidecar: .jsonl)");

    struct {
        int table = 1;
        int reps = 50;
        std::uint64_t seed = 1;
        int threads = 1;
        std::string out;
    } repro;
    CLI::App* reproduce = app.add_subcommand(
        "reproduce-table", "Run one of the published simulation grids (1-4)");
    reproduce->add_option("table", repro.table, "table number 1-4")->required();
    reproduce->add_option("--reps", repro.reps, "replications per cell")->capture_default_str();
    reproduce->add_option("--seed", repro.seed, "base seed")->capture_default_str();
    reproduce->add_option("--threads", repro.threads, "worker threads")->capture_default_str();
    reproduce->add_option("--out", repro.out, "report CSV path (sidecar: .jsonl)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            run_simulate(sim);
        } else if (holdout->parsed()) {
            ireg::HoldoutConfig config;
            config.estimators = parse_estimator_list(hold.estimators);
            config.replications = hold.reps;
            config.test_fraction = hold.test_frac;
            config.seed = hold.seed;
            config.threads = hold.threads;
            const ireg::HoldoutReport report = ireg::run_holdout_study(hold.data, config);
            write_outputs(
                hold.out, [&](std::ostream& os) { ireg::write_holdout_csv(report, os); },
                [&](std::ostream& os) { ireg::write_holdout_jsonl(report, os); });
        } else if (decay->parsed()) {
            ireg::DecayConfig config;
            config.design = ireg::parse_design(dec.design);
            config.cell.p = dec.p;
            config.cell.q = dec.q;
            config.cell.rho_y = dec.rho_y;
            config.cell.rho_delta = dec.rho_delta;
            config.cell.rho_x = dec.rho_x;
            config.cell.rho_e = dec.rho_e;
            config.cell.s_star = dec.s_star;
            config.cell.r_star = dec.r_star;
            config.n_values.assign(dec.n_list.begin(), dec.n_list.end());
            for (size_t i = 1; i < config.n_values.size(); ++i)
                if (config.n_values[i] <= config.n_values[i - 1])
                    throw ireg::BadArgument("--n-list must be strictly increasing");
            config.estimator = ireg::parse_estimator(dec.estimator);
            config.replications = dec.reps;
            config.seed = dec.seed;
            config.threads = dec.threads;
            const ireg::DecayReport report = ireg::run_decay(config);
            write_outputs(
                dec.out, [&](std::ostream& os) { ireg::write_decay_csv(report, os); },
                [&](std::ostream& os) { ireg::write_decay_jsonl(report, os); });
        } else if (reproduce->parsed()) {
            ireg::SimulationConfig config = ireg::reproduce_table_config(repro.table);
            config.replications = repro.reps;
            config.seed = repro.seed;
            config.threads = repro.threads;
            const ireg::SimulationReport report = ireg::run_simulation(config);
            write_outputs(
                repro.out,
                [&](std::ostream& os) { ireg::write_simulation_csv(report, config, os); },
                [&](std::ostream& os) { ireg::write_simulation_jsonl(report, config, os); });
        }
    } catch (const ireg::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
