#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ireg/bench.hpp"

namespace ireg {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string cell_key(const CellParams& c) {
    std::ostringstream os;
    os << "n=" << c.n << ",p=" << c.p << ",q=" << c.q << ",rho_y=" << fmt17(c.rho_y)
       << ",rho_delta=" << fmt17(c.rho_delta) << ",rho_x=" << fmt17(c.rho_x)
       << ",rho_e=" << fmt17(c.rho_e) << ",s_star=" << fmt17(c.s_star)
       << ",r_star=" << c.r_star;
    return os.str();
}

// Digest of the statistical configuration only: execution details such as
// worker counts or output paths must not change it.
inline std::string config_digest(const SimulationConfig& config) {
    std::ostringstream os;
    os << "design=" << design_name(config.design) << ";reps=" << config.replications
       << ";seed=" << config.seed << ";folds=" << config.folds << ";grid=";
    for (double g : config.grid.values) os << fmt17(g) << ",";
    os << ";cells=";
    for (const auto& c : config.cells) os << "[" << cell_key(c) << "]";
    os << ";estimators=";
    for (EstimatorKind k : config.estimators) os << estimator_name(k) << ",";
    return hex64(fnv1a64(os.str()));
}

inline void write_provenance(std::ostream& out, const std::string& digest,
                             std::uint64_t seed, int replications) {
    out << "# indirect-estimator benchmark report\n";
    out << "# config=" << digest << " seed=" << seed << " replications=" << replications
        << "\n";
    out << "# sampling: xoshiro256++ streams, normals by inverse-cdf (AS241)\n";
    out << "# preprocessing: column-mean centering only, no scale normalization\n";
    out << "# tuning: 5-fold cross-validation, folds re-centered by training means\n";
    out << "# solvers: lasso coef_tol=1e-10 kkt_tol=1e-8; glasso kkt_tol=1e-8;"
           " penalty grid 1e-8..1e8 half-decade\n";
}

inline nlohmann::json metadata_json(const FitMetadata& meta) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& [name, value] : meta.params)
        params.push_back(nlohmann::json::array({name, value}));
    nlohmann::json j;
    j["params"] = std::move(params);
    j["notes"] = meta.notes;
    return j;
}

}  // namespace detail

inline std::string simulation_config_digest(const SimulationConfig& config) {
    return detail::config_digest(config);
}

/// Aggregate table: one row per (cell, estimator), floats at 17 significant
/// digits, provenance in leading comment lines.
inline void write_simulation_csv(const SimulationReport& report,
                                 const SimulationConfig& config, std::ostream& out) {
    detail::write_provenance(out, detail::config_digest(config), report.seed,
                             report.replications);
    out << "design,n,p,q,rho_y,rho_delta,rho_x,rho_e,s_star,r_star,estimator,mean,se,reps\n";
    for (const auto& row : report.rows) {
        const CellParams& c = row.cell;
        out << design_name(report.design) << ',' << c.n << ',' << c.p << ',' << c.q << ','
            << fmt17(c.rho_y) << ',' << fmt17(c.rho_delta) << ',' << fmt17(c.rho_x) << ','
            << fmt17(c.rho_e) << ',' << fmt17(c.s_star) << ',' << c.r_star << ','
            << estimator_name(row.estimator) << ',' << fmt17(row.mean) << ','
            << fmt17(row.se) << ',' << row.n_ok << "\n";
    }
}

/// Sidecar: one JSON object per (cell, estimator) with per-replication
/// losses, failure reasons, and tuning metadata.
inline void write_simulation_jsonl(const SimulationReport& report,
                                   const SimulationConfig& config, std::ostream& out) {
    const std::string digest = detail::config_digest(config);
    for (const auto& row : report.rows) {
        nlohmann::json j;
        j["config"] = digest;
        j["design"] = design_name(report.design);
        j["seed"] = report.seed;
        nlohmann::json cell;
        cell["n"] = row.cell.n;
        cell["p"] = row.cell.p;
        cell["q"] = row.cell.q;
        cell["rho_y"] = row.cell.rho_y;
        cell["rho_delta"] = row.cell.rho_delta;
        cell["rho_x"] = row.cell.rho_x;
        cell["rho_e"] = row.cell.rho_e;
        cell["s_star"] = row.cell.s_star;
        cell["r_star"] = row.cell.r_star;
        j["cell"] = std::move(cell);
        j["estimator"] = estimator_name(row.estimator);
        nlohmann::json losses = nlohmann::json::array();
        nlohmann::json failures = nlohmann::json::object();
        nlohmann::json metadata = nlohmann::json::array();
        for (size_t r = 0; r < row.reps.size(); ++r) {
            losses.push_back(row.reps[r].loss);
            if (!row.reps[r].failure.empty())
                failures[std::to_string(r)] = row.reps[r].failure;
            metadata.push_back(detail::metadata_json(row.reps[r].metadata));
        }
        j["losses"] = std::move(losses);
        j["failures"] = std::move(failures);
        j["metadata"] = std::move(metadata);
        j["mean"] = row.mean;
        j["se"] = row.se;
        j["reps"] = row.n_ok;
        out << j.dump() << "\n";
    }
}

inline void write_holdout_csv(const HoldoutReport& report, std::ostream& out) {
    out << "# indirect-estimator holdout report\n";
    out << "# seed=" << report.seed << " replications=" << report.replications
        << " test_rows=" << report.n_test << "\n";
    out << "# loss: per-response squared error summed over test rows, averaged over splits\n";
    out << "estimator,response,mean,se,reps\n";
    for (const auto& row : report.rows)
        out << estimator_name(row.estimator) << ',' << row.response << ','
            << fmt17(row.mean) << ',' << fmt17(row.se) << ',' << row.n_ok << "\n";
}

inline void write_holdout_jsonl(const HoldoutReport& report, std::ostream& out) {
    for (const auto& row : report.rows) {
        nlohmann::json j;
        j["seed"] = report.seed;
        j["estimator"] = estimator_name(row.estimator);
        j["response"] = row.response;
        j["losses"] = row.losses;
        j["mean"] = row.mean;
        j["se"] = row.se;
        j["reps"] = row.n_ok;
        out << j.dump() << "\n";
    }
}

inline void write_decay_csv(const DecayReport& report, std::ostream& out) {
    out << "# indirect-estimator decay diagnostic\n";
    out << "# seed=" << report.seed << " replications=" << report.replications
        << " loss: spectral norm of coefficient error\n";
    out << "design,estimator,n,mean,se,reps\n";
    for (const auto& row : report.rows)
        out << design_name(report.design) << ',' << estimator_name(report.estimator) << ','
            << row.n << ',' << fmt17(row.mean) << ',' << fmt17(row.se) << ',' << row.n_ok
            << "\n";
}

inline void write_decay_jsonl(const DecayReport& report, std::ostream& out) {
    for (const auto& row : report.rows) {
        nlohmann::json j;
        j["seed"] = report.seed;
        j["design"] = design_name(report.design);
        j["estimator"] = estimator_name(report.estimator);
        j["n"] = row.n;
        j["losses"] = row.losses;
        j["mean"] = row.mean;
        j["se"] = row.se;
        j["reps"] = row.n_ok;
        out << j.dump() << "\n";
    }
}

/// Reads a dataset whose header tags predictors with prefix "x_" and
/// responses with "y_"; other columns are ignored. Plain decimal numbers,
/// comma separated.
inline std::pair<Matrix, Matrix> read_xy_csv(std::istream& in) {
    std::string line;
    auto split = [](const std::string& text) {
        std::vector<std::string> out;
        std::string tok;
        std::istringstream is(text);
        while (std::getline(is, tok, ',')) out.push_back(tok);
        if (!text.empty() && text.back() == ',') out.push_back("");
        return out;
    };
    auto trim = [](std::string s) {
        while (!s.empty() && (s.back() == '\r' || std::isspace(static_cast<unsigned char>(s.back()))))
            s.pop_back();
        size_t b = 0;
        while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        return s.substr(b);
    };

    if (!std::getline(in, line)) throw ParseError("csv: empty input");
    std::vector<std::string> header = split(line);
    std::vector<int> x_cols, y_cols;
    for (int i = 0; i < int(header.size()); ++i) {
        const std::string name = trim(header[size_t(i)]);
        if (name.rfind("x_", 0) == 0) x_cols.push_back(i);
        else if (name.rfind("y_", 0) == 0) y_cols.push_back(i);
    }
    if (x_cols.empty() || y_cols.empty())
        throw ParseError("csv: need at least one x_ column and one y_ column");

    std::vector<std::vector<double>> x_rows, y_rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::vector<std::string> toks = split(line);
        if (toks.size() != header.size())
            throw ParseError("csv: line " + std::to_string(lineno) + " has " +
                             std::to_string(toks.size()) + " fields, expected " +
                             std::to_string(header.size()));
        auto parse = [&](int col) {
            const std::string tok = trim(toks[size_t(col)]);
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (tok.empty() || end != tok.c_str() + tok.size())
                throw ParseError("csv: line " + std::to_string(lineno) +
                                 ": not a number: '" + tok + "'");
            return v;
        };
        std::vector<double> xr, yr;
        for (int c : x_cols) xr.push_back(parse(c));
        for (int c : y_cols) yr.push_back(parse(c));
        x_rows.push_back(std::move(xr));
        y_rows.push_back(std::move(yr));
    }
    if (x_rows.empty()) throw ParseError("csv: no data rows");

    Matrix x(Eigen::Index(x_rows.size()), Eigen::Index(x_cols.size()));
    Matrix y(Eigen::Index(y_rows.size()), Eigen::Index(y_cols.size()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = x_rows[size_t(i)][size_t(j)];
        for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) = y_rows[size_t(i)][size_t(j)];
    }
    return {std::move(x), std::move(y)};
}

inline std::pair<Matrix, Matrix> read_xy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("csv: cannot open " + path);
    return read_xy_csv(in);
}

/// Holdout study straight from a dataset file; the x/y members of the config
/// are replaced by the file contents.
inline HoldoutReport run_holdout_study(const std::string& csv_path, HoldoutConfig config) {
    auto [x, y] = read_xy_csv(csv_path);
    if (x.rows() < 10)
        throw TooFewRows("run_holdout_study: need at least 10 rows, got " +
                         std::to_string(x.rows()));
    config.x = std::move(x);
    config.y = std::move(y);
    return run_holdout_study(config);
}

/// The published simulation grids, one per table number 1-4. Cell order and
/// estimator order follow the printed tables.
inline SimulationConfig reproduce_table_config(int table) {
    SimulationConfig config;
    config.replications = 50;
    auto sparse_cells = [](Eigen::Index n, Eigen::Index dim) {
        const double rows[][3] = {{0.7, 0.0, 0.1}, {0.7, 0.5, 0.1}, {0.7, 0.7, 0.1},
                                  {0.7, 0.9, 0.1}, {0.0, 0.9, 0.1}, {0.5, 0.9, 0.1},
                                  {0.9, 0.9, 0.1}, {0.7, 0.9, 0.3}, {0.7, 0.9, 0.5},
                                  {0.7, 0.9, 0.7}};
        std::vector<CellParams> cells;
        for (const auto& r : rows) {
            CellParams c;
            c.n = n;
            c.p = dim;
            c.q = dim;
            c.rho_y = r[0];
            c.rho_delta = r[1];
            c.s_star = r[2];
            cells.push_back(c);
        }
        return cells;
    };
    switch (table) {
        case 1:
            config.design = DesignFamily::SparseInverse;
            config.cells = sparse_cells(100, 20);
            config.estimators = {EstimatorKind::IndirectLasso,  EstimatorKind::OracleBoth,
                                 EstimatorKind::OracleDelta,    EstimatorKind::OracleY,
                                 EstimatorKind::IndirectSample, EstimatorKind::OlsPseudo,
                                 EstimatorKind::RidgePerResponse, EstimatorKind::RidgeSingle};
            return config;
        case 2:
            config.design = DesignFamily::SparseInverse;
            config.cells = sparse_cells(50, 60);
            config.estimators = {EstimatorKind::IndirectLasso, EstimatorKind::OracleBoth,
                                 EstimatorKind::OracleDelta,   EstimatorKind::OracleY,
                                 EstimatorKind::OlsPseudo,     EstimatorKind::RidgePerResponse,
                                 EstimatorKind::RidgeSingle};
            return config;
        case 3: {
            config.design = DesignFamily::ReducedRankInverse;
            const double rows[][3] = {{0.7, 0.0, 10}, {0.7, 0.5, 10}, {0.7, 0.7, 10},
                                      {0.7, 0.9, 10}, {0.0, 0.9, 10}, {0.5, 0.9, 10},
                                      {0.9, 0.9, 10}, {0.7, 0.9, 4},  {0.7, 0.9, 8},
                                      {0.7, 0.9, 12}, {0.7, 0.9, 16}};
            for (const auto& r : rows) {
                CellParams c;
                c.n = 100;
                c.p = 20;
                c.q = 20;
                c.rho_y = r[0];
                c.rho_delta = r[1];
                c.r_star = Eigen::Index(r[2]);
                config.cells.push_back(c);
            }
            config.estimators = {EstimatorKind::IndirectRank,    EstimatorKind::OracleBothRank,
                                 EstimatorKind::OracleDeltaRank, EstimatorKind::OracleYRank,
                                 EstimatorKind::IndirectRankML,  EstimatorKind::OlsPseudo,
                                 EstimatorKind::ReducedRankForward};
            return config;
        }
        case 4: {
            config.design = DesignFamily::ReducedRankForward;
            const double rows[][3] = {{0.0, 0.9, 10}, {0.5, 0.9, 10}, {0.7, 0.9, 10},
                                      {0.9, 0.9, 10}, {0.7, 0.0, 10}, {0.7, 0.5, 10},
                                      {0.7, 0.7, 10}, {0.7, 0.9, 4},  {0.7, 0.9, 8},
                                      {0.7, 0.9, 12}, {0.7, 0.9, 16}};
            for (const auto& r : rows) {
                CellParams c;
                c.n = 100;
                c.p = 20;
                c.q = 20;
                c.rho_x = r[0];
                c.rho_e = r[1];
                c.r_star = Eigen::Index(r[2]);
                config.cells.push_back(c);
            }
            config.estimators = {EstimatorKind::IndirectRank,    EstimatorKind::OracleBothRank,
                                 EstimatorKind::OracleDeltaRank, EstimatorKind::OracleYRank,
                                 EstimatorKind::IndirectRankML,  EstimatorKind::OlsPseudo,
                                 EstimatorKind::ReducedRankForward};
            return config;
        }
        default:
            throw BadArgument("reproduce_table_config: table must be 1, 2, 3, or 4");
    }
}

}  // namespace ireg
