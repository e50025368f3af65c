// Generates one dataset from the sparse inverse-regression design, fits a
// few estimators, and prints their coefficient errors.

#include <cstdio>

#include "ireg/ireg.hpp"

using namespace ireg;

int main() {
    const auto [truth, data] =
        generate(SparseInverseModelSpec{100, 20, 20, 0.7, 0.0, 0.1, 42});
    std::printf("n=%d p=%d q=%d, true beta rank %d\n", int(data.n()), int(data.p()),
                int(data.q()), rank_of(truth.beta));

    FitContext ctx(data, &truth, Grid::default_grid(), 1);
    for (EstimatorKind kind : {EstimatorKind::IndirectLasso, EstimatorKind::OracleBoth,
                               EstimatorKind::OlsPseudo, EstimatorKind::RidgeSingle}) {
        const BetaEstimate est = ctx.fit(kind);
        std::printf("%-8s model error %.3f", estimator_name(kind),
                    model_error(est.beta, truth));
        for (const std::string& note : est.metadata.notes)
            std::printf("  [%s]", note.c_str());
        std::printf("\n");
    }
    return 0;
}
