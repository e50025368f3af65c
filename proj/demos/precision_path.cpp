// Sweeps the off-diagonal penalty of the sparse precision solver on data
// from a planted tridiagonal model and reports the cross-validated choice.

#include <cstdio>

#include "ireg/ireg.hpp"

using namespace ireg;

namespace {

int off_diagonal_nonzeros(const Matrix& omega) {
    int count = 0;
    for (Eigen::Index j = 0; j < omega.rows(); ++j)
        for (Eigen::Index k = j + 1; k < omega.cols(); ++k)
            if (omega(j, k) != 0.0) ++count;
    return count;
}

}  // namespace

int main() {
    const Eigen::Index p = 10, n = 200;
    Matrix omega_true = Matrix::Identity(p, p);
    for (Eigen::Index j = 0; j + 1 < p; ++j) omega_true(j, j + 1) = omega_true(j + 1, j) = 0.35;
    const Matrix rows = sample_mvn(spd_inverse(SymPosDef(omega_true)), n, 7);
    const Matrix s = rows.transpose() * rows / double(n);

    std::printf("%10s  %14s  %s\n", "gamma", "off-diag nnz", "||Omega - Omega*||_F");
    GlassoWarm warm;
    for (double gamma : {1.0, 0.3, 0.1, 0.03, 0.01}) {
        const SymPosDef omega = glasso(s, gamma, {}, &warm);
        std::printf("%10.3f  %14d  %.4f\n", gamma, off_diagonal_nonzeros(omega.matrix()),
                    (omega.matrix() - omega_true).norm());
    }

    const CvChoice<double> choice =
        cv_precision_gamma(rows, PrecisionPenalty::L1OffDiagonal, Grid::default_grid(),
                           make_folds(n, 5, 1));
    std::printf("cross-validation picks gamma=%.4g (grid index %d%s)\n", choice.value,
                choice.index, choice.at_edge ? ", at grid edge" : "");
    return 0;
}
