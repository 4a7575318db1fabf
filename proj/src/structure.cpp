#include "cmseq/structure.hpp"

#include <algorithm>
#include <string>

namespace cmseq {

namespace {

double block_max_abs(const BlockMatrix& m, int i, int j) {
    return m.block(i, j).cwiseAbs().maxCoeff();
}

} // namespace

StructureReport structure_classify(const BlockMatrix& j, double tol) {
    if (tol <= 0.0) {
        throw DimensionMismatch("structure_classify: tol must be positive");
    }
    j.require_symmetric(std::max(tol, kDefaultTol));

    const int n = j.n_blocks();
    const int last = n - 1;
    const double threshold = tol * (1.0 + j.max_abs());

    StructureReport report;
    report.tolerance_used = tol;
    report.is_tridiagonal = true;
    report.is_cyclic_tridiagonal = true;
    report.is_cml_form = true;
    report.is_cmf_form = true;

    // Only blocks strictly outside the band can violate any of the forms.
    for (int r = 0; r < n; ++r) {
        for (int c = r + 2; c < n; ++c) {
            const double mag = std::max(block_max_abs(j, r, c), block_max_abs(j, c, r));
            report.max_offband_residual = std::max(report.max_offband_residual, mag);
            if (mag <= threshold) continue;
            report.is_tridiagonal = false;
            const bool corner = (r == 0 && c == last);
            if (!corner) report.is_cyclic_tridiagonal = false;
            if (c != last) report.is_cml_form = false;
            if (r != 0) report.is_cmf_form = false;
        }
    }
    return report;
}

bool schur_window_classify(const BlockMatrix& j, int k1, int k2, Direction c, double tol) {
    return schur_window_classify(j, k1, k2, c, tol, nullptr);
}

bool schur_window_classify(const BlockMatrix& j, int k1, int k2, Direction c, double tol, double* residual) {
    const int n = j.n_blocks();
    const int last = n - 1;
    const int d = j.block_dim();
    if (k1 < 0 || k2 > last || k1 >= k2) {
        throw IndexOutOfRange("schur_window_classify: invalid window [" + std::to_string(k1) + "," +
                              std::to_string(k2) + "]");
    }
    if (k1 != 0 && k2 != last) {
        throw IndexOutOfRange("schur_window_classify: window must touch index 0 or index N");
    }
    factor_pd(j); // the window tests are only meaningful for a PD precision

    Mat delta;
    if (k1 == 0 && k2 == last) {
        delta = j.dense();
    } else if (k1 == 0) {
        // Window [0,k2]: keep blocks 0..k2, eliminate blocks k2+1..N.
        const int keep = (k2 + 1) * d;
        const int drop = (last - k2) * d;
        const Mat a11 = j.dense().topLeftCorner(keep, keep);
        const Mat a12 = j.dense().topRightCorner(keep, drop);
        const Mat a22 = j.dense().bottomRightCorner(drop, drop);
        delta = a11 - a12 * PdFactor(a22).solve(a12.transpose());
    } else {
        // Window [k1,N]: keep blocks k1..N, eliminate blocks 0..k1-1.
        const int drop = k1 * d;
        const int keep = (last - k1 + 1) * d;
        const Mat a11 = j.dense().topLeftCorner(drop, drop);
        const Mat a12 = j.dense().topRightCorner(drop, keep);
        const Mat a22 = j.dense().bottomRightCorner(keep, keep);
        delta = a22 - a12.transpose() * PdFactor(a11).solve(a12);
    }

    BlockMatrix window(Mat(0.5 * (delta + delta.transpose())), d);
    const StructureReport report = structure_classify(window, tol);
    if (residual != nullptr) {
        // Residual over the blocks the requested form requires to be zero,
        // relative to the window's largest entry.
        const int m = window.n_blocks();
        double worst = 0.0;
        for (int r = 0; r < m; ++r) {
            for (int col = r + 2; col < m; ++col) {
                const bool allowed = (c == Direction::L) ? (col == m - 1) : (r == 0);
                if (allowed) continue;
                worst = std::max(worst, block_max_abs(window, r, col));
            }
        }
        *residual = worst / (1.0 + window.max_abs());
    }
    return c == Direction::L ? report.is_cml_form : report.is_cmf_form;
}

} // namespace cmseq
