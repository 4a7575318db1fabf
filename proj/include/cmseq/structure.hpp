#pragma once

#include "cmseq/block_matrix.hpp"

namespace cmseq {

/// Conditioning endpoint of a CM model: L conditions on the last state,
/// F on the first.
enum class Direction { L, F };

inline const char* to_string(Direction d) { return d == Direction::L ? "L" : "F"; }

/// Structural pattern tests of a symmetric block matrix.
///
/// A block is counted as zero when its largest absolute entry is at most
/// tol * (1 + largest absolute entry of the whole matrix).
struct StructureReport {
    /// Zero outside the tri-diagonal band.
    bool is_tridiagonal = false;
    /// Band plus the two corner blocks (0,N) / (N,0).
    bool is_cyclic_tridiagonal = false;
    /// Band plus a dense last block row/column.
    bool is_cml_form = false;
    /// Band plus a dense first block row/column.
    bool is_cmf_form = false;
    /// Largest absolute entry over all blocks outside the band.
    double max_offband_residual = 0.0;
    double tolerance_used = 0.0;
};

/// Classifies the block pattern of a symmetric matrix.
StructureReport structure_classify(const BlockMatrix& j, double tol = kDefaultTol);

/// Window membership test on a positive definite precision matrix.
///
/// Supported windows: [0,k2] with 1 <= k2 <= N-1 (pass k1 = 0) and [k1,N]
/// with 1 <= k1 <= N-1 (pass k2 = N). Forms the Schur complement of the
/// complementary index range and reports whether it has the CM_L (c = L)
/// or CM_F (c = F) form. Windows spanning fewer than four blocks are
/// trivially in every CM class and return true.
bool schur_window_classify(const BlockMatrix& j, int k1, int k2, Direction c, double tol = kDefaultTol);

/// Same test, also reporting the off-pattern residual of the Schur
/// complement relative to its largest entry.
bool schur_window_classify(const BlockMatrix& j, int k1, int k2, Direction c, double tol, double* residual);

} // namespace cmseq
