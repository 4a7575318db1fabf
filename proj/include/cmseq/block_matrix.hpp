#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cmseq/errors.hpp"

namespace cmseq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Default relative tolerance for zero tests and symmetry checks.
inline constexpr double kDefaultTol = 1e-8;

/// Dense real matrix addressed as a square grid of square blocks.
/// Holds joint covariances and precisions of stacked sequences: n_blocks
/// is the number of time indices (N+1), block_dim the per-time state
/// dimension d.
class BlockMatrix {
public:
    BlockMatrix() = default;

    /// Zero matrix with the given block layout.
    BlockMatrix(int n_blocks, int block_dim);

    /// Wraps an existing dense matrix; its size must be an exact multiple
    /// of block_dim in both axes.
    BlockMatrix(Mat data, int block_dim);

    int n_blocks() const { return n_blocks_; }
    int block_dim() const { return block_dim_; }
    int size() const { return n_blocks_ * block_dim_; }

    Eigen::Block<const Mat> block(int i, int j) const;
    Eigen::Block<Mat> block(int i, int j);
    void set_block(int i, int j, const Mat& value);

    const Mat& dense() const { return data_; }
    Mat& dense() { return data_; }

    /// Largest absolute entry (0 for an empty matrix).
    double max_abs() const;

    bool is_symmetric(double tol = kDefaultTol) const;

    /// Throws DimensionMismatch unless symmetric within tol (relative to
    /// the largest entry).
    void require_symmetric(double tol = kDefaultTol) const;

private:
    void check_block_index(int i, int j) const;

    int n_blocks_ = 0;
    int block_dim_ = 0;
    Mat data_;
};

/// Cholesky factorization of a symmetric positive definite matrix.
/// Construction throws NotPositiveDefinite when a pivot fails, which is
/// the toolkit-wide definiteness test.
class PdFactor {
public:
    explicit PdFactor(const Mat& a, double sym_tol = kDefaultTol);

    int dim() const { return static_cast<int>(llt_.matrixLLT().rows()); }

    Mat solve(const Mat& rhs) const;
    Mat inverse() const;

    /// Lower-triangular L with A = L L'.
    Mat lower() const { return llt_.matrixL(); }

private:
    Eigen::LLT<Mat> llt_;
};

PdFactor factor_pd(const Mat& a, double sym_tol = kDefaultTol);
PdFactor factor_pd(const BlockMatrix& a, double sym_tol = kDefaultTol);

/// Convenience wrappers around PdFactor.
Mat pd_inverse(const Mat& a);
Mat pd_solve(const Mat& a, const Mat& rhs);

} // namespace cmseq
