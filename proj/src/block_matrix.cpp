#include "cmseq/block_matrix.hpp"

#include <string>

namespace cmseq {

BlockMatrix::BlockMatrix(int n_blocks, int block_dim)
    : n_blocks_(n_blocks), block_dim_(block_dim) {
    if (n_blocks < 1 || block_dim < 1) {
        throw DimensionMismatch("BlockMatrix: n_blocks and block_dim must be positive");
    }
    data_ = Mat::Zero(size(), size());
}

BlockMatrix::BlockMatrix(Mat data, int block_dim) : block_dim_(block_dim) {
    if (block_dim < 1) {
        throw DimensionMismatch("BlockMatrix: block_dim must be positive");
    }
    if (data.rows() != data.cols() || data.rows() % block_dim != 0 || data.rows() == 0) {
        throw DimensionMismatch("BlockMatrix: dense size " + std::to_string(data.rows()) + "x" +
                                std::to_string(data.cols()) + " is not square or not a multiple of block_dim " +
                                std::to_string(block_dim));
    }
    n_blocks_ = static_cast<int>(data.rows()) / block_dim;
    data_ = std::move(data);
}

void BlockMatrix::check_block_index(int i, int j) const {
    if (i < 0 || i >= n_blocks_ || j < 0 || j >= n_blocks_) {
        throw IndexOutOfRange("BlockMatrix: block (" + std::to_string(i) + "," + std::to_string(j) +
                              ") outside " + std::to_string(n_blocks_) + "x" + std::to_string(n_blocks_) + " grid");
    }
}

Eigen::Block<const Mat> BlockMatrix::block(int i, int j) const {
    check_block_index(i, j);
    return data_.block(i * block_dim_, j * block_dim_, block_dim_, block_dim_);
}

Eigen::Block<Mat> BlockMatrix::block(int i, int j) {
    check_block_index(i, j);
    return data_.block(i * block_dim_, j * block_dim_, block_dim_, block_dim_);
}

void BlockMatrix::set_block(int i, int j, const Mat& value) {
    check_block_index(i, j);
    if (value.rows() != block_dim_ || value.cols() != block_dim_) {
        throw DimensionMismatch("BlockMatrix::set_block: block must be " + std::to_string(block_dim_) + "x" +
                                std::to_string(block_dim_));
    }
    data_.block(i * block_dim_, j * block_dim_, block_dim_, block_dim_) = value;
}

double BlockMatrix::max_abs() const {
    return data_.size() == 0 ? 0.0 : data_.cwiseAbs().maxCoeff();
}

bool BlockMatrix::is_symmetric(double tol) const {
    const double scale = 1.0 + max_abs();
    return (data_ - data_.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

void BlockMatrix::require_symmetric(double tol) const {
    if (!is_symmetric(tol)) {
        throw DimensionMismatch("BlockMatrix: matrix is not symmetric within tolerance");
    }
}

PdFactor::PdFactor(const Mat& a, double sym_tol) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw DimensionMismatch("factor_pd: matrix must be square and non-empty");
    }
    const double scale = 1.0 + (a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale) {
        throw DimensionMismatch("factor_pd: matrix is not symmetric within tolerance");
    }
    // Factor the symmetrized matrix so honest fp asymmetry cannot flip a pivot.
    llt_.compute(Mat(0.5 * (a + a.transpose())));
    if (llt_.info() != Eigen::Success) {
        throw NotPositiveDefinite("factor_pd: matrix is not positive definite");
    }
}

Mat PdFactor::solve(const Mat& rhs) const {
    if (rhs.rows() != dim()) {
        throw DimensionMismatch("PdFactor::solve: rhs has " + std::to_string(rhs.rows()) + " rows, expected " +
                                std::to_string(dim()));
    }
    return llt_.solve(rhs);
}

Mat PdFactor::inverse() const {
    return llt_.solve(Mat::Identity(dim(), dim()));
}

PdFactor factor_pd(const Mat& a, double sym_tol) { return PdFactor(a, sym_tol); }

PdFactor factor_pd(const BlockMatrix& a, double sym_tol) { return PdFactor(a.dense(), sym_tol); }

Mat pd_inverse(const Mat& a) { return PdFactor(a).inverse(); }

Mat pd_solve(const Mat& a, const Mat& rhs) { return PdFactor(a).solve(rhs); }

} // namespace cmseq
