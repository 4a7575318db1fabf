#include "cmseq/analysis.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace cmseq {

namespace {

void require_valid_with_boundary(const CMcModel& m) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("CMcModel: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }
    m.require_boundary();
}

BlockMatrix precision_from_stacked(const Mat& coeff, const std::vector<Mat>& noise_covs, int d) {
    const int size = static_cast<int>(coeff.rows());
    Mat weighted(size, size);
    for (int k = 0; k < static_cast<int>(noise_covs.size()); ++k) {
        weighted.middleRows(k * d, d) = PdFactor(noise_covs[static_cast<size_t>(k)]).solve(coeff.middleRows(k * d, d));
    }
    Mat precision = coeff.transpose() * weighted;
    precision = 0.5 * (precision + precision.transpose());
    return BlockMatrix(std::move(precision), d);
}

} // namespace

BlockMatrix assemble_precision(const CMcModel& m) {
    require_valid_with_boundary(m);
    const int n = m.horizon;
    const int d = m.state_dim;
    const CMcBoundary& b = *m.boundary;
    const Mat eye = Mat::Identity(d, d);

    Mat coeff = Mat::Zero((n + 1) * d, (n + 1) * d);
    std::vector<Mat> noise(static_cast<size_t>(n + 1));
    auto put = [&](int row, int col, const Mat& value) { coeff.block(row * d, col * d, d, d) = value; };

    for (int k = 0; k <= n; ++k) put(k, k, eye);

    if (m.direction == Direction::L) {
        put(0, n, -b.cross_gain);
        noise[0] = b.other_end_cov;
        noise[static_cast<size_t>(n)] = b.endpoint_cov;
        for (int k = 1; k <= n - 1; ++k) {
            put(k, k - 1, -m.transition(k));
            put(k, n, -m.coupling(k));
            noise[static_cast<size_t>(k)] = m.noise(k);
        }
    } else {
        put(1, 0, -b.cross_gain);
        noise[0] = b.endpoint_cov;
        noise[1] = b.other_end_cov;
        for (int k = 2; k <= n; ++k) {
            put(k, k - 1, -m.transition(k));
            put(k, 0, -m.coupling(k));
            noise[static_cast<size_t>(k)] = m.noise(k);
        }
    }
    return precision_from_stacked(coeff, noise, d);
}

BlockMatrix assemble_precision(const CML0k2Model& m) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("CML0k2Model: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }
    const int n = m.horizon;
    const int d = m.state_dim;
    const int k2 = m.waypoint;
    const Mat eye = Mat::Identity(d, d);

    Mat coeff = Mat::Zero((n + 1) * d, (n + 1) * d);
    std::vector<Mat> noise(static_cast<size_t>(n + 1));
    auto put = [&](int row, int col, const Mat& value) { coeff.block(row * d, col * d, d, d) = value; };

    for (int k = 0; k <= n; ++k) put(k, k, eye);

    put(0, k2, -m.origin_gain);
    noise[0] = m.origin_cov;
    for (int k = 1; k <= k2 - 1; ++k) {
        put(k, k - 1, -m.seg1_transition(k));
        put(k, k2, -m.seg1_coupling(k));
        noise[static_cast<size_t>(k)] = m.seg1_noise(k);
    }
    noise[static_cast<size_t>(k2)] = m.waypoint_cov;
    for (int i = 0; i <= k2; ++i) {
        put(n, i, -m.terminal_gain(i));
    }
    noise[static_cast<size_t>(n)] = m.terminal_cov;
    for (int k = k2 + 1; k <= n - 1; ++k) {
        put(k, k - 1, -m.seg2_transition(k));
        put(k, n, -m.seg2_coupling(k));
        noise[static_cast<size_t>(k)] = m.seg2_noise(k);
    }
    return precision_from_stacked(coeff, noise, d);
}

BlockMatrix markov_joint_covariance(const MarkovModel& m) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("MarkovModel: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }
    const int n = m.horizon;
    const int d = m.state_dim;

    BlockMatrix cov(n + 1, d);
    std::vector<Mat> diag(static_cast<size_t>(n + 1));
    diag[0] = m.noise(0);
    for (int k = 1; k <= n; ++k) {
        Mat c = m.transition(k) * diag[static_cast<size_t>(k - 1)] * m.transition(k).transpose() + m.noise(k);
        diag[static_cast<size_t>(k)] = 0.5 * (c + c.transpose());
    }
    for (int k = 0; k <= n; ++k) cov.set_block(k, k, diag[static_cast<size_t>(k)]);

    // Cross blocks: Cov(x_j, x_i) = C_j M_{i|j}' for i > j.
    for (int j = 0; j <= n; ++j) {
        Mat prod = Mat::Identity(d, d); // M_{i|j}
        for (int i = j + 1; i <= n; ++i) {
            prod = m.transition(i) * prod;
            const Mat cross = diag[static_cast<size_t>(j)] * prod.transpose();
            cov.set_block(j, i, cross);
            cov.set_block(i, j, cross.transpose());
        }
    }
    return cov;
}

SequenceClassification classify_sequence(const BlockMatrix& cov, double tol) {
    cov.require_symmetric();
    const BlockMatrix precision(factor_pd(cov).inverse(), cov.block_dim());
    const int n = precision.n_blocks() - 1;

    SequenceClassification out;
    out.tolerance_used = tol;

    const StructureReport structure = structure_classify(precision, tol);
    out.is_markov = structure.is_tridiagonal;
    out.is_reciprocal = structure.is_cyclic_tridiagonal;
    out.is_cml = structure.is_cml_form;
    out.is_cmf = structure.is_cmf_form;
    out.residuals["offband_max"] = structure.max_offband_residual / (1.0 + precision.max_abs());

    bool all_windows = true;
    for (int k1 = 1; k1 <= n - 3; ++k1) {
        WindowResult w;
        w.k1 = k1;
        w.direction = Direction::F;
        w.holds = schur_window_classify(precision, k1, n, Direction::F, tol, &w.residual);
        all_windows = all_windows && w.holds;
        out.window_results.push_back(w);
    }
    out.windows_consistent = (out.is_reciprocal == (out.is_cml && out.is_cmf && all_windows));
    return out;
}

bool conditional_independence_oracle(const BlockMatrix& cov, const std::vector<int>& inside,
                                     const std::vector<int>& outside, const std::vector<int>& given, double tol) {
    cov.require_symmetric();
    const int n = cov.n_blocks();
    const int d = cov.block_dim();

    std::set<int> seen;
    auto check_set = [&](const std::vector<int>& indices, const char* name) {
        for (int idx : indices) {
            if (idx < 0 || idx >= n) {
                throw IndexOutOfRange(std::string("conditional_independence_oracle: ") + name + " index " +
                                      std::to_string(idx) + " outside [0," + std::to_string(n - 1) + "]");
            }
            if (!seen.insert(idx).second) {
                throw IndexOverlap(std::string("conditional_independence_oracle: index ") + std::to_string(idx) +
                                   " appears in more than one set");
            }
        }
    };
    check_set(inside, "inside");
    check_set(outside, "outside");
    check_set(given, "given");

    if (inside.empty() || outside.empty()) return true;

    auto gather = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
        Mat out(static_cast<int>(rows.size()) * d, static_cast<int>(cols.size()) * d);
        for (size_t r = 0; r < rows.size(); ++r) {
            for (size_t c = 0; c < cols.size(); ++c) {
                out.block(static_cast<int>(r) * d, static_cast<int>(c) * d, d, d) = cov.block(rows[r], cols[c]);
            }
        }
        return out;
    };

    std::vector<int> joint = inside;
    joint.insert(joint.end(), outside.begin(), outside.end());

    Mat conditional = gather(joint, joint);
    if (!given.empty()) {
        const Mat c_ug = gather(joint, given);
        const Mat c_gg = gather(given, given);
        conditional -= c_ug * PdFactor(c_gg).solve(c_ug.transpose());
    }

    const double scale = 1.0 + cov.max_abs();
    const int split = static_cast<int>(inside.size()) * d;
    const Mat cross = conditional.topRightCorner(split, conditional.cols() - split);
    return cross.cwiseAbs().maxCoeff() <= tol * scale;
}

bool verify_covariance_split(const BlockMatrix& cov, const Representation& r, double tol, double* residual) {
    const ValidationReport report = validate(r);
    if (!report.valid) {
        throw IncompleteParameters("Representation: " +
                                   (report.issues.empty() ? std::string("invalid") : report.issues.front()));
    }
    const int n = r.horizon();
    const int d = r.state_dim();
    if (cov.n_blocks() != n + 1 || cov.block_dim() != d) {
        throw DimensionMismatch("verify_covariance_split: covariance size does not match representation");
    }

    const BlockMatrix underlying_cov = markov_joint_covariance(r.underlying);
    Mat embedded = Mat::Zero((n + 1) * d, (n + 1) * d);
    Mat weights = Mat::Zero((n + 1) * d, d);

    if (r.direction == Direction::L) {
        embedded.topLeftCorner(n * d, n * d) = underlying_cov.dense();
        for (int k = 0; k <= n - 1; ++k) weights.middleRows(k * d, d) = r.gamma_at(k);
        weights.middleRows(n * d, d) = Mat::Identity(d, d);
    } else {
        embedded.bottomRightCorner(n * d, n * d) = underlying_cov.dense();
        weights.middleRows(0, d) = Mat::Identity(d, d);
        for (int k = 1; k <= n; ++k) weights.middleRows(k * d, d) = r.gamma_at(k);
    }

    const Mat reconstructed = embedded + weights * r.endpoint_cov * weights.transpose();
    const double rel = (cov.dense() - reconstructed).cwiseAbs().maxCoeff() / (1.0 + cov.max_abs());
    if (residual != nullptr) *residual = rel;
    return rel <= tol;
}

} // namespace cmseq
