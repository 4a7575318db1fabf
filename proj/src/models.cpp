#include "cmseq/models.hpp"

#include <algorithm>
#include <cmath>

namespace cmseq {

namespace {

void check_index(int k, int lo, int hi, const char* what) {
    if (k < lo || k > hi) {
        throw IndexOutOfRange(std::string(what) + ": index " + std::to_string(k) + " outside [" +
                              std::to_string(lo) + "," + std::to_string(hi) + "]");
    }
}

bool is_square(const Mat& m, int d) { return m.rows() == d && m.cols() == d; }

bool is_pd(const Mat& m, int d) {
    if (!is_square(m, d)) return false;
    try {
        PdFactor f(m);
        return true;
    } catch (const Error&) {
        return false;
    }
}

void check_block(ValidationReport& report, const Mat& m, int d, bool must_be_pd, const std::string& name) {
    if (!is_square(m, d)) {
        report.valid = false;
        report.issues.push_back("DimensionMismatch at " + name);
        return;
    }
    if (must_be_pd && !is_pd(m, d)) {
        report.valid = false;
        report.issues.push_back("NotPositiveDefinite at " + name);
    }
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

} // namespace

MarkovModel MarkovModel::zeros(int horizon, int state_dim) {
    MarkovModel m;
    m.horizon = horizon;
    m.state_dim = state_dim;
    m.transitions.assign(static_cast<size_t>(std::max(horizon, 0)), Mat::Zero(state_dim, state_dim));
    m.noise_covs.assign(static_cast<size_t>(std::max(horizon + 1, 0)), Mat::Zero(state_dim, state_dim));
    return m;
}

const Mat& MarkovModel::transition(int k) const {
    check_index(k, 1, horizon, "MarkovModel::transition");
    return transitions[static_cast<size_t>(k - 1)];
}

Mat& MarkovModel::transition(int k) {
    check_index(k, 1, horizon, "MarkovModel::transition");
    return transitions[static_cast<size_t>(k - 1)];
}

const Mat& MarkovModel::noise(int k) const {
    check_index(k, 0, horizon, "MarkovModel::noise");
    return noise_covs[static_cast<size_t>(k)];
}

Mat& MarkovModel::noise(int k) {
    check_index(k, 0, horizon, "MarkovModel::noise");
    return noise_covs[static_cast<size_t>(k)];
}

CMcModel CMcModel::zeros(Direction direction, int horizon, int state_dim) {
    CMcModel m;
    m.direction = direction;
    m.horizon = horizon;
    m.state_dim = state_dim;
    const int count = std::max(m.interior_count(), 0);
    m.transitions.assign(static_cast<size_t>(count), Mat::Zero(state_dim, state_dim));
    m.couplings.assign(static_cast<size_t>(count), Mat::Zero(state_dim, state_dim));
    m.noise_covs.assign(static_cast<size_t>(count), Mat::Zero(state_dim, state_dim));
    return m;
}

const Mat& CMcModel::transition(int k) const {
    check_index(k, interior_begin(), interior_end(), "CMcModel::transition");
    return transitions[static_cast<size_t>(k - interior_begin())];
}

Mat& CMcModel::transition(int k) {
    check_index(k, interior_begin(), interior_end(), "CMcModel::transition");
    return transitions[static_cast<size_t>(k - interior_begin())];
}

const Mat& CMcModel::coupling(int k) const {
    check_index(k, interior_begin(), interior_end(), "CMcModel::coupling");
    return couplings[static_cast<size_t>(k - interior_begin())];
}

Mat& CMcModel::coupling(int k) {
    check_index(k, interior_begin(), interior_end(), "CMcModel::coupling");
    return couplings[static_cast<size_t>(k - interior_begin())];
}

const Mat& CMcModel::noise(int k) const {
    check_index(k, interior_begin(), interior_end(), "CMcModel::noise");
    return noise_covs[static_cast<size_t>(k - interior_begin())];
}

Mat& CMcModel::noise(int k) {
    check_index(k, interior_begin(), interior_end(), "CMcModel::noise");
    return noise_covs[static_cast<size_t>(k - interior_begin())];
}

const CMcBoundary& CMcModel::require_boundary() const {
    if (!boundary.has_value()) {
        throw IncompleteParameters("CMcModel: operation requires boundary parameters");
    }
    return *boundary;
}

CML0k2Model CML0k2Model::zeros(int horizon, int state_dim, int waypoint) {
    CML0k2Model m;
    m.horizon = horizon;
    m.state_dim = state_dim;
    m.waypoint = waypoint;
    const Mat z = Mat::Zero(state_dim, state_dim);
    m.seg1_transitions.assign(static_cast<size_t>(std::max(waypoint - 1, 0)), z);
    m.seg1_couplings = m.seg1_transitions;
    m.seg1_noise_covs = m.seg1_transitions;
    m.waypoint_cov = z;
    m.origin_gain = z;
    m.origin_cov = z;
    m.terminal_gains.assign(static_cast<size_t>(std::max(waypoint + 1, 0)), z);
    m.terminal_cov = z;
    m.seg2_transitions.assign(static_cast<size_t>(std::max(horizon - waypoint - 1, 0)), z);
    m.seg2_couplings = m.seg2_transitions;
    m.seg2_noise_covs = m.seg2_transitions;
    return m;
}

const Mat& CML0k2Model::seg1_transition(int k) const {
    check_index(k, 1, waypoint - 1, "CML0k2Model::seg1_transition");
    return seg1_transitions[static_cast<size_t>(k - 1)];
}

const Mat& CML0k2Model::seg1_coupling(int k) const {
    check_index(k, 1, waypoint - 1, "CML0k2Model::seg1_coupling");
    return seg1_couplings[static_cast<size_t>(k - 1)];
}

const Mat& CML0k2Model::seg1_noise(int k) const {
    check_index(k, 1, waypoint - 1, "CML0k2Model::seg1_noise");
    return seg1_noise_covs[static_cast<size_t>(k - 1)];
}

const Mat& CML0k2Model::terminal_gain(int i) const {
    check_index(i, 0, waypoint, "CML0k2Model::terminal_gain");
    return terminal_gains[static_cast<size_t>(i)];
}

const Mat& CML0k2Model::seg2_transition(int k) const {
    check_index(k, waypoint + 1, horizon - 1, "CML0k2Model::seg2_transition");
    return seg2_transitions[static_cast<size_t>(k - waypoint - 1)];
}

const Mat& CML0k2Model::seg2_coupling(int k) const {
    check_index(k, waypoint + 1, horizon - 1, "CML0k2Model::seg2_coupling");
    return seg2_couplings[static_cast<size_t>(k - waypoint - 1)];
}

const Mat& CML0k2Model::seg2_noise(int k) const {
    check_index(k, waypoint + 1, horizon - 1, "CML0k2Model::seg2_noise");
    return seg2_noise_covs[static_cast<size_t>(k - waypoint - 1)];
}

ValidationReport validate(const MarkovModel& m) {
    ValidationReport report;
    if (m.horizon < 2) {
        report.valid = false;
        report.issues.push_back("IndexOutOfRange: horizon must be at least 2");
    }
    if (m.state_dim < 1) {
        report.valid = false;
        report.issues.push_back("DimensionMismatch: state_dim must be positive");
        return report;
    }
    if (static_cast<int>(m.transitions.size()) != std::max(m.horizon, 0)) {
        report.valid = false;
        report.issues.push_back("IncompleteParameters: expected " + std::to_string(m.horizon) + " transitions");
        return report;
    }
    if (static_cast<int>(m.noise_covs.size()) != m.horizon + 1) {
        report.valid = false;
        report.issues.push_back("IncompleteParameters: expected " + std::to_string(m.horizon + 1) + " noise_covs");
        return report;
    }
    for (int k = 1; k <= m.horizon; ++k) {
        check_block(report, m.transition(k), m.state_dim, false, "transition[" + std::to_string(k) + "]");
    }
    for (int k = 0; k <= m.horizon; ++k) {
        check_block(report, m.noise(k), m.state_dim, true, "noise_cov[" + std::to_string(k) + "]");
    }
    return report;
}

ValidationReport validate(const CMcModel& m) {
    ValidationReport report;
    if (m.horizon < 3) {
        report.valid = false;
        report.issues.push_back("IndexOutOfRange: horizon must be at least 3");
    }
    if (m.state_dim < 1) {
        report.valid = false;
        report.issues.push_back("DimensionMismatch: state_dim must be positive");
        return report;
    }
    const int count = m.interior_count();
    if (static_cast<int>(m.transitions.size()) != count || static_cast<int>(m.couplings.size()) != count ||
        static_cast<int>(m.noise_covs.size()) != count) {
        report.valid = false;
        report.issues.push_back("IncompleteParameters: expected " + std::to_string(count) +
                                " interior transition/coupling/noise blocks");
        return report;
    }
    for (int k = m.interior_begin(); k <= m.interior_end(); ++k) {
        const std::string suffix = "[" + std::to_string(k) + "]";
        check_block(report, m.transition(k), m.state_dim, false, "transition" + suffix);
        check_block(report, m.coupling(k), m.state_dim, false, "coupling" + suffix);
        check_block(report, m.noise(k), m.state_dim, true, "noise_cov" + suffix);
    }
    if (m.boundary.has_value()) {
        report.has_boundary = true;
        check_block(report, m.boundary->endpoint_cov, m.state_dim, true, "boundary.endpoint_cov");
        check_block(report, m.boundary->cross_gain, m.state_dim, false, "boundary.cross_gain");
        check_block(report, m.boundary->other_end_cov, m.state_dim, true, "boundary.other_end_cov");
    }
    return report;
}

ValidationReport validate(const CML0k2Model& m) {
    ValidationReport report;
    report.has_boundary = true;
    if (m.horizon < 4 || m.waypoint < 2 || m.waypoint > m.horizon - 2) {
        report.valid = false;
        report.issues.push_back("IndexOutOfRange: need horizon >= 4 and waypoint in [2,horizon-2]");
    }
    if (m.state_dim < 1) {
        report.valid = false;
        report.issues.push_back("DimensionMismatch: state_dim must be positive");
        return report;
    }
    const int seg1 = std::max(m.waypoint - 1, 0);
    const int seg2 = std::max(m.horizon - m.waypoint - 1, 0);
    if (static_cast<int>(m.seg1_transitions.size()) != seg1 || static_cast<int>(m.seg1_couplings.size()) != seg1 ||
        static_cast<int>(m.seg1_noise_covs.size()) != seg1 ||
        static_cast<int>(m.terminal_gains.size()) != m.waypoint + 1 ||
        static_cast<int>(m.seg2_transitions.size()) != seg2 || static_cast<int>(m.seg2_couplings.size()) != seg2 ||
        static_cast<int>(m.seg2_noise_covs.size()) != seg2) {
        report.valid = false;
        report.issues.push_back("IncompleteParameters: segment or terminal-gain vectors have wrong length");
        return report;
    }
    for (int k = 1; k <= m.waypoint - 1; ++k) {
        const std::string suffix = "[" + std::to_string(k) + "]";
        check_block(report, m.seg1_transition(k), m.state_dim, false, "seg1_transition" + suffix);
        check_block(report, m.seg1_coupling(k), m.state_dim, false, "seg1_coupling" + suffix);
        check_block(report, m.seg1_noise(k), m.state_dim, true, "seg1_noise_cov" + suffix);
    }
    check_block(report, m.waypoint_cov, m.state_dim, true, "waypoint_cov");
    check_block(report, m.origin_gain, m.state_dim, false, "origin_gain");
    check_block(report, m.origin_cov, m.state_dim, true, "origin_cov");
    for (int i = 0; i <= m.waypoint; ++i) {
        check_block(report, m.terminal_gain(i), m.state_dim, false, "terminal_gain[" + std::to_string(i) + "]");
    }
    check_block(report, m.terminal_cov, m.state_dim, true, "terminal_cov");
    for (int k = m.waypoint + 1; k <= m.horizon - 1; ++k) {
        const std::string suffix = "[" + std::to_string(k) + "]";
        check_block(report, m.seg2_transition(k), m.state_dim, false, "seg2_transition" + suffix);
        check_block(report, m.seg2_coupling(k), m.state_dim, false, "seg2_coupling" + suffix);
        check_block(report, m.seg2_noise(k), m.state_dim, true, "seg2_noise_cov" + suffix);
    }
    return report;
}

double ConditionResult::max_residual() const {
    double worst = 0.0;
    for (double r : residuals) worst = std::max(worst, r);
    return worst;
}

namespace {

void require_valid_interior(const CMcModel& m) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("CMcModel: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }
}

} // namespace

ConditionResult check_reciprocal_condition(const CMcModel& m, double tol) {
    require_valid_interior(m);
    ConditionResult result;
    result.tolerance_used = tol;

    // k sweeps [1,N-2] for L, [2,N-1] for F; both compare index k to k+1.
    const int lo = m.interior_begin();
    const int hi = m.interior_end() - 1;
    double scale = 0.0;
    std::vector<Mat> diffs;
    for (int k = lo; k <= hi; ++k) {
        const Mat lhs = PdFactor(m.noise(k)).solve(m.coupling(k));
        const Mat rhs = m.transition(k + 1).transpose() * PdFactor(m.noise(k + 1)).solve(m.coupling(k + 1));
        diffs.push_back(lhs - rhs);
        scale = std::max({scale, max_abs(lhs), max_abs(rhs)});
    }
    result.scale = 1.0 + scale;
    result.holds = true;
    for (const Mat& diff : diffs) {
        const double residual = max_abs(diff);
        result.residuals.push_back(residual);
        if (residual > tol * result.scale) result.holds = false;
    }
    return result;
}

ConditionResult check_markov_condition(const CMcModel& m, double tol) {
    ConditionResult result = check_reciprocal_condition(m, tol);

    Mat lhs, rhs;
    if (m.direction == Direction::L) {
        const CMcBoundary& b = m.require_boundary();
        lhs = PdFactor(b.other_end_cov).solve(b.cross_gain);
        rhs = m.transition(1).transpose() * PdFactor(m.noise(1)).solve(m.coupling(1));
    } else {
        // Direction F: the Markov members are exactly those with no
        // terminal coupling to x_0.
        lhs = m.coupling(m.horizon);
        rhs = Mat::Zero(m.state_dim, m.state_dim);
    }
    result.scale = std::max(result.scale, 1.0 + std::max(max_abs(lhs), max_abs(rhs)));
    const double boundary_residual = max_abs(lhs - rhs);
    result.residuals.push_back(boundary_residual);
    if (boundary_residual > tol * result.scale) result.holds = false;
    return result;
}

ConditionResult check_window_cmf_condition(const CMcModel& m, int k1, double tol) {
    if (m.direction != Direction::L) {
        throw DimensionMismatch("check_window_cmf_condition: model must have direction L");
    }
    require_valid_interior(m);
    if (k1 < 0 || k1 > m.horizon) {
        throw IndexOutOfRange("check_window_cmf_condition: k1 outside [0,N]");
    }

    ConditionResult result;
    result.tolerance_used = tol;
    if (k1 >= m.horizon - 2) {
        // Windows spanning fewer than four states carry no constraint.
        result.holds = true;
        return result;
    }

    double scale = 0.0;
    std::vector<Mat> diffs;
    for (int k = k1 + 1; k <= m.horizon - 2; ++k) {
        const Mat lhs = PdFactor(m.noise(k)).solve(m.coupling(k));
        const Mat rhs = m.transition(k + 1).transpose() * PdFactor(m.noise(k + 1)).solve(m.coupling(k + 1));
        diffs.push_back(lhs - rhs);
        scale = std::max({scale, max_abs(lhs), max_abs(rhs)});
    }
    result.scale = 1.0 + scale;
    result.holds = true;
    for (const Mat& diff : diffs) {
        const double residual = max_abs(diff);
        result.residuals.push_back(residual);
        if (residual > tol * result.scale) result.holds = false;
    }
    return result;
}

ConditionResult check_intersection_conditions(const CML0k2Model& m, double tol) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("CML0k2Model: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }

    ConditionResult result;
    result.tolerance_used = tol;
    const PdFactor terminal(m.terminal_cov);
    const int k2 = m.waypoint;

    double scale = 0.0;
    std::vector<Mat> diffs;

    // Orthogonality of non-adjacent terminal gains.
    for (int j = 0; j + 2 <= k2 - 1; ++j) {
        for (int i = j + 2; i <= k2 - 1; ++i) {
            const Mat product = m.terminal_gain(j).transpose() * terminal.solve(m.terminal_gain(i));
            diffs.push_back(product);
            scale = std::max(scale, max_abs(product));
        }
    }

    // Coupling balance along the first segment; l = 0 uses the origin
    // boundary blocks, l = k2-1 is in-band and carries no constraint.
    auto noise_at = [&](int l) -> const Mat& { return l == 0 ? m.origin_cov : m.seg1_noise(l); };
    auto coupling_at = [&](int l) -> const Mat& { return l == 0 ? m.origin_gain : m.seg1_coupling(l); };
    const Mat terminal_waypoint = terminal.solve(m.terminal_gain(k2));
    for (int l = 0; l <= k2 - 2; ++l) {
        const Mat lhs = PdFactor(noise_at(l)).solve(coupling_at(l));
        const Mat rhs = m.seg1_transition(l + 1).transpose() * PdFactor(noise_at(l + 1)).solve(coupling_at(l + 1)) +
                        m.terminal_gain(l).transpose() * terminal_waypoint;
        diffs.push_back(lhs - rhs);
        scale = std::max({scale, max_abs(lhs), max_abs(rhs)});
    }

    result.scale = 1.0 + scale;
    result.holds = true;
    for (const Mat& diff : diffs) {
        const double residual = max_abs(diff);
        result.residuals.push_back(residual);
        if (residual > tol * result.scale) result.holds = false;
    }
    return result;
}

OriginAnchoredBoundary to_origin_anchored(const CMcBoundary& b) {
    // Joint law of (x_0, x_N) implied by the endpoint-anchored form.
    const Mat var_last = b.endpoint_cov;
    const Mat cross = b.cross_gain * var_last; // Cov(x_0, x_N)
    const Mat var_first = b.other_end_cov + b.cross_gain * var_last * b.cross_gain.transpose();

    OriginAnchoredBoundary out;
    out.origin_cov = var_first;
    out.endpoint_gain = (PdFactor(var_first).solve(cross)).transpose();
    out.endpoint_cov = var_last - out.endpoint_gain * cross;
    out.endpoint_cov = 0.5 * (out.endpoint_cov + out.endpoint_cov.transpose());
    return out;
}

CMcBoundary to_endpoint_anchored(const OriginAnchoredBoundary& b) {
    const Mat var_first = b.origin_cov;
    const Mat cross = var_first * b.endpoint_gain.transpose(); // Cov(x_0, x_N)
    const Mat var_last = b.endpoint_cov + b.endpoint_gain * var_first * b.endpoint_gain.transpose();

    CMcBoundary out;
    out.endpoint_cov = var_last;
    out.cross_gain = PdFactor(var_last).solve(cross.transpose()).transpose();
    out.other_end_cov = var_first - out.cross_gain * cross.transpose();
    out.other_end_cov = 0.5 * (out.other_end_cov + out.other_end_cov.transpose());
    return out;
}

} // namespace cmseq
