#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmseq/structure.hpp"

namespace cmseq {

/// First-order Gauss-Markov model over [0,N]:
///   x_0 = e_0,  x_k = M_{k,k-1} x_{k-1} + e_k,  k in [1,N]
/// with white noise covariances M_k, all positive definite.
struct MarkovModel {
    int horizon = 0;   // N
    int state_dim = 0; // d

    std::vector<Mat> transitions; // size N, transitions[k-1] = M_{k,k-1}
    std::vector<Mat> noise_covs;  // size N+1, noise_covs[k] = M_k

    static MarkovModel zeros(int horizon, int state_dim);

    const Mat& transition(int k) const; // k in [1,N]
    Mat& transition(int k);
    const Mat& noise(int k) const; // k in [0,N]
    Mat& noise(int k);
};

/// Boundary parameters of a CM_c model, anchored at the conditioning
/// endpoint.
///
/// Direction L:  x_N = e_N (cov endpoint_cov), x_0 = cross_gain x_N + e_0
///               (cov other_end_cov).
/// Direction F:  x_0 = e_0 (cov endpoint_cov), x_1 = cross_gain x_0 + e_1
///               (cov other_end_cov); cross_gain is the combined
///               first-step coefficient (transition and coupling at k = 1
///               act on the same x_0 and are stored as one matrix).
struct CMcBoundary {
    Mat endpoint_cov;
    Mat cross_gain;
    Mat other_end_cov;
};

/// CM_c dynamic model over [0,N]:
///   x_k = G_{k,k-1} x_{k-1} + G_{k,c} x_c + e_k
/// with interior indices k in [1,N-1] for direction L (c = N) and
/// k in [2,N] for direction F (c = 0). The boundary is optional so that
/// interior-only models (e.g. a Markov-induced interior before a boundary
/// has been chosen) can be passed around; operations that need it throw
/// IncompleteParameters.
struct CMcModel {
    Direction direction = Direction::L;
    int horizon = 0;
    int state_dim = 0;

    std::vector<Mat> transitions; // G_{k,k-1}
    std::vector<Mat> couplings;   // G_{k,c}
    std::vector<Mat> noise_covs;  // G_k
    std::optional<CMcBoundary> boundary;

    static CMcModel zeros(Direction direction, int horizon, int state_dim);

    int interior_begin() const { return direction == Direction::L ? 1 : 2; }
    int interior_end() const { return direction == Direction::L ? horizon - 1 : horizon; }
    int interior_count() const { return interior_end() - interior_begin() + 1; }

    const Mat& transition(int k) const;
    Mat& transition(int k);
    const Mat& coupling(int k) const;
    Mat& coupling(int k);
    const Mat& noise(int k) const;
    Mat& noise(int k);

    const CMcBoundary& require_boundary() const;
};

/// Model of a sequence that is CM_L over both [0,N] and [0,k2], built
/// around a waypoint at k2 and a terminal state regressed on the whole
/// first segment:
///   x_{k2} = e_{k2}, x_0 = origin_gain x_{k2} + e_0
///   x_k = G_{k,k-1} x_{k-1} + G_{k,k2} x_{k2} + e_k,   k in [1,k2-1]
///   x_N = sum_{i=0}^{k2} T_i x_i + e_N
///   x_k = G_{k,k-1} x_{k-1} + G_{k,N} x_N + e_k,       k in [k2+1,N-1]
struct CML0k2Model {
    int horizon = 0;   // N >= 4
    int state_dim = 0; // d
    int waypoint = 0;  // k2 in [2,N-2]

    std::vector<Mat> seg1_transitions; // k in [1,k2-1]
    std::vector<Mat> seg1_couplings;   // G_{k,k2}
    std::vector<Mat> seg1_noise_covs;  // G_k

    Mat waypoint_cov; // G_{k2}
    Mat origin_gain;  // G_{0,k2}
    Mat origin_cov;   // G_0

    std::vector<Mat> terminal_gains; // G_{N,i}, i in [0,k2]
    Mat terminal_cov;                // G_N

    std::vector<Mat> seg2_transitions; // k in [k2+1,N-1]
    std::vector<Mat> seg2_couplings;   // G_{k,N}
    std::vector<Mat> seg2_noise_covs;  // G_k

    static CML0k2Model zeros(int horizon, int state_dim, int waypoint);

    const Mat& seg1_transition(int k) const; // k in [1,k2-1]
    const Mat& seg1_coupling(int k) const;
    const Mat& seg1_noise(int k) const;
    const Mat& terminal_gain(int i) const; // i in [0,k2]
    const Mat& seg2_transition(int k) const; // k in [k2+1,N-1]
    const Mat& seg2_coupling(int k) const;
    const Mat& seg2_noise(int k) const;
};

/// Outcome of structural validation. `valid` covers dimension
/// consistency, index-range completeness, and positive definiteness of
/// every covariance that is present; `has_boundary` tells whether a CM_c
/// model carries boundary parameters (absence is not an error).
struct ValidationReport {
    bool valid = true;
    bool has_boundary = false;
    std::vector<std::string> issues;
};

ValidationReport validate(const MarkovModel& m);
ValidationReport validate(const CMcModel& m);
ValidationReport validate(const CML0k2Model& m);

/// Result of a parameter-identity check: holds iff every residual is at
/// most tol * scale, scale = 1 + largest entry over the involved blocks.
struct ConditionResult {
    bool holds = false;
    std::vector<double> residuals;
    double scale = 1.0;
    double tolerance_used = 0.0;

    double max_residual() const;
};

/// Coupling identity that makes a CM_c model reciprocal:
///   G_k^{-1} G_{k,c} = G_{k+1,k}' G_{k+1}^{-1} G_{k+1,c}
/// over k in [1,N-2] (direction L) or k in [2,N-1] (direction F).
/// Residuals are reported per k.
ConditionResult check_reciprocal_condition(const CMcModel& m, double tol = kDefaultTol);

/// Reciprocal identity plus the boundary condition that selects a Markov
/// member: G_0^{-1} G_{0,N} = G_{1,0}' G_1^{-1} G_{1,N} for direction L
/// (requires the boundary), or a vanishing terminal coupling G_{N,0} for
/// direction F. The last residual entry is the boundary residual.
ConditionResult check_markov_condition(const CMcModel& m, double tol = kDefaultTol);

/// Partial coupling identity deciding CM_L && [k1,N]-CM_F membership:
/// the reciprocal identity restricted to k in [k1+1,N-2]. Windows with
/// k1 in [N-2,N] are trivially satisfied.
ConditionResult check_window_cmf_condition(const CMcModel& m, int k1, double tol = kDefaultTol);

/// Parameter conditions under which a CML0k2Model's joint precision has
/// the CM_L form: orthogonality of non-adjacent terminal gains
///   G_{N,j}' G_N^{-1} G_{N,i} = 0,  j in [0,k2-3], i in [j+2,k2-1]
/// and the coupling balance
///   G_l^{-1} G_{l,k2} = G_{l+1,l}' G_{l+1}^{-1} G_{l+1,k2}
///                       + G_{N,l}' G_N^{-1} G_{N,k2},  l in [0,k2-2].
ConditionResult check_intersection_conditions(const CML0k2Model& m, double tol = kDefaultTol);

/// Boundary in the origin-anchored form x_0 = e_0, x_N = endpoint_gain x_0 + e_N
/// (direction L only); equivalent to CMcBoundary via the joint law of
/// (x_0, x_N).
struct OriginAnchoredBoundary {
    Mat origin_cov;    // Cov(e_0)
    Mat endpoint_gain; // gain on x_0
    Mat endpoint_cov;  // Cov(e_N)
};

OriginAnchoredBoundary to_origin_anchored(const CMcBoundary& b);
CMcBoundary to_endpoint_anchored(const OriginAnchoredBoundary& b);

} // namespace cmseq
