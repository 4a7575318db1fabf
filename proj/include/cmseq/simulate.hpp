#pragma once

#include <cstdint>
#include <utility>

#include "cmseq/analysis.hpp"

namespace cmseq {

/// Batch of sampled trajectories. Row s holds sample s as the stacked
/// vector [x_0', ..., x_N']; regenerating with the same model, count, and
/// seed reproduces the data bit for bit.
struct TrajectoryBatch {
    int horizon = 0;
    int state_dim = 0;
    long n_samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t model_digest = 0;
    Mat data; // n_samples x (N+1)*d

    Eigen::Block<const Mat> state(long sample, int k) const {
        return data.block(sample, k * state_dim, 1, state_dim);
    }
};

/// Content hashes of the generating models (dimensions plus raw
/// parameter bytes).
std::uint64_t model_digest(const MarkovModel& m);
std::uint64_t model_digest(const CMcModel& m);
std::uint64_t model_digest(const CML0k2Model& m);

/// Draws n trajectories. Noise is generated by a counter-based scheme
/// keyed by (seed, sample, time), so results do not depend on evaluation
/// order.
TrajectoryBatch sample_trajectories(const MarkovModel& m, long n, std::uint64_t seed);
TrajectoryBatch sample_trajectories(const CMcModel& m, long n, std::uint64_t seed);
TrajectoryBatch sample_trajectories(const CML0k2Model& m, long n, std::uint64_t seed);

/// Unbiased sample covariance of the stacked state vectors.
BlockMatrix empirical_covariance(const TrajectoryBatch& b);

/// Joint second moments of the origin and destination states.
struct EndpointJoint {
    Mat cov_x0;
    Mat cov_xN;
    Mat cross; // Cov(x_0, x_N)
};

/// Builds a reciprocal direction-L model from a free-motion Markov model
/// and a chosen endpoint joint (interior induced from the motion model;
/// boundary endpoint_cov = cov_xN, cross_gain = cross cov_xN^{-1},
/// other_end_cov = the Schur complement of cov_xN in the joint), then
/// samples n trajectories from it. The 2d x 2d endpoint joint must be
/// positive definite.
std::pair<CMcModel, TrajectoryBatch> destination_directed_generate(const MarkovModel& motion,
                                                                   const EndpointJoint& endpoints, long n,
                                                                   std::uint64_t seed);

} // namespace cmseq
