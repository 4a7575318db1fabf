#include "cmseq/simulate.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

namespace cmseq {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::uint64_t hash, const void* bytes, size_t count) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (size_t i = 0; i < count; ++i) {
        hash ^= p[i];
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

std::uint64_t hash_int(std::uint64_t hash, std::int64_t value) { return fnv1a(hash, &value, sizeof(value)); }

std::uint64_t hash_matrix(std::uint64_t hash, const Mat& m) {
    hash = hash_int(hash, m.rows());
    hash = hash_int(hash, m.cols());
    if (m.size() > 0) hash = fnv1a(hash, m.data(), sizeof(double) * static_cast<size_t>(m.size()));
    return hash;
}

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;

/// d standard normals keyed by (seed, sample, time): splitmix64 stream
/// through the key, Box-Muller on consecutive outputs.
Vec keyed_normals(std::uint64_t seed, std::uint64_t sample, std::uint64_t time, int d) {
    std::uint64_t state = seed;
    state ^= splitmix64(state) + 0x9E3779B97F4A7C15ULL * (sample + 1);
    state ^= splitmix64(state) + 0x9E3779B97F4A7C15ULL * (time + 1);

    auto uniform = [&]() {
        // (0,1]: top 53 bits, shifted away from zero.
        return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
    };

    Vec out(d);
    for (int i = 0; i < d; i += 2) {
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[i] = radius * std::cos(angle);
        if (i + 1 < d) out[i + 1] = radius * std::sin(angle);
    }
    return out;
}

struct NoiseSource {
    std::uint64_t seed;
    std::vector<Mat> chol; // lower factor per time index

    Vec draw(long sample, int time) const {
        const int d = static_cast<int>(chol[static_cast<size_t>(time)].rows());
        return chol[static_cast<size_t>(time)] *
               keyed_normals(seed, static_cast<std::uint64_t>(sample), static_cast<std::uint64_t>(time), d);
    }
};

TrajectoryBatch make_batch(int horizon, int state_dim, long n, std::uint64_t seed, std::uint64_t digest) {
    if (n < 1) throw IndexOutOfRange("sample_trajectories: need at least one sample");
    TrajectoryBatch batch;
    batch.horizon = horizon;
    batch.state_dim = state_dim;
    batch.n_samples = n;
    batch.seed = seed;
    batch.model_digest = digest;
    batch.data = Mat::Zero(n, (horizon + 1) * state_dim);
    return batch;
}

} // namespace

std::uint64_t model_digest(const MarkovModel& m) {
    std::uint64_t h = kFnvOffset;
    h = hash_int(h, 1); // family tag
    h = hash_int(h, m.horizon);
    h = hash_int(h, m.state_dim);
    for (const Mat& t : m.transitions) h = hash_matrix(h, t);
    for (const Mat& c : m.noise_covs) h = hash_matrix(h, c);
    return h;
}

std::uint64_t model_digest(const CMcModel& m) {
    std::uint64_t h = kFnvOffset;
    h = hash_int(h, 2);
    h = hash_int(h, m.direction == Direction::L ? 0 : 1);
    h = hash_int(h, m.horizon);
    h = hash_int(h, m.state_dim);
    for (const Mat& t : m.transitions) h = hash_matrix(h, t);
    for (const Mat& c : m.couplings) h = hash_matrix(h, c);
    for (const Mat& c : m.noise_covs) h = hash_matrix(h, c);
    if (m.boundary.has_value()) {
        h = hash_matrix(h, m.boundary->endpoint_cov);
        h = hash_matrix(h, m.boundary->cross_gain);
        h = hash_matrix(h, m.boundary->other_end_cov);
    }
    return h;
}

std::uint64_t model_digest(const CML0k2Model& m) {
    std::uint64_t h = kFnvOffset;
    h = hash_int(h, 3);
    h = hash_int(h, m.horizon);
    h = hash_int(h, m.state_dim);
    h = hash_int(h, m.waypoint);
    for (const Mat& t : m.seg1_transitions) h = hash_matrix(h, t);
    for (const Mat& c : m.seg1_couplings) h = hash_matrix(h, c);
    for (const Mat& c : m.seg1_noise_covs) h = hash_matrix(h, c);
    h = hash_matrix(h, m.waypoint_cov);
    h = hash_matrix(h, m.origin_gain);
    h = hash_matrix(h, m.origin_cov);
    for (const Mat& g : m.terminal_gains) h = hash_matrix(h, g);
    h = hash_matrix(h, m.terminal_cov);
    for (const Mat& t : m.seg2_transitions) h = hash_matrix(h, t);
    for (const Mat& c : m.seg2_couplings) h = hash_matrix(h, c);
    for (const Mat& c : m.seg2_noise_covs) h = hash_matrix(h, c);
    return h;
}

TrajectoryBatch sample_trajectories(const MarkovModel& m, long n, std::uint64_t seed) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("MarkovModel: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }
    const int d = m.state_dim;

    NoiseSource noise{seed, {}};
    noise.chol.reserve(static_cast<size_t>(m.horizon + 1));
    for (int k = 0; k <= m.horizon; ++k) noise.chol.push_back(PdFactor(m.noise(k)).lower());

    TrajectoryBatch batch = make_batch(m.horizon, d, n, seed, model_digest(m));
    for (long s = 0; s < n; ++s) {
        Vec state = noise.draw(s, 0);
        batch.data.block(s, 0, 1, d) = state.transpose();
        for (int k = 1; k <= m.horizon; ++k) {
            state = m.transition(k) * state + noise.draw(s, k);
            batch.data.block(s, k * d, 1, d) = state.transpose();
        }
    }
    return batch;
}

TrajectoryBatch sample_trajectories(const CMcModel& m, long n, std::uint64_t seed) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("CMcModel: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }
    const CMcBoundary& b = m.require_boundary();
    const int d = m.state_dim;
    const int horizon = m.horizon;

    NoiseSource noise{seed, std::vector<Mat>(static_cast<size_t>(horizon + 1))};
    if (m.direction == Direction::L) {
        noise.chol[0] = PdFactor(b.other_end_cov).lower();
        noise.chol[static_cast<size_t>(horizon)] = PdFactor(b.endpoint_cov).lower();
    } else {
        noise.chol[0] = PdFactor(b.endpoint_cov).lower();
        noise.chol[1] = PdFactor(b.other_end_cov).lower();
    }
    for (int k = m.interior_begin(); k <= m.interior_end(); ++k) {
        noise.chol[static_cast<size_t>(k)] = PdFactor(m.noise(k)).lower();
    }

    TrajectoryBatch batch = make_batch(horizon, d, n, seed, model_digest(m));
    for (long s = 0; s < n; ++s) {
        if (m.direction == Direction::L) {
            const Vec last = noise.draw(s, horizon);
            batch.data.block(s, horizon * d, 1, d) = last.transpose();
            Vec state = b.cross_gain * last + noise.draw(s, 0);
            batch.data.block(s, 0, 1, d) = state.transpose();
            for (int k = 1; k <= horizon - 1; ++k) {
                state = m.transition(k) * state + m.coupling(k) * last + noise.draw(s, k);
                batch.data.block(s, k * d, 1, d) = state.transpose();
            }
        } else {
            const Vec first = noise.draw(s, 0);
            batch.data.block(s, 0, 1, d) = first.transpose();
            Vec state = b.cross_gain * first + noise.draw(s, 1);
            batch.data.block(s, d, 1, d) = state.transpose();
            for (int k = 2; k <= horizon; ++k) {
                state = m.transition(k) * state + m.coupling(k) * first + noise.draw(s, k);
                batch.data.block(s, k * d, 1, d) = state.transpose();
            }
        }
    }
    return batch;
}

TrajectoryBatch sample_trajectories(const CML0k2Model& m, long n, std::uint64_t seed) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("CML0k2Model: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }
    const int d = m.state_dim;
    const int horizon = m.horizon;
    const int k2 = m.waypoint;

    NoiseSource noise{seed, std::vector<Mat>(static_cast<size_t>(horizon + 1))};
    noise.chol[0] = PdFactor(m.origin_cov).lower();
    for (int k = 1; k <= k2 - 1; ++k) noise.chol[static_cast<size_t>(k)] = PdFactor(m.seg1_noise(k)).lower();
    noise.chol[static_cast<size_t>(k2)] = PdFactor(m.waypoint_cov).lower();
    for (int k = k2 + 1; k <= horizon - 1; ++k) {
        noise.chol[static_cast<size_t>(k)] = PdFactor(m.seg2_noise(k)).lower();
    }
    noise.chol[static_cast<size_t>(horizon)] = PdFactor(m.terminal_cov).lower();

    TrajectoryBatch batch = make_batch(horizon, d, n, seed, model_digest(m));
    for (long s = 0; s < n; ++s) {
        auto state_at = [&](int k) { return batch.data.block(s, k * d, 1, d).transpose(); };
        auto put = [&](int k, const Vec& v) { batch.data.block(s, k * d, 1, d) = v.transpose(); };

        const Vec waypoint = noise.draw(s, k2);
        put(k2, waypoint);
        Vec state = m.origin_gain * waypoint + noise.draw(s, 0);
        put(0, state);
        for (int k = 1; k <= k2 - 1; ++k) {
            state = m.seg1_transition(k) * state + m.seg1_coupling(k) * waypoint + noise.draw(s, k);
            put(k, state);
        }
        Vec last = noise.draw(s, horizon);
        for (int i = 0; i <= k2; ++i) last += m.terminal_gain(i) * Vec(state_at(i));
        put(horizon, last);
        state = state_at(k2);
        for (int k = k2 + 1; k <= horizon - 1; ++k) {
            state = m.seg2_transition(k) * state + m.seg2_coupling(k) * last + noise.draw(s, k);
            put(k, state);
        }
    }
    return batch;
}

BlockMatrix empirical_covariance(const TrajectoryBatch& b) {
    if (b.n_samples < 2) {
        throw IndexOutOfRange("empirical_covariance: need at least two samples");
    }
    const Eigen::RowVectorXd mean = b.data.colwise().mean();
    const Mat centered = b.data.rowwise() - mean;
    Mat cov = centered.transpose() * centered / static_cast<double>(b.n_samples - 1);
    cov = 0.5 * (cov + cov.transpose());
    return BlockMatrix(std::move(cov), b.state_dim);
}

std::pair<CMcModel, TrajectoryBatch> destination_directed_generate(const MarkovModel& motion,
                                                                   const EndpointJoint& endpoints, long n,
                                                                   std::uint64_t seed) {
    const int d = motion.state_dim;
    if (endpoints.cov_x0.rows() != d || endpoints.cov_x0.cols() != d || endpoints.cov_xN.rows() != d ||
        endpoints.cov_xN.cols() != d || endpoints.cross.rows() != d || endpoints.cross.cols() != d) {
        throw DimensionMismatch("destination_directed_generate: endpoint blocks must be d x d");
    }
    Mat joint(2 * d, 2 * d);
    joint.topLeftCorner(d, d) = endpoints.cov_x0;
    joint.topRightCorner(d, d) = endpoints.cross;
    joint.bottomLeftCorner(d, d) = endpoints.cross.transpose();
    joint.bottomRightCorner(d, d) = endpoints.cov_xN;
    PdFactor joint_check(joint); // rejects degenerate endpoint joints

    CMcModel model = induce_cml_from_markov(motion);
    CMcBoundary boundary;
    const PdFactor dest(endpoints.cov_xN);
    boundary.endpoint_cov = endpoints.cov_xN;
    boundary.cross_gain = dest.solve(endpoints.cross.transpose()).transpose();
    Mat other = endpoints.cov_x0 - boundary.cross_gain * endpoints.cross.transpose();
    boundary.other_end_cov = 0.5 * (other + other.transpose());
    model.boundary = boundary;

    TrajectoryBatch batch = sample_trajectories(model, n, seed);
    return {std::move(model), std::move(batch)};
}

} // namespace cmseq
