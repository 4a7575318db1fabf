#pragma once

#include "cmseq/models.hpp"

namespace cmseq::testing {

/// Unit random walk over [0,3]: all transitions and noise covariances 1.
inline MarkovModel rw3_markov() {
    MarkovModel m = MarkovModel::zeros(3, 1);
    for (int k = 1; k <= 3; ++k) m.transition(k) = Mat::Identity(1, 1);
    for (int k = 0; k <= 3; ++k) m.noise(k) = Mat::Identity(1, 1);
    return m;
}

inline Mat scalar(double v) { return Mat::Constant(1, 1, v); }

/// Hand-evaluated induced interior of the unit random walk:
/// (G_{1,0}, G_{1,3}, G_1) = (2/3, 1/3, 2/3),
/// (G_{2,1}, G_{2,3}, G_2) = (1/2, 1/2, 1/2).
inline CMcModel rw3_induced_interior() {
    CMcModel m = CMcModel::zeros(Direction::L, 3, 1);
    m.transition(1) = scalar(2.0 / 3.0);
    m.coupling(1) = scalar(1.0 / 3.0);
    m.noise(1) = scalar(2.0 / 3.0);
    m.transition(2) = scalar(0.5);
    m.coupling(2) = scalar(0.5);
    m.noise(2) = scalar(0.5);
    return m;
}

/// Boundary that makes the induced model reproduce the random walk:
/// cross gain 1/4, residual covariance 3/4, endpoint covariance 4.
inline CMcBoundary rw3_markov_member_boundary() {
    CMcBoundary b;
    b.cross_gain = scalar(0.25);
    b.other_end_cov = scalar(0.75);
    b.endpoint_cov = scalar(4.0);
    return b;
}

} // namespace cmseq::testing
