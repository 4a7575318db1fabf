#pragma once

#include <map>

#include "cmseq/transforms.hpp"

namespace cmseq {

/// Joint precision C^{-1} of a CM_c model with boundary, assembled by
/// stacking the model equations into a unit-diagonal coefficient matrix S
/// and forming S' diag(G_k)^{-1} S. Symmetric positive definite.
BlockMatrix assemble_precision(const CMcModel& m);
BlockMatrix assemble_precision(const CML0k2Model& m);

/// Joint covariance of a Markov model: diagonal recursion
/// C_k = M_{k,k-1} C_{k-1} M_{k,k-1}' + M_k and cross blocks propagated
/// through the transition products.
BlockMatrix markov_joint_covariance(const MarkovModel& m);

struct WindowResult {
    int k1 = 0;
    Direction direction = Direction::F;
    bool holds = false;
    double residual = 0.0;
};

/// Full structural classification of a sequence from its covariance.
struct SequenceClassification {
    bool is_markov = false;
    bool is_reciprocal = false;
    bool is_cml = false;
    bool is_cmf = false;
    std::vector<WindowResult> window_results; // [k1,N]-CM_F sweeps, k1 in [1,N-3]
    std::map<std::string, double> residuals;
    /// Cross-check: reciprocal (cyclic precision) must coincide with
    /// CM_L and CM_F plus every [k1,N]-CM_F window.
    bool windows_consistent = true;
    double tolerance_used = 0.0;
};

/// Inverts the covariance and classifies its precision structure; the
/// default tolerance is looser than the assembly default to absorb
/// inversion conditioning.
SequenceClassification classify_sequence(const BlockMatrix& cov, double tol = 1e-7);

/// Gaussian conditional-independence test on a joint covariance: true iff
/// every cross block between `inside` and `outside` vanishes in the
/// conditional covariance given the `given` indices (Schur complement).
/// The three index sets must be disjoint.
bool conditional_independence_oracle(const BlockMatrix& cov, const std::vector<int>& inside,
                                     const std::vector<int>& outside, const std::vector<int>& given,
                                     double tol = kDefaultTol);

/// Checks the covariance split C = B + Gamma D Gamma' implied by a
/// representation, with B embedding the underlying Markov covariance
/// (upper-left for direction L, lower-right for F) and Gamma stacking the
/// weights with an identity at the conditioning endpoint. Returns true
/// iff the residual is at most tol * (1 + max entry of C); the relative
/// residual is written to *residual when given.
bool verify_covariance_split(const BlockMatrix& cov, const Representation& r, double tol = kDefaultTol,
                             double* residual = nullptr);

} // namespace cmseq
