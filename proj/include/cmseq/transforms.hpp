#pragma once

#include "cmseq/models.hpp"

namespace cmseq {

/// Products and accumulated noise covariances of a Markov model toward
/// its final time:
///   m_horizon[k] = M_{N,N-1} ... M_{k+1,k}   (identity at k = N)
///   c_horizon[k] = sum_{n=k}^{N-1} m_horizon[n+1] M_{n+1} m_horizon[n+1]'
struct HorizonAggregates {
    std::vector<Mat> m_horizon; // size N+1, k in [0,N]
    std::vector<Mat> c_horizon; // size N,   k in [0,N-1]
};

HorizonAggregates horizon_aggregates(const MarkovModel& m);

/// Interior CM_L parameters of the model induced by a Markov model:
///   G_k       = (M_k^{-1} + m_horizon[k]' c_horizon[k]^{-1} m_horizon[k])^{-1}
///   G_{k,N}   = G_k m_horizon[k]' c_horizon[k]^{-1}
///   G_{k,k-1} = M_{k,k-1} - G_{k,N} m_horizon[k] M_{k,k-1}
/// The result always satisfies the reciprocal coupling identity; no
/// boundary is attached.
CMcModel induce_cml_from_markov(const MarkovModel& m);

/// Boundary parameters that make the induced model reproduce the Markov
/// model's own joint law: endpoint_cov = C_N, cross_gain = C_{0,N} C_N^{-1},
/// other_end_cov = C_0 - C_{0,N} C_N^{-1} C_{N,0}.
CMcBoundary markov_matching_boundary(const MarkovModel& m);

/// Rebuilds the Markov model from a reciprocal direction-L model whose
/// boundary selects a Markov member. Throws NotReciprocal when the
/// coupling identity fails and BoundaryNotMarkov when the boundary does
/// not satisfy cross_gain = G_0 G_{1,0}' G_1^{-1} G_{1,N} (both within
/// 10 * tol). The returned model's joint covariance equals the input's.
MarkovModel recover_markov_from_reciprocal_cml(const CMcModel& m, double tol = kDefaultTol);

/// Decomposition of a CM_c sequence into an uncorrelated pair: a Markov
/// sequence over the indices away from the conditioning endpoint, plus a
/// weighted copy of the endpoint state,
///   x_k = y_k + gamma_k x_c.
/// The underlying model is stored over [0, N-1]; for direction F its
/// index j corresponds to sequence time j+1 (gamma[j] likewise).
struct Representation {
    Direction direction = Direction::L;
    MarkovModel underlying;
    std::vector<Mat> gamma; // size N
    Mat endpoint_cov;       // D = Cov(x_c)

    int horizon() const { return underlying.horizon + 1; }
    int state_dim() const { return underlying.state_dim; }

    /// gamma at sequence time k: k in [0,N-1] for L, [1,N] for F.
    const Mat& gamma_at(int k) const;
    Mat& gamma_at(int k);
};

ValidationReport validate(const Representation& r);

/// Unique representation of a CM_c model (boundary required):
///   L: D = G_N, gamma_0 = G_{0,N}, U_k = G_k, U_{k,k-1} = G_{k,k-1},
///      gamma_k = G_{k,k-1} gamma_{k-1} + G_{k,N}.
///   F: D = G_0, gamma_1 = combined first-step gain, U_1 = G_1, then
///      gamma_k = G_{k,k-1} gamma_{k-1} + G_{k,0} for k in [2,N].
Representation decompose_to_representation(const CMcModel& m);

/// Exact inverse of decompose_to_representation; always yields a valid
/// CM_c model with boundary.
CMcModel construct_from_representation(const Representation& r);

enum class SequenceClass { GeneralCM, Reciprocal, Markov };

inline const char* to_string(SequenceClass c) {
    switch (c) {
        case SequenceClass::Reciprocal: return "reciprocal";
        case SequenceClass::Markov: return "markov";
        default: return "general_cm";
    }
}

struct RepresentationClassification {
    SequenceClass sequence_class = SequenceClass::GeneralCM;
    std::vector<double> residuals; // per interior identity
    double markov_residual = 0.0;
    double scale = 1.0;
    double tolerance_used = 0.0;
};

/// Class of the sequence constructed from a representation, decided on
/// the representation parameters alone:
///   reciprocal iff U_k^{-1}(gamma_k - U_{k,k-1} gamma_{k-1})
///                  = U_{k+1,k}' U_{k+1}^{-1}(gamma_{k+1} - U_{k+1,k} gamma_k)
///   over k in [1,N-2] (L) or [2,N-1] (F); Markov additionally requires
///   U_0^{-1} gamma_0 = U_{1,0}' U_1^{-1}(gamma_1 - U_{1,0} gamma_0) (L)
///   or gamma_N = U_{N,N-1} gamma_{N-1} (F).
RepresentationClassification classify_representation(const Representation& r, double tol = kDefaultTol);

/// Underlying Markov model of the CM_L model induced by m, computed
/// directly from m's parameters:
///   U_k = G_k of the induced model, U_{k,k-1} = induced G_{k,k-1};
/// it depends only on the induced interior. The initial covariance U_0 is
/// set to the Markov-member value C_0 - C_{0,N} C_N^{-1} C_{N,0}.
MarkovModel underlying_markov_of_induced(const MarkovModel& m);

} // namespace cmseq
