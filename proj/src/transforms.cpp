#include "cmseq/transforms.hpp"

#include <algorithm>
#include <string>

namespace cmseq {

namespace {

void require_valid(const MarkovModel& m) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("MarkovModel: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }
}

void require_valid(const CMcModel& m) {
    const ValidationReport report = validate(m);
    if (!report.valid) {
        throw IncompleteParameters("CMcModel: " +
                                   (report.issues.empty() ? std::string("invalid model") : report.issues.front()));
    }
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

} // namespace

HorizonAggregates horizon_aggregates(const MarkovModel& m) {
    require_valid(m);
    const int n = m.horizon;
    const int d = m.state_dim;

    HorizonAggregates agg;
    agg.m_horizon.assign(static_cast<size_t>(n + 1), Mat::Identity(d, d));
    agg.c_horizon.assign(static_cast<size_t>(n), Mat::Zero(d, d));

    for (int k = n - 1; k >= 0; --k) {
        const Mat& next = agg.m_horizon[static_cast<size_t>(k + 1)];
        agg.m_horizon[static_cast<size_t>(k)] = next * m.transition(k + 1);
        Mat acc = next * m.noise(k + 1) * next.transpose();
        if (k + 1 <= n - 1) acc += agg.c_horizon[static_cast<size_t>(k + 1)];
        agg.c_horizon[static_cast<size_t>(k)] = symmetrized(acc);
    }
    return agg;
}

CMcModel induce_cml_from_markov(const MarkovModel& m) {
    require_valid(m);
    if (m.horizon < 3) {
        throw IndexOutOfRange("induce_cml_from_markov: horizon must be at least 3");
    }
    const HorizonAggregates agg = horizon_aggregates(m);

    CMcModel out = CMcModel::zeros(Direction::L, m.horizon, m.state_dim);
    for (int k = 1; k <= m.horizon - 1; ++k) {
        const Mat& prod = agg.m_horizon[static_cast<size_t>(k)];
        PdFactor horizon_cov(agg.c_horizon[static_cast<size_t>(k)]);
        const Mat weighted = horizon_cov.solve(prod).transpose(); // m_horizon[k]' c_horizon[k]^{-1}
        const Mat info = pd_inverse(m.noise(k)) + weighted * prod;
        out.noise(k) = pd_inverse(symmetrized(info));
        out.coupling(k) = out.noise(k) * weighted;
        out.transition(k) = m.transition(k) - out.coupling(k) * prod * m.transition(k);
    }
    return out;
}

CMcBoundary markov_matching_boundary(const MarkovModel& m) {
    require_valid(m);
    const HorizonAggregates agg = horizon_aggregates(m);

    // Endpoint moments of the Markov law: C_N = C_{N|0} + M_{N|0} C_0 M_{N|0}',
    // C_{0,N} = C_0 M_{N|0}'.
    const Mat& prod0 = agg.m_horizon[0];
    const Mat var_first = m.noise(0);
    const Mat cross = var_first * prod0.transpose();
    const Mat var_last = symmetrized(agg.c_horizon[0] + prod0 * var_first * prod0.transpose());

    CMcBoundary boundary;
    boundary.endpoint_cov = var_last;
    boundary.cross_gain = PdFactor(var_last).solve(cross.transpose()).transpose();
    boundary.other_end_cov = symmetrized(var_first - boundary.cross_gain * cross.transpose());
    return boundary;
}

MarkovModel recover_markov_from_reciprocal_cml(const CMcModel& m, double tol) {
    require_valid(m);
    if (m.direction != Direction::L) {
        throw DimensionMismatch("recover_markov_from_reciprocal_cml: model must have direction L");
    }
    const CMcBoundary& b = m.require_boundary();
    const int n = m.horizon;
    const int d = m.state_dim;

    const ConditionResult reciprocal = check_reciprocal_condition(m, tol);
    if (!reciprocal.holds) {
        throw NotReciprocal("recover_markov_from_reciprocal_cml: coupling identity fails (max residual " +
                            std::to_string(reciprocal.max_residual()) + ")");
    }

    // Boundary must select the Markov member: cross_gain = G_0 G_{1,0}' G_1^{-1} G_{1,N}.
    const Mat member_gain = b.other_end_cov * m.transition(1).transpose() * PdFactor(m.noise(1)).solve(m.coupling(1));
    const double boundary_scale = 1.0 + std::max(max_abs(member_gain), max_abs(b.cross_gain));
    if (max_abs(b.cross_gain - member_gain) > 10.0 * tol * boundary_scale) {
        throw BoundaryNotMarkov("recover_markov_from_reciprocal_cml: boundary does not select a Markov member");
    }

    // Tri-diagonal precision blocks of the Markov member.
    std::vector<Mat> diag(static_cast<size_t>(n + 1));
    std::vector<Mat> super(static_cast<size_t>(n)); // blocks (k,k+1)
    diag[0] = pd_inverse(b.other_end_cov) +
              m.transition(1).transpose() * PdFactor(m.noise(1)).solve(m.transition(1));
    for (int k = 1; k <= n - 2; ++k) {
        diag[static_cast<size_t>(k)] =
            pd_inverse(m.noise(k)) +
            m.transition(k + 1).transpose() * PdFactor(m.noise(k + 1)).solve(m.transition(k + 1));
    }
    diag[static_cast<size_t>(n - 1)] = pd_inverse(m.noise(n - 1));
    Mat last = pd_inverse(b.endpoint_cov);
    last += b.cross_gain.transpose() * PdFactor(b.other_end_cov).solve(b.cross_gain);
    for (int k = 1; k <= n - 1; ++k) {
        last += m.coupling(k).transpose() * PdFactor(m.noise(k)).solve(m.coupling(k));
    }
    diag[static_cast<size_t>(n)] = last;
    for (int k = 0; k <= n - 2; ++k) {
        super[static_cast<size_t>(k)] = -(m.transition(k + 1).transpose() * pd_inverse(m.noise(k + 1)));
    }
    super[static_cast<size_t>(n - 1)] = -(PdFactor(m.noise(n - 1)).solve(m.coupling(n - 1)));

    // Backward ladder from the tri-diagonal blocks to Markov parameters.
    MarkovModel out = MarkovModel::zeros(n, d);
    try {
        out.noise(n) = pd_inverse(symmetrized(diag[static_cast<size_t>(n)]));
        out.transition(n) = -(out.noise(n) * super[static_cast<size_t>(n - 1)].transpose());
        for (int k = n - 2; k >= 0; --k) {
            const Mat info = diag[static_cast<size_t>(k + 1)] -
                             out.transition(k + 2).transpose() * PdFactor(out.noise(k + 2)).solve(out.transition(k + 2));
            out.noise(k + 1) = pd_inverse(symmetrized(info));
            out.transition(k + 1) = -(out.noise(k + 1) * super[static_cast<size_t>(k)].transpose());
        }
        const Mat info0 =
            diag[0] - out.transition(1).transpose() * PdFactor(out.noise(1)).solve(out.transition(1));
        out.noise(0) = pd_inverse(symmetrized(info0));
    } catch (const NotPositiveDefinite&) {
        throw NotPositiveDefinite("recover_markov_from_reciprocal_cml: ladder produced a non-PD covariance; "
                                  "input model is inconsistent");
    }
    return out;
}

const Mat& Representation::gamma_at(int k) const {
    const int offset = direction == Direction::L ? 0 : 1;
    const int idx = k - offset;
    if (idx < 0 || idx >= static_cast<int>(gamma.size())) {
        throw IndexOutOfRange("Representation::gamma_at: index " + std::to_string(k) + " outside range");
    }
    return gamma[static_cast<size_t>(idx)];
}

Mat& Representation::gamma_at(int k) {
    const int offset = direction == Direction::L ? 0 : 1;
    const int idx = k - offset;
    if (idx < 0 || idx >= static_cast<int>(gamma.size())) {
        throw IndexOutOfRange("Representation::gamma_at: index " + std::to_string(k) + " outside range");
    }
    return gamma[static_cast<size_t>(idx)];
}

ValidationReport validate(const Representation& r) {
    ValidationReport report = validate(r.underlying);
    const int d = r.underlying.state_dim;
    if (static_cast<int>(r.gamma.size()) != r.underlying.horizon + 1) {
        report.valid = false;
        report.issues.push_back("IncompleteParameters: expected " + std::to_string(r.underlying.horizon + 1) +
                                " gamma blocks");
    }
    for (const Mat& g : r.gamma) {
        if (g.rows() != d || g.cols() != d) {
            report.valid = false;
            report.issues.push_back("DimensionMismatch at gamma");
            break;
        }
    }
    if (r.endpoint_cov.rows() != d || r.endpoint_cov.cols() != d) {
        report.valid = false;
        report.issues.push_back("DimensionMismatch at endpoint_cov");
    } else {
        try {
            PdFactor f(r.endpoint_cov);
        } catch (const Error&) {
            report.valid = false;
            report.issues.push_back("NotPositiveDefinite at endpoint_cov");
        }
    }
    return report;
}

Representation decompose_to_representation(const CMcModel& m) {
    require_valid(m);
    const CMcBoundary& b = m.require_boundary();
    const int n = m.horizon;
    const int d = m.state_dim;

    Representation r;
    r.direction = m.direction;
    r.underlying = MarkovModel::zeros(n - 1, d);
    r.gamma.assign(static_cast<size_t>(n), Mat::Zero(d, d));
    r.endpoint_cov = b.endpoint_cov;

    if (m.direction == Direction::L) {
        r.underlying.noise(0) = b.other_end_cov;
        r.gamma_at(0) = b.cross_gain;
        for (int k = 1; k <= n - 1; ++k) {
            r.underlying.noise(k) = m.noise(k);
            r.underlying.transition(k) = m.transition(k);
            r.gamma_at(k) = m.transition(k) * r.gamma_at(k - 1) + m.coupling(k);
        }
    } else {
        // Underlying index j corresponds to sequence time j+1.
        r.underlying.noise(0) = b.other_end_cov;
        r.gamma_at(1) = b.cross_gain;
        for (int k = 2; k <= n; ++k) {
            r.underlying.noise(k - 1) = m.noise(k);
            r.underlying.transition(k - 1) = m.transition(k);
            r.gamma_at(k) = m.transition(k) * r.gamma_at(k - 1) + m.coupling(k);
        }
    }
    return r;
}

CMcModel construct_from_representation(const Representation& r) {
    const ValidationReport report = validate(r);
    if (!report.valid) {
        throw IncompleteParameters("Representation: " +
                                   (report.issues.empty() ? std::string("invalid") : report.issues.front()));
    }
    const int n = r.horizon();
    const int d = r.state_dim();

    CMcModel m = CMcModel::zeros(r.direction, n, d);
    CMcBoundary b;
    b.endpoint_cov = r.endpoint_cov;

    if (r.direction == Direction::L) {
        b.cross_gain = r.gamma_at(0);
        b.other_end_cov = r.underlying.noise(0);
        for (int k = 1; k <= n - 1; ++k) {
            m.transition(k) = r.underlying.transition(k);
            m.coupling(k) = r.gamma_at(k) - r.underlying.transition(k) * r.gamma_at(k - 1);
            m.noise(k) = r.underlying.noise(k);
        }
    } else {
        b.cross_gain = r.gamma_at(1);
        b.other_end_cov = r.underlying.noise(0);
        for (int k = 2; k <= n; ++k) {
            m.transition(k) = r.underlying.transition(k - 1);
            m.coupling(k) = r.gamma_at(k) - r.underlying.transition(k - 1) * r.gamma_at(k - 1);
            m.noise(k) = r.underlying.noise(k - 1);
        }
    }
    m.boundary = b;
    return m;
}

RepresentationClassification classify_representation(const Representation& r, double tol) {
    const ValidationReport report = validate(r);
    if (!report.valid) {
        throw IncompleteParameters("Representation: " +
                                   (report.issues.empty() ? std::string("invalid") : report.issues.front()));
    }
    const int n = r.horizon();

    RepresentationClassification out;
    out.tolerance_used = tol;

    auto underlying_noise = [&](int k) -> const Mat& {
        return r.underlying.noise(r.direction == Direction::L ? k : k - 1);
    };
    auto underlying_transition = [&](int k) -> const Mat& {
        return r.underlying.transition(r.direction == Direction::L ? k : k - 1);
    };
    auto weight_step = [&](int k) {
        // gamma_k - U_{k,k-1} gamma_{k-1}
        return Mat(r.gamma_at(k) - underlying_transition(k) * r.gamma_at(k - 1));
    };

    const int lo = r.direction == Direction::L ? 1 : 2;
    const int hi = r.direction == Direction::L ? n - 2 : n - 1;

    double scale = 0.0;
    std::vector<Mat> diffs;
    for (int k = lo; k <= hi; ++k) {
        const Mat lhs = PdFactor(underlying_noise(k)).solve(weight_step(k));
        const Mat rhs = underlying_transition(k + 1).transpose() *
                        PdFactor(underlying_noise(k + 1)).solve(weight_step(k + 1));
        diffs.push_back(lhs - rhs);
        scale = std::max({scale, max_abs(lhs), max_abs(rhs)});
    }

    Mat markov_lhs, markov_rhs;
    if (r.direction == Direction::L) {
        markov_lhs = PdFactor(r.underlying.noise(0)).solve(r.gamma_at(0));
        markov_rhs = underlying_transition(1).transpose() * PdFactor(underlying_noise(1)).solve(weight_step(1));
    } else {
        markov_lhs = weight_step(n);
        markov_rhs = Mat::Zero(r.state_dim(), r.state_dim());
    }
    scale = std::max({scale, max_abs(markov_lhs), max_abs(markov_rhs)});

    out.scale = 1.0 + scale;
    bool reciprocal = true;
    for (const Mat& diff : diffs) {
        const double residual = max_abs(diff);
        out.residuals.push_back(residual);
        if (residual > tol * out.scale) reciprocal = false;
    }
    out.markov_residual = max_abs(markov_lhs - markov_rhs);
    const bool markov = reciprocal && out.markov_residual <= tol * out.scale;

    out.sequence_class =
        markov ? SequenceClass::Markov : (reciprocal ? SequenceClass::Reciprocal : SequenceClass::GeneralCM);
    return out;
}

MarkovModel underlying_markov_of_induced(const MarkovModel& m) {
    require_valid(m);
    if (m.horizon < 3) {
        throw IndexOutOfRange("underlying_markov_of_induced: horizon must be at least 3");
    }
    const HorizonAggregates agg = horizon_aggregates(m);

    MarkovModel out = MarkovModel::zeros(m.horizon - 1, m.state_dim);
    for (int k = 1; k <= m.horizon - 1; ++k) {
        const Mat& prod = agg.m_horizon[static_cast<size_t>(k)];
        PdFactor horizon_cov(agg.c_horizon[static_cast<size_t>(k)]);
        const Mat weighted = horizon_cov.solve(prod).transpose();
        out.noise(k) = pd_inverse(symmetrized(pd_inverse(m.noise(k)) + weighted * prod));
        out.transition(k) =
            m.transition(k) - (out.noise(k) * weighted) * agg.m_horizon[static_cast<size_t>(k - 1)];
    }
    out.noise(0) = markov_matching_boundary(m).other_end_cov;
    return out;
}

} // namespace cmseq
