#include <doctest.h>

#include "cmseq/analysis.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/random_models.hpp"

using namespace cmseq;
using namespace cmseq::testing;

namespace {

double max_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

CMcModel rw3_member_model() {
    CMcModel m = rw3_induced_interior();
    m.boundary = rw3_markov_member_boundary();
    return m;
}

} // namespace

TEST_CASE("white models assemble to a block-diagonal precision") {
    TestRng rng(71);
    CMcModel m = random_cmc_model(rng, Direction::L, 4, 2);
    for (Mat& t : m.transitions) t.setZero();
    for (Mat& c : m.couplings) c.setZero();
    m.boundary->cross_gain.setZero();

    const BlockMatrix precision = assemble_precision(m);
    for (int k = 0; k <= 4; ++k) {
        const Mat& noise = k == 0 ? m.boundary->other_end_cov : (k == 4 ? m.boundary->endpoint_cov : m.noise(k));
        CHECK(max_diff(precision.block(k, k), pd_inverse(noise)) <= 1e-12);
        for (int j = 0; j < k; ++j) CHECK(precision.block(k, j).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("the random-walk member assembles to the random-walk precision") {
    const BlockMatrix precision = assemble_precision(rw3_member_model());
    const StructureReport report = structure_classify(precision, 1e-12);
    CHECK(report.is_tridiagonal);

    const Mat cov = factor_pd(precision).inverse();
    const BlockMatrix expected = random_walk_covariance(3);
    CHECK(max_diff(cov, expected.dense()) <= 1e-10);
}

TEST_CASE("a generic direction-L model assembles to a CM_L-only precision") {
    TestRng rng(72);
    const CMcModel m = random_cmc_model(rng, Direction::L, 6, 2);
    const StructureReport report = structure_classify(assemble_precision(m));
    CHECK(report.is_cml_form);
    CHECK_FALSE(report.is_cyclic_tridiagonal);
}

TEST_CASE("a generic direction-F model assembles to a CM_F-only precision") {
    TestRng rng(73);
    const CMcModel m = random_cmc_model(rng, Direction::F, 6, 2);
    const StructureReport report = structure_classify(assemble_precision(m));
    CHECK(report.is_cmf_form);
    CHECK_FALSE(report.is_cml_form);
}

TEST_CASE("intersection models assemble to CM_L precisions that pass the waypoint window") {
    TestRng rng(74);
    const CML0k2Model m = random_intersection_model(rng, 8, 2, 4);
    const BlockMatrix precision = assemble_precision(m);
    CHECK(structure_classify(precision).is_cml_form);
    CHECK(schur_window_classify(precision, 0, 4, Direction::L));
}

TEST_CASE("Markov joint covariance of the random walk is min(i,j)+1") {
    const BlockMatrix cov = markov_joint_covariance(rw3_markov());
    CHECK(max_diff(cov.dense(), random_walk_covariance(3).dense()) <= 1e-14);
}

TEST_CASE("zero transitions give a diagonal joint covariance") {
    TestRng rng(75);
    MarkovModel m = MarkovModel::zeros(4, 2);
    for (int k = 0; k <= 4; ++k) m.noise(k) = rng.covariance(2);
    const BlockMatrix cov = markov_joint_covariance(m);
    for (int i = 0; i <= 4; ++i) {
        for (int j = 0; j <= 4; ++j) {
            if (i == j) {
                CHECK(max_diff(cov.block(i, i), m.noise(i)) == 0.0);
            } else {
                CHECK(cov.block(i, j).cwiseAbs().maxCoeff() == 0.0);
            }
        }
    }
}

TEST_CASE("the inverse of a Markov joint covariance is block tri-diagonal") {
    TestRng rng(76);
    const MarkovModel m = random_markov_model(rng, 6, 2);
    const BlockMatrix cov = markov_joint_covariance(m);
    const BlockMatrix precision(factor_pd(cov).inverse(), 2);
    const StructureReport report = structure_classify(precision, 1e-9);
    CHECK(report.is_tridiagonal);
}

TEST_CASE("classify_sequence flags the full hierarchy on the random walk") {
    const SequenceClassification c = classify_sequence(random_walk_covariance(3));
    CHECK(c.is_markov);
    CHECK(c.is_reciprocal);
    CHECK(c.is_cml);
    CHECK(c.is_cmf);
    CHECK(c.windows_consistent);
}

TEST_CASE("a non-Markov boundary yields reciprocal-but-not-Markov") {
    CMcModel m = rw3_induced_interior();
    CMcBoundary b;
    b.cross_gain = scalar(0.0);
    b.other_end_cov = scalar(1.0);
    b.endpoint_cov = scalar(4.0);
    m.boundary = b;

    const BlockMatrix cov(factor_pd(assemble_precision(m)).inverse(), 1);
    const SequenceClassification c = classify_sequence(cov);
    CHECK(c.is_reciprocal);
    CHECK_FALSE(c.is_markov);
    CHECK(c.windows_consistent);
}

TEST_CASE("a constructed model with random weights is CM_L only and window-consistent") {
    TestRng rng(77);
    Representation r;
    r.direction = Direction::L;
    r.underlying = random_markov_model(rng, 6, 1);
    for (int k = 0; k <= 6; ++k) r.gamma.push_back(rng.matrix(1, 1));
    r.endpoint_cov = rng.covariance(1);

    const CMcModel m = construct_from_representation(r);
    const BlockMatrix cov(factor_pd(assemble_precision(m)).inverse(), 1);
    const SequenceClassification c = classify_sequence(cov);
    CHECK(c.is_cml);
    CHECK_FALSE(c.is_reciprocal);
    CHECK(c.windows_consistent);
}

TEST_CASE("the independence oracle accepts diagonal covariances") {
    BlockMatrix cov(Mat::Identity(5, 5), 1);
    CHECK(conditional_independence_oracle(cov, {0, 2}, {4}, {1}));
    CHECK(conditional_independence_oracle(cov, {0}, {4}, {}));
}

TEST_CASE("the oracle sees the Markov property of the random walk") {
    const BlockMatrix cov = random_walk_covariance(3);
    CHECK(conditional_independence_oracle(cov, {1}, {3}, {2}));
    CHECK_FALSE(conditional_independence_oracle(cov, {1}, {3}, {}));
    CHECK(oracle_is_markov(cov));
    CHECK(oracle_is_reciprocal(cov));
}

TEST_CASE("the oracle separates reciprocal from Markov behaviour") {
    TestRng rng(78);
    const CMcModel m = random_reciprocal_model(rng, 4, 1);
    const BlockMatrix cov(factor_pd(assemble_precision(m)).inverse(), 1);

    CHECK(conditional_independence_oracle(cov, {1}, {3, 4}, {0, 2}) ==
          oracle_is_reciprocal(cov)); // window (0,2) boundary pair
    CHECK(oracle_is_reciprocal(cov));
    CHECK_FALSE(conditional_independence_oracle(cov, {1}, {3}, {0}));
    CHECK_FALSE(oracle_is_markov(cov));
}

TEST_CASE("the oracle rejects overlapping index sets") {
    BlockMatrix cov(Mat::Identity(4, 4), 1);
    CHECK_THROWS_AS(conditional_independence_oracle(cov, {1}, {1}, {2}), IndexOverlap);
    CHECK_THROWS_AS(conditional_independence_oracle(cov, {1}, {5}, {}), IndexOutOfRange);
}

TEST_CASE("covariance split with zero weights reduces to the embedded block") {
    TestRng rng(79);
    CMcModel m = random_cmc_model(rng, Direction::L, 5, 2);
    for (Mat& c : m.couplings) c.setZero();
    m.boundary->cross_gain.setZero();
    const Representation r = decompose_to_representation(m);
    const BlockMatrix cov(factor_pd(assemble_precision(m)).inverse(), 2);
    double residual = 0.0;
    CHECK(verify_covariance_split(cov, r, 1e-9, &residual));
    CHECK(residual <= 1e-10);
}

TEST_CASE("the random-walk member splits exactly") {
    const CMcModel m = rw3_member_model();
    const Representation r = decompose_to_representation(m);
    const BlockMatrix cov = random_walk_covariance(3);
    double residual = 0.0;
    CHECK(verify_covariance_split(cov, r, 1e-12, &residual));
    // Scalar check at k = 1: C_1 = 2 = 1 + (1/2)^2 * 4.
    CHECK(2.0 == doctest::Approx(1.0 + 0.25 * 4.0));
}

TEST_CASE("reciprocal covariances split in both directions, CM_L-only ones do not") {
    TestRng rng(80);
    const CMcModel reciprocal = random_reciprocal_model(rng, 6, 1);
    const BlockMatrix cov(factor_pd(assemble_precision(reciprocal)).inverse(), 1);

    const Representation left = decompose_to_representation(fit_cmc_model_from_covariance(cov, Direction::L));
    const Representation right = decompose_to_representation(fit_cmc_model_from_covariance(cov, Direction::F));
    CHECK(verify_covariance_split(cov, left, 1e-9));
    CHECK(verify_covariance_split(cov, right, 1e-9));

    const CMcModel generic = random_cmc_model(rng, Direction::L, 6, 1);
    const BlockMatrix generic_cov(factor_pd(assemble_precision(generic)).inverse(), 1);
    const Representation bad = decompose_to_representation(fit_cmc_model_from_covariance(generic_cov, Direction::F));
    double residual = 0.0;
    CHECK_FALSE(verify_covariance_split(generic_cov, bad, 1e-9, &residual));
    CHECK(residual > 1e-4);
}

TEST_CASE("structure decisions agree with the oracle on mixed small fixtures") {
    TestRng rng(81);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = rng.uniform_int(4, 6);
        BlockMatrix cov(1, 1);
        switch (trial % 3) {
            case 0: cov = markov_joint_covariance(random_markov_model(rng, n, 1)); break;
            case 1: cov = BlockMatrix(factor_pd(assemble_precision(random_reciprocal_model(rng, n, 1))).inverse(), 1); break;
            default: cov = BlockMatrix(factor_pd(assemble_precision(random_cmc_model(rng, Direction::L, n, 1))).inverse(), 1); break;
        }
        const SequenceClassification c = classify_sequence(cov);
        CHECK(c.is_markov == oracle_is_markov(cov, 1e-7));
        CHECK(c.is_reciprocal == oracle_is_reciprocal(cov, 1e-7));
        CHECK(c.is_cml == oracle_is_window_cmc(cov, 0, n, Direction::L, 1e-7));
        CHECK(c.is_cmf == oracle_is_window_cmc(cov, 0, n, Direction::F, 1e-7));
        CHECK(c.windows_consistent);
    }
}
