#include <doctest.h>

#include "cmseq/transforms.hpp"
#include "support/fixtures.hpp"
#include "support/random_models.hpp"

using namespace cmseq;
using namespace cmseq::testing;

TEST_CASE("validate accepts the unit random walk") {
    const ValidationReport report = validate(rw3_markov());
    CHECK(report.valid);
    CHECK(report.issues.empty());
}

TEST_CASE("validate flags a zero noise covariance") {
    MarkovModel m = rw3_markov();
    m.noise(2) = Mat::Zero(1, 1);
    const ValidationReport report = validate(m);
    CHECK_FALSE(report.valid);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues.front() == "NotPositiveDefinite at noise_cov[2]");
}

TEST_CASE("validate flags missing interior blocks") {
    TestRng rng(31);
    CMcModel m = random_cmc_model(rng, Direction::L, 5, 1);
    m.couplings.pop_back();
    const ValidationReport report = validate(m);
    CHECK_FALSE(report.valid);
    REQUIRE_FALSE(report.issues.empty());
    CHECK(report.issues.front().find("IncompleteParameters") == 0);
}

TEST_CASE("zero couplings satisfy the reciprocal identity") {
    TestRng rng(32);
    CMcModel m = random_cmc_model(rng, Direction::L, 5, 2);
    for (Mat& c : m.couplings) c.setZero();
    const ConditionResult result = check_reciprocal_condition(m);
    CHECK(result.holds);
    CHECK(result.max_residual() == doctest::Approx(0.0));
}

TEST_CASE("the induced random-walk interior is reciprocal, with hand-checked sides") {
    const CMcModel m = rw3_induced_interior();
    const ConditionResult result = check_reciprocal_condition(m);
    CHECK(result.holds);
    REQUIRE(result.residuals.size() == 1);
    // k = 1: (3/2)(1/3) = 1/2 on both sides.
    CHECK(result.residuals[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("perturbing one coupling breaks the identity with the expected residual") {
    CMcModel m = rw3_induced_interior();
    m.coupling(1) = scalar(0.4);
    const ConditionResult result = check_reciprocal_condition(m);
    CHECK_FALSE(result.holds);
    // (3/2)(0.4) - (1/2)(2)(1/2) = 0.6 - 0.5
    CHECK(result.residuals[0] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("the Markov boundary identity holds for the matching boundary only") {
    CMcModel m = rw3_induced_interior();
    m.boundary = rw3_markov_member_boundary();
    CHECK(check_markov_condition(m).holds);

    // (4/3)(1/4) = 1/3 equals (2/3)(3/2)(1/3).
    m.boundary->cross_gain = scalar(0.0);
    m.boundary->other_end_cov = scalar(1.0);
    const ConditionResult markov = check_markov_condition(m);
    CHECK_FALSE(markov.holds);
    CHECK(markov.residuals.back() == doctest::Approx(1.0 / 3.0));
    CHECK(check_reciprocal_condition(m).holds);
}

TEST_CASE("a white direction-F chain with no terminal coupling is Markov") {
    TestRng rng(33);
    CMcModel m = random_cmc_model(rng, Direction::F, 5, 2);
    for (Mat& c : m.couplings) c.setZero();
    const ConditionResult result = check_markov_condition(m);
    CHECK(result.holds);
}

TEST_CASE("a chained direction-F model with a terminal coupling is reciprocal but not Markov") {
    TestRng rng(34);
    const CMcModel m = random_reciprocal_cmf_model(rng, 5, 1);
    CHECK(check_reciprocal_condition(m).holds);
    CHECK_FALSE(check_markov_condition(m).holds);
}

TEST_CASE("window identity sweep: degenerate windows are unconditionally true") {
    TestRng rng(35);
    const CMcModel m = random_cmc_model(rng, Direction::L, 6, 2);
    CHECK(check_window_cmf_condition(m, 4).holds); // k1 = N-2
    CHECK(check_window_cmf_condition(m, 5).holds);
    CHECK(check_window_cmf_condition(m, 6).holds);
    CHECK_THROWS_AS(check_window_cmf_condition(m, 7), IndexOutOfRange);
    CHECK_THROWS_AS(check_window_cmf_condition(m, -1), IndexOutOfRange);
}

TEST_CASE("window identity matches the reciprocal identity at k1 = 0") {
    const CMcModel m = rw3_induced_interior();
    CHECK(check_window_cmf_condition(m, 0).holds);

    TestRng rng(36);
    for (int trial = 0; trial < 10; ++trial) {
        const CMcModel random = random_cmc_model(rng, Direction::L, 6, 2);
        CHECK(check_window_cmf_condition(random, 0).holds == check_reciprocal_condition(random).holds);
    }
}

TEST_CASE("perturbing the first coupling moves the window threshold") {
    TestRng rng(37);
    CMcModel m = induce_cml_from_markov(random_markov_model(rng, 5, 1));
    m.coupling(1) = m.coupling(1) + scalar(0.1);
    CHECK_FALSE(check_window_cmf_condition(m, 0).holds);
    CHECK(check_window_cmf_condition(m, 1).holds);
    CHECK(check_window_cmf_condition(m, 2).holds);
}

TEST_CASE("intersection conditions hold when every cross gain vanishes") {
    TestRng rng(38);
    CML0k2Model m = random_intersection_model(rng, 8, 2, 4);
    for (Mat& g : m.seg1_couplings) g.setZero();
    m.origin_gain.setZero();
    for (Mat& g : m.terminal_gains) g.setZero();
    for (Mat& g : m.seg2_couplings) g.setZero();
    CHECK(check_intersection_conditions(m).holds);
}

TEST_CASE("non-adjacent terminal gains violate the orthogonality part") {
    TestRng rng(39);
    CML0k2Model m = random_intersection_model(rng, 8, 1, 4);
    for (Mat& g : m.terminal_gains) g.setZero();
    for (Mat& g : m.seg1_couplings) g.setZero();
    m.origin_gain.setZero();
    m.terminal_cov = Mat::Identity(1, 1);
    m.terminal_gains[0] = scalar(1.0);
    m.terminal_gains[2] = scalar(1.0); // product at (j,i) = (0,2) is 1
    const ConditionResult result = check_intersection_conditions(m);
    CHECK_FALSE(result.holds);
}

TEST_CASE("solved intersection fixtures satisfy both identity families") {
    TestRng rng(40);
    for (int trial = 0; trial < 5; ++trial) {
        const int horizon = rng.uniform_int(6, 9);
        const int waypoint = rng.uniform_int(2, horizon - 2);
        const CML0k2Model m = random_intersection_model(rng, horizon, rng.uniform_int(1, 2), waypoint);
        const ConditionResult result = check_intersection_conditions(m);
        CHECK(result.holds);
        CHECK(result.max_residual() <= 1e-10 * result.scale);
    }
}

TEST_CASE("Markov membership implies reciprocal membership on random fixtures") {
    TestRng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const Direction direction = trial % 2 == 0 ? Direction::L : Direction::F;
        CMcModel m = random_cmc_model(rng, direction, rng.uniform_int(4, 8), rng.uniform_int(1, 2));
        if (trial % 3 == 0) {
            // Mix in fixtures that actually are Markov members.
            for (Mat& c : m.couplings) c.setZero();
            if (direction == Direction::L) m.boundary->cross_gain.setZero();
        }
        if (check_markov_condition(m).holds) CHECK(check_reciprocal_condition(m).holds);
    }
}

TEST_CASE("induced models satisfy the reciprocal identity at tight tolerance") {
    TestRng rng(42);
    for (int trial = 0; trial < 8; ++trial) {
        const int horizon = rng.uniform_int(3, 16);
        const int d = rng.uniform_int(1, 4);
        const CMcModel m = induce_cml_from_markov(random_markov_model(rng, horizon, d));
        const ConditionResult result = check_reciprocal_condition(m);
        CHECK(result.holds);
        CHECK(result.max_residual() <= 1e-9 * result.scale);
    }
}

TEST_CASE("boundary form conversion round-trips") {
    TestRng rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const CMcBoundary b = random_boundary(rng, rng.uniform_int(1, 3));
        const OriginAnchoredBoundary origin = to_origin_anchored(b);
        const CMcBoundary back = to_endpoint_anchored(origin);
        CHECK((back.endpoint_cov - b.endpoint_cov).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((back.cross_gain - b.cross_gain).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((back.other_end_cov - b.other_end_cov).cwiseAbs().maxCoeff() <= 1e-10);
    }
}
