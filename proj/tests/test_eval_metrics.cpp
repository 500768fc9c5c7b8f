#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle_helpers.hpp"
#include "vqccs/eval_metrics.hpp"
#include "vqccs/rng.hpp"

using namespace vqccs;

TEST_CASE("mse matches hand values") {
    CVec a(2), b(2);
    a << cplx(1.0, 0.0), cplx(0.0, 1.0);
    b << cplx(0.0, 0.0), cplx(0.0, 0.0);
    CHECK(mse(a, b) == doctest::Approx(1.0).epsilon(1e-15));

    b = a;
    CHECK(mse(a, b) == 0.0);

    CVec c(1), d(1);
    c << cplx(3.0, 4.0);
    d << cplx(0.0, 0.0);
    CHECK(mse(c, d) == doctest::Approx(25.0).epsilon(1e-15));

    CHECK_THROWS_AS(mse(a, CVec::Zero(3)), ParamError);
    CHECK_THROWS_AS(mse(CVec{}, CVec{}), ParamError);
}

TEST_CASE("decibel conversion guards zero") {
    CHECK(to_db(1.0) == doctest::Approx(0.0));
    CHECK(to_db(0.1) == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(to_db(100.0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(to_db(0.0) == -400.0);
    CHECK(to_db(-1.0) == -400.0);
}

TEST_CASE("perfect and inverted rankings bracket the auc range") {
    std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
    std::vector<int> labels{1, 1, 0, 0};
    CHECK(roc_auc(scores, labels).auc == doctest::Approx(1.0).epsilon(1e-15));

    std::vector<int> flipped{0, 0, 1, 1};
    CHECK(roc_auc(scores, flipped).auc == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("all-equal scores give exactly one half") {
    std::vector<double> scores{0.5, 0.5, 0.5, 0.5, 0.5};
    std::vector<int> labels{1, 0, 1, 0, 0};
    CHECK(roc_auc(scores, labels).auc == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("a single swapped pair gives the textbook three quarters") {
    // one positive ranked below one negative out of 2x2 pairs
    std::vector<double> scores{0.9, 0.4, 0.6, 0.1};
    std::vector<int> labels{1, 1, 0, 0};
    CHECK(roc_auc(scores, labels).auc == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("auc equals pairwise concordance counting on random data") {
    RandomStream rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const int count = 50 + rep * 7;
        std::vector<double> scores(static_cast<std::size_t>(count));
        std::vector<int> labels(static_cast<std::size_t>(count));
        bool seen[2] = {false, false};
        for (int i = 0; i < count; ++i) {
            // quantized scores force tie handling through the same path
            scores[static_cast<std::size_t>(i)] = std::floor(rng.uniform() * 12.0) / 12.0;
            labels[static_cast<std::size_t>(i)] = rng.uniform() < 0.3 ? 1 : 0;
            seen[labels[static_cast<std::size_t>(i)]] = true;
        }
        if (!seen[0] || !seen[1]) continue;
        const double want = oracle::auc_pairwise(scores, labels);
        CHECK(roc_auc(scores, labels).auc == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
    RandomStream rng(19);
    std::vector<double> scores(64);
    std::vector<int> labels(64);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = rng.normal();
        labels[i] = rng.uniform() < 0.4 ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    const double base = roc_auc(scores, labels).auc;

    std::vector<double> warped = scores;
    for (double& s : warped) s = std::tanh(3.0 * s) + 5.0;
    CHECK(roc_auc(warped, labels).auc == doctest::Approx(base).epsilon(1e-12));

    for (double& s : warped) s = std::exp(0.5 * s);
    CHECK(roc_auc(warped, labels).auc == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("roc curve endpoints and monotonicity") {
    RandomStream rng(23);
    std::vector<double> scores(40);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = rng.uniform();
        labels[i] = rng.uniform() < 0.5 ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    RocResult res = roc_auc(scores, labels);
    REQUIRE(res.points.size() >= 2);
    CHECK(res.points.front().fpr == 0.0);
    CHECK(res.points.front().tpr == 0.0);
    CHECK(res.points.back().fpr == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(res.points.back().tpr == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t i = 1; i < res.points.size(); ++i) {
        CHECK(res.points[i].fpr >= res.points[i - 1].fpr);
        CHECK(res.points[i].tpr >= res.points[i - 1].tpr);
    }
    CHECK(res.auc >= 0.0);
    CHECK(res.auc <= 1.0);
}

TEST_CASE("single-class labels are rejected as undefined") {
    std::vector<double> scores{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(roc_auc(scores, {1, 1, 1}), UndefinedMetricError);
    CHECK_THROWS_AS(roc_auc(scores, {0, 0, 0}), UndefinedMetricError);
    CHECK_THROWS_AS(roc_auc(scores, {1, 0}), ParamError);
    CHECK_THROWS_AS(roc_auc({}, {}), ParamError);
}
