#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracle_helpers.hpp"
#include "vqccs/postproc.hpp"
#include "vqccs/rng.hpp"

using namespace vqccs;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

MlpParams random_params(int n, std::uint64_t seed) {
    RandomStream rng(seed);
    return MlpParams::random_init(n, rng);
}

}  // namespace

TEST_CASE("zero initialisation has the documented shapes and count") {
    const int n = 3;
    MlpParams p = MlpParams::zeros(n);
    CHECK(p.w1.rows() == 4 * n);
    CHECK(p.w1.cols() == n);
    CHECK(p.w2.rows() == 2 * n);
    CHECK(p.w2.cols() == 4 * n);
    CHECK(p.w3.rows() == n);
    CHECK(p.w3.cols() == 2 * n);
    CHECK(p.b1.size() == 4 * n);
    CHECK(p.b2.size() == 2 * n);
    CHECK(p.b3.size() == n);
    const std::size_t expect = static_cast<std::size_t>(4 * n * n + 4 * n + 8 * n * n + 2 * n +
                                                        2 * n * n + n);
    CHECK(p.count() == expect);
    CHECK(p.input_size() == n);
    CHECK_NOTHROW(p.validate());
    CHECK_THROWS_AS(MlpParams::zeros(0), ParamError);
}

TEST_CASE("validate rejects broken shape chains and non-finite entries") {
    MlpParams p = MlpParams::zeros(2);
    MlpParams bad = p;
    bad.w2 = RMat::Zero(3, 8);
    CHECK_THROWS_AS(bad.validate(), ParamError);
    bad = p;
    bad.b3[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(bad.validate(), ParamError);
}

TEST_CASE("zero parameters always predict one half") {
    const int n = 4;
    MlpParams p = MlpParams::zeros(n);
    RandomStream rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        RVec f(n);
        for (int i = 0; i < n; ++i) f[i] = 2.0 * rng.uniform();
        RVec probs = mlp_forward(p, f);
        REQUIRE(probs.size() == n);
        for (int i = 0; i < n; ++i) CHECK(probs[i] == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("forward pass matches a hand-computed single-device network") {
    // n = 1: w1 is 4x1, w2 is 2x4, w3 is 1x2.
    MlpParams p = MlpParams::zeros(1);
    p.w1 << 1.0, -2.0, 0.5, 0.0;
    p.b1 << 0.1, 0.2, -0.4, 0.3;
    p.w2.row(0) << 1.0, 1.0, 1.0, 1.0;
    p.w2.row(1) << 0.5, -1.0, 2.0, 0.0;
    p.b2 << 0.0, -0.1;
    p.w3 << 2.0, -1.0;
    p.b3 << 0.05;

    const double x = 0.8;
    const double h1 = std::max(0.0, 1.0 * x + 0.1);   // 0.9
    const double h2 = std::max(0.0, -2.0 * x + 0.2);  // relu clips to 0
    const double h3 = std::max(0.0, 0.5 * x - 0.4);   // 0
    const double h4 = std::max(0.0, 0.0 * x + 0.3);   // 0.3
    const double g1 = std::max(0.0, h1 + h2 + h3 + h4);
    const double g2 = std::max(0.0, 0.5 * h1 - 1.0 * h2 + 2.0 * h3 - 0.1);
    const double z = 2.0 * g1 - 1.0 * g2 + 0.05;

    RVec f(1);
    f << x;
    RVec probs = mlp_forward(p, f);
    CHECK(probs[0] == doctest::Approx(sigmoid(z)).epsilon(1e-14));
}

TEST_CASE("outputs stay strictly inside the unit interval") {
    const int n = 6;
    for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
        MlpParams p = random_params(n, seed);
        RandomStream rng(seed + 100);
        for (int rep = 0; rep < 20; ++rep) {
            RVec f(n);
            for (int i = 0; i < n; ++i) f[i] = 5.0 * rng.normal();
            RVec probs = mlp_forward(p, f);
            for (int i = 0; i < n; ++i) {
                CHECK(probs[i] > 0.0);
                CHECK(probs[i] < 1.0);
            }
        }
    }
}

TEST_CASE("forward rejects a feature size mismatch") {
    MlpParams p = MlpParams::zeros(3);
    CHECK_THROWS_AS(mlp_forward(p, RVec::Zero(4)), ParamError);
}

TEST_CASE("cross entropy matches hand values and clamps at the extremes") {
    RVec probs(2);
    IVec labels(2);
    probs << 0.5, 0.5;
    labels << 1, 0;
    CHECK(bce_loss(probs, labels) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    probs << 0.9, 0.2;
    labels << 1, 0;
    const double want = -0.5 * (std::log(0.9) + std::log(0.8));
    CHECK(bce_loss(probs, labels) == doctest::Approx(want).epsilon(1e-14));

    // exact zeros and ones survive through the clamp
    probs << 0.0, 1.0;
    labels << 1, 0;
    const double clamp = -std::log(1e-12);
    CHECK(bce_loss(probs, labels) == doctest::Approx(clamp).epsilon(1e-3));

    probs << 1.0, 0.0;
    labels << 1, 0;
    CHECK(bce_loss(probs, labels) == doctest::Approx(0.0).epsilon(1e-12));

    IVec short_labels(1);
    short_labels << 1;
    CHECK_THROWS_AS(bce_loss(probs, short_labels), ParamError);
}

TEST_CASE("analytic gradient agrees with central differences") {
    const int n = 3;
    MlpParams p = random_params(n, 21);
    RandomStream rng(22);
    RVec f(n);
    for (int i = 0; i < n; ++i) f[i] = rng.normal();
    IVec labels(n);
    labels << 1, 0, 1;

    MlpGrad g = mlp_grad(p, f, labels);
    CHECK(g.loss == doctest::Approx(bce_loss(mlp_forward(p, f), labels)).epsilon(1e-14));

    RVec flat = flatten_mlp(p);
    RVec gflat = flatten_mlp(g.grads);
    REQUIRE(flat.size() == gflat.size());
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < flat.size(); ++k) {
        auto loss_at = [&](double value) {
            RVec moved = flat;
            moved[k] = value;
            MlpParams q = unflatten_mlp(moved, n);
            return bce_loss(mlp_forward(q, f), labels);
        };
        const double fd = oracle::central_diff(loss_at, flat[k], h);
        CHECK(std::abs(gflat[k] - fd) <= 1e-4 * std::max({std::abs(fd), std::abs(gflat[k]), 1e-8}));
    }
}

TEST_CASE("flatten and unflatten round trip exactly") {
    const int n = 4;
    MlpParams p = random_params(n, 31);
    RVec flat = flatten_mlp(p);
    CHECK(static_cast<std::size_t>(flat.size()) == p.count());
    MlpParams q = unflatten_mlp(flat, n);
    CHECK((q.w1 - p.w1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((q.w2 - p.w2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((q.w3 - p.w3).cwiseAbs().maxCoeff() == 0.0);
    CHECK((q.b1 - p.b1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((q.b2 - p.b2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((q.b3 - p.b3).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(unflatten_mlp(flat.head(flat.size() - 1).eval(), n), ParamError);
}

TEST_CASE("training config validation") {
    MlpTrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    MlpTrainConfig bad = cfg;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.rmsprop_beta = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.val_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.workers = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

namespace {

// labels leak into the features with noise small enough to keep the classes
// separated, so a working trainer must reach perfect accuracy
void make_separable(int n, int count, std::uint64_t seed, std::vector<RVec>& features,
                    std::vector<IVec>& labels) {
    RandomStream rng(seed);
    for (int k = 0; k < count; ++k) {
        IVec a(n);
        RVec f(n);
        for (int i = 0; i < n; ++i) {
            a[i] = rng.uniform() < 0.4 ? 1 : 0;
            f[i] = (a[i] != 0 ? 1.0 : 0.1) + 0.05 * rng.uniform();
        }
        features.push_back(f);
        labels.push_back(a);
    }
}

}  // namespace

TEST_CASE("training separates a noisy but separable toy problem") {
    const int n = 4;
    std::vector<RVec> features;
    std::vector<IVec> labels;
    make_separable(n, 256, 41, features, labels);

    MlpTrainConfig cfg;
    cfg.epochs = 60;
    cfg.batch_size = 32;
    cfg.seed = 7;
    cfg.workers = 1;
    MlpTrainResult result = train_mlp(features, labels, cfg);

    REQUIRE(result.loss_history.size() == static_cast<std::size_t>(cfg.epochs));
    REQUIRE(result.val_loss_history.size() == static_cast<std::size_t>(cfg.epochs));
    CHECK(result.best_epoch >= 0);
    CHECK(result.best_epoch < cfg.epochs);
    CHECK(result.best_val_loss == doctest::Approx(result.val_loss_history[static_cast<std::size_t>(
                                      result.best_epoch)]));
    CHECK(result.loss_history.back() < result.loss_history.front());

    int errors = 0;
    for (std::size_t k = 0; k < features.size(); ++k) {
        RVec probs = mlp_forward(result.params, features[k]);
        for (int i = 0; i < n; ++i) {
            const int pred = probs[i] > 0.5 ? 1 : 0;
            if (pred != labels[k][i]) ++errors;
        }
    }
    CHECK(errors == 0);
}

TEST_CASE("training is deterministic under a fixed seed") {
    std::vector<RVec> features;
    std::vector<IVec> labels;
    make_separable(3, 96, 51, features, labels);

    MlpTrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 9;
    cfg.workers = 1;
    MlpTrainResult a = train_mlp(features, labels, cfg);
    MlpTrainResult b = train_mlp(features, labels, cfg);
    CHECK((flatten_mlp(a.params) - flatten_mlp(b.params)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.loss_history.size() == b.loss_history.size());
    for (std::size_t i = 0; i < a.loss_history.size(); ++i) {
        CHECK(a.loss_history[i] == b.loss_history[i]);
        CHECK(a.val_loss_history[i] == b.val_loss_history[i]);
    }
    CHECK(a.best_epoch == b.best_epoch);
}

TEST_CASE("non-finite features surface as a numerical error") {
    std::vector<RVec> features;
    std::vector<IVec> labels;
    make_separable(2, 32, 61, features, labels);
    features[5][0] = std::numeric_limits<double>::infinity();

    MlpTrainConfig cfg;
    cfg.epochs = 3;
    cfg.val_fraction = 0.0;
    cfg.workers = 1;
    CHECK_THROWS_AS(train_mlp(features, labels, cfg), NumericalError);
}

TEST_CASE("training rejects empty or mismatched datasets") {
    MlpTrainConfig cfg;
    cfg.workers = 1;
    std::vector<RVec> features;
    std::vector<IVec> labels;
    CHECK_THROWS_AS(train_mlp(features, labels, cfg), ParamError);
    make_separable(2, 8, 71, features, labels);
    labels.pop_back();
    CHECK_THROWS_AS(train_mlp(features, labels, cfg), ParamError);
}
