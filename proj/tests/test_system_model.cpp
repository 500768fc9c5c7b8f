#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "vqccs/system_model.hpp"

using namespace vqccs;

TEST_CASE("transition probabilities solve stationarity and lag-1 correlation") {
    auto [p11, p10] = activity_transition_probs(0.2, 0.6);
    CHECK(p11 == doctest::Approx(0.68).epsilon(1e-12));
    CHECK(p10 == doctest::Approx(0.08).epsilon(1e-12));

    auto [q11, q10] = activity_transition_probs(0.3, 0.0);
    CHECK(q11 == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(q10 == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("activity chain matches marginal rate and gamma^d correlations") {
    const double rho = 0.2, gamma = 0.6;
    const int n = 16;
    const int samples = 1000000;
    RandomStream rng(101);

    // accumulate mean and lagged second moments over many chains
    double sum = 0.0;
    long long count = 0;
    std::vector<double> lag_sum(6, 0.0);
    std::vector<long long> lag_count(6, 0);
    const int chains = samples / n;
    for (int c = 0; c < chains; ++c) {
        IVec a = gen_activity(n, rho, gamma, rng);
        for (int i = 0; i < n; ++i) {
            sum += a[i];
            ++count;
            for (int d = 1; d <= 5; ++d) {
                if (i + d < n) {
                    lag_sum[static_cast<std::size_t>(d)] += a[i] * a[i + d];
                    ++lag_count[static_cast<std::size_t>(d)];
                }
            }
        }
    }
    const double mean = sum / static_cast<double>(count);
    CHECK(std::abs(mean - rho) < 0.005);

    for (int d = 1; d <= 5; ++d) {
        double e_joint = lag_sum[static_cast<std::size_t>(d)] /
                         static_cast<double>(lag_count[static_cast<std::size_t>(d)]);
        double corr = (e_joint - rho * rho) / (rho * (1.0 - rho));
        CHECK(std::abs(corr - std::pow(gamma, d)) < 0.01);
    }
}

TEST_CASE("gamma=0 gives an iid Bernoulli sequence") {
    RandomStream rng(103);
    const int samples = 400000;
    double joint = 0.0, mean = 0.0;
    int pairs = 0, count = 0;
    for (int c = 0; c < samples / 8; ++c) {
        IVec a = gen_activity(8, 0.3, 0.0, rng);
        for (int i = 0; i < 8; ++i) {
            mean += a[i];
            ++count;
            if (i + 1 < 8) {
                joint += a[i] * a[i + 1];
                ++pairs;
            }
        }
    }
    mean /= count;
    double corr = (joint / pairs - mean * mean) / (mean * (1.0 - mean));
    CHECK(std::abs(mean - 0.3) < 0.005);
    CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("channel variance is 1/rho") {
    RandomStream rng(107);
    const double rho = 0.2;
    double sum2 = 0.0;
    const int draws = 1000000;
    CVec h = gen_channel(draws, rho, rng);
    for (int i = 0; i < draws; ++i) sum2 += std::norm(h[i]);
    CHECK(sum2 / draws == doctest::Approx(1.0 / rho).epsilon(0.01));

    RandomStream rng2(109);
    CVec h1 = gen_channel(200000, 1.0, rng2);
    double s = 0.0;
    cplx m{0.0, 0.0};
    for (int i = 0; i < h1.size(); ++i) {
        s += std::norm(h1[i]);
        m += h1[i];
    }
    CHECK(s / static_cast<double>(h1.size()) == doctest::Approx(1.0).epsilon(0.01));
    // zero mean within 3 standard errors of each component
    double se = std::sqrt(0.5 / static_cast<double>(h1.size()));
    CHECK(std::abs(m.real()) / static_cast<double>(h1.size()) < 3.0 * se);
    CHECK(std::abs(m.imag()) / static_cast<double>(h1.size()) < 3.0 * se);
}

TEST_CASE("pilot singular values: sum N, fixed ratio, exact diagonal gram") {
    RandomStream rng(113);
    auto [a, factors] = build_pilot(10, 7, 1.0, rng);
    REQUIRE(factors.singular_values.size() == 7);
    for (int i = 0; i < 7; ++i)
        CHECK(factors.singular_values[i] == doctest::Approx(10.0 / 7.0).epsilon(1e-9));

    CMat gram = a * a.adjoint();
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) {
            if (i == j) {
                CHECK(std::abs(gram(i, j) - std::pow(10.0 / 7.0, 2)) < 1e-10);
            } else {
                CHECK(std::abs(gram(i, j)) < 1e-10);
            }
        }
    }
}

TEST_CASE("conditioned pilot keeps the sum-N and ratio laws") {
    RandomStream rng(127);
    const int n = 10, m = 6;
    const double kappa = 4.0;
    auto [a, factors] = build_pilot(n, m, kappa, rng);
    double total = 0.0;
    for (int i = 0; i < m; ++i) total += factors.singular_values[i];
    CHECK(total == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
    const double ratio = std::pow(kappa, 1.0 / static_cast<double>(m));
    for (int i = 0; i + 1 < m; ++i) {
        CHECK(factors.singular_values[i] / factors.singular_values[i + 1] ==
              doctest::Approx(ratio).epsilon(1e-9));
    }

    // numeric SVD of the assembled pilot agrees
    Eigen::JacobiSVD<CMat> svd(a);
    for (int i = 0; i < m; ++i)
        CHECK(svd.singularValues()[i] == doctest::Approx(factors.singular_values[i]).epsilon(1e-9));
}

TEST_CASE("kappa=1, M=6 worked spectrum") {
    RandomStream rng(131);
    auto [a, factors] = build_pilot(10, 6, 1.0, rng);
    for (int i = 0; i < 6; ++i)
        CHECK(factors.singular_values[i] == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(a.squaredNorm() == doctest::Approx(50.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("transmit with infinite SNR is exact") {
    RandomStream rng(137);
    auto [a, factors] = build_pilot(10, 7, 1.0, rng);
    CVec x = CVec::Zero(10);
    x[2] = cplx(1.0, -2.0);
    x[7] = cplx(-0.5, 0.25);
    auto [y, noise_var] = transmit(a, x, std::numeric_limits<double>::infinity(), rng);
    CHECK(noise_var == 0.0);
    CHECK((y - a * x).norm() == 0.0);
}

TEST_CASE("noise variance matches the worked 30 dB example") {
    RandomStream rng(139);
    auto [a, factors] = build_pilot(10, 7, 1.0, rng);
    CVec x = CVec::Zero(10);
    auto [y, noise_var] = transmit(a, x, 30.0, rng);
    CHECK(noise_var == doctest::Approx(100.0 / 49000.0).epsilon(1e-12));

    // x = 0 puts pure noise in y
    double e = y.squaredNorm() / 7.0;
    CHECK(e > 0.0);
}

TEST_CASE("measured dataset SNR is within 0.1 dB of configured") {
    ScenarioConfig cfg;
    cfg.seed = 71;
    std::vector<Instance> data = gen_dataset(cfg, 20000, PilotPolicy::PerInstance, "snrcheck");
    double signal_power = 0.0, noise_power = 0.0;
    for (const Instance& inst : data) {
        signal_power += (inst.pilot * inst.signal).squaredNorm();
        noise_power += static_cast<double>(inst.pilot.rows()) * inst.noise_var;
    }
    double snr_db = 10.0 * std::log10(signal_power / noise_power);
    CHECK(std::abs(snr_db - cfg.snr_db) < 0.1);
}

TEST_CASE("instances satisfy the composition invariants") {
    ScenarioConfig cfg;
    cfg.seed = 73;
    std::vector<Instance> data = gen_dataset(cfg, 50, PilotPolicy::PerInstance, "invariants");
    for (const Instance& inst : data) {
        REQUIRE(inst.activity.size() == 10);
        for (int i = 0; i < 10; ++i) {
            bool active = inst.activity[i] != 0;
            CHECK((inst.activity[i] == 0 || inst.activity[i] == 1));
            CHECK(inst.signal[i] == (active ? inst.channel[i] : cplx(0.0, 0.0)));
        }
        CHECK(inst.noise_var > 0.0);
        CHECK(inst.pilot.rows() == 7);
        CHECK(inst.pilot.cols() == 10);
    }
}

TEST_CASE("empirical activity rate at reference settings") {
    ScenarioConfig cfg;
    cfg.seed = 79;
    std::vector<Instance> data = gen_dataset(cfg, 5000, PilotPolicy::PerInstance, "rate");
    double active = 0.0;
    for (const Instance& inst : data) active += inst.activity.sum();
    double rate = active / (5000.0 * 10.0);
    CHECK(std::abs(rate - 0.2) < 0.01);
}

TEST_CASE("gen_dataset is deterministic and label-disjoint") {
    ScenarioConfig cfg;
    cfg.seed = 83;
    std::vector<Instance> a = gen_dataset(cfg, 8, PilotPolicy::PerInstance, "train");
    std::vector<Instance> b = gen_dataset(cfg, 8, PilotPolicy::PerInstance, "train");
    std::vector<Instance> c = gen_dataset(cfg, 8, PilotPolicy::PerInstance, "test");
    for (int i = 0; i < 8; ++i) {
        CHECK((a[static_cast<std::size_t>(i)].observation -
               b[static_cast<std::size_t>(i)].observation)
                  .norm() == 0.0);
        CHECK((a[static_cast<std::size_t>(i)].observation -
               c[static_cast<std::size_t>(i)].observation)
                  .norm() > 0.0);
    }
}

TEST_CASE("shared pilot policy reuses one matrix across instances and labels") {
    ScenarioConfig cfg;
    cfg.seed = 89;
    std::vector<Instance> a = gen_dataset(cfg, 4, PilotPolicy::Shared, "train");
    std::vector<Instance> b = gen_dataset(cfg, 4, PilotPolicy::Shared, "test");
    for (int i = 1; i < 4; ++i)
        CHECK((a[0].pilot - a[static_cast<std::size_t>(i)].pilot).norm() == 0.0);
    CHECK((a[0].pilot - b[0].pilot).norm() == 0.0);

    std::vector<Instance> c = gen_dataset(cfg, 2, PilotPolicy::PerInstance, "train");
    CHECK((c[0].pilot - c[1].pilot).norm() > 0.0);
}

TEST_CASE("scenario validation rejects malformed settings") {
    ScenarioConfig cfg;
    cfg.n_measurements = 10;  // must stay below n_devices
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = ScenarioConfig{};
    cfg.activity_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = ScenarioConfig{};
    cfg.correlation = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = ScenarioConfig{};
    cfg.correlation = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
}
