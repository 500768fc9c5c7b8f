#include "vqccs/system_model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace vqccs {

void ScenarioConfig::validate() const {
    if (n_devices <= 0) throw ParamError("scenario.n_devices must be positive");
    if (n_measurements <= 0) throw ParamError("scenario.n_measurements must be positive");
    if (n_measurements >= n_devices)
        throw ParamError("scenario.n_measurements must be smaller than n_devices");
    if (!(activity_rate > 0.0 && activity_rate < 1.0))
        throw ParamError("scenario.activity_rate must lie in (0, 1)");
    if (!(correlation >= 0.0 && correlation < 1.0))
        throw ParamError("scenario.correlation must lie in [0, 1)");
    if (!(condition_number >= 1.0)) throw ParamError("scenario.condition_number must be >= 1");
    if (std::isnan(snr_db)) throw ParamError("scenario.snr_db must not be NaN");
}

std::pair<double, double> activity_transition_probs(double rho, double gamma) {
    if (!(rho > 0.0 && rho < 1.0)) throw ParamError("activity rate must lie in (0, 1)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ParamError("correlation must lie in [0, 1)");
    double p11 = rho + gamma * (1.0 - rho);
    double p10 = rho * (1.0 - gamma);
    return {p11, p10};
}

IVec gen_activity(int n, double rho, double gamma, RandomStream& rng) {
    auto [p11, p10] = activity_transition_probs(rho, gamma);
    IVec a(n);
    if (n == 0) return a;
    a[0] = rng.uniform() < rho ? 1 : 0;
    for (int i = 1; i < n; ++i) {
        double p = a[i - 1] == 1 ? p11 : p10;
        a[i] = rng.uniform() < p ? 1 : 0;
    }
    return a;
}

CVec gen_channel(int n, double rho, RandomStream& rng) {
    if (!(rho > 0.0 && rho <= 1.0)) throw ParamError("channel activity rate must lie in (0, 1]");
    CVec h(n);
    for (int i = 0; i < n; ++i) h[i] = rng.complex_normal(1.0 / rho);
    return h;
}

std::pair<CMat, PilotFactors> build_pilot(int n, int m, double kappa, RandomStream& rng) {
    if (m >= n) throw ParamError("build_pilot: requires m < n");
    if (m <= 0) throw ParamError("build_pilot: m must be positive");
    if (!(kappa >= 1.0)) throw ParamError("build_pilot: condition number must be >= 1");

    // lambda_i = lambda_1 * c^(i-1) with c = kappa^(-1/M) and sum = N.
    RVec lambda(m);
    double c = std::pow(kappa, -1.0 / m);
    if (kappa == 1.0) {
        lambda.setConstant(static_cast<double>(n) / m);
    } else {
        double lambda1 = n * (1.0 - c) / (1.0 - std::pow(c, m));
        for (int i = 0; i < m; ++i) lambda[i] = lambda1 * std::pow(c, i);
    }

    std::vector<int> perm = rng.permutation(n);

    // Row i of A is lambda_i times row perm[i] of the unitary DFT matrix.
    CMat a(m, n);
    double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < m; ++i) {
        int row = perm[static_cast<std::size_t>(i)];
        for (int k = 0; k < n; ++k) {
            double phase = -2.0 * kPi * static_cast<double>(row) * k / n;
            a(i, k) = lambda[i] * scale * cplx(std::cos(phase), std::sin(phase));
        }
    }
    return {a, PilotFactors{lambda, std::move(perm)}};
}

std::pair<CVec, double> transmit(const CMat& A, const CVec& x, double snr_db, RandomStream& rng) {
    if (A.cols() != x.size()) throw ParamError("transmit: dimension mismatch");
    const auto m = A.rows();
    CVec y = A * x;
    if (std::isinf(snr_db) && snr_db > 0) {
        return {y, 0.0};
    }
    // E|x_i|^2 = rho * (1/rho) = 1 analytically.
    double sigma2 = A.squaredNorm() / (m * std::pow(10.0, snr_db / 10.0));
    for (Eigen::Index k = 0; k < m; ++k) y[k] += rng.complex_normal(sigma2);
    return {y, sigma2};
}

std::string pilot_policy_name(PilotPolicy policy) {
    return policy == PilotPolicy::PerInstance ? "per_instance" : "shared";
}

PilotPolicy pilot_policy_from_name(const std::string& name) {
    if (name == "per_instance") return PilotPolicy::PerInstance;
    if (name == "shared") return PilotPolicy::Shared;
    throw ConfigError("unknown pilot policy: " + name);
}

std::vector<Instance> gen_dataset(const ScenarioConfig& cfg, int count, PilotPolicy policy,
                                  std::string_view label) {
    cfg.validate();
    if (count < 1) throw ParamError("gen_dataset: count must be >= 1");

    RandomStream root(cfg.seed);
    CMat shared_pilot;
    if (policy == PilotPolicy::Shared) {
        RandomStream pilot_stream = root.substream("pilot");
        shared_pilot = build_pilot(cfg.n_devices, cfg.n_measurements, cfg.condition_number,
                                   pilot_stream)
                           .first;
    }

    RandomStream split_root = root.substream(label);
    std::vector<Instance> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        RandomStream stream = split_root.substream(static_cast<std::uint64_t>(k));
        Instance& inst = out[static_cast<std::size_t>(k)];
        if (policy == PilotPolicy::Shared) {
            inst.pilot = shared_pilot;
        } else {
            inst.pilot = build_pilot(cfg.n_devices, cfg.n_measurements, cfg.condition_number,
                                     stream)
                             .first;
        }
        inst.activity = gen_activity(cfg.n_devices, cfg.activity_rate, cfg.correlation, stream);
        inst.channel = gen_channel(cfg.n_devices, cfg.activity_rate, stream);
        inst.signal.resize(cfg.n_devices);
        for (int i = 0; i < cfg.n_devices; ++i) {
            inst.signal[i] = inst.activity[i] != 0 ? inst.channel[i] : cplx(0.0, 0.0);
        }
        auto [y, sigma2] = transmit(inst.pilot, inst.signal, cfg.snr_db, stream);
        inst.observation = std::move(y);
        inst.noise_var = sigma2;
    }
    return out;
}

}  // namespace vqccs
