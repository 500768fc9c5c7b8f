#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vqccs/common.hpp"
#include "vqccs/rng.hpp"

namespace vqccs {

struct ScenarioConfig {
    int n_devices = 10;           // N
    int n_measurements = 7;       // M, M < N
    double activity_rate = 0.2;   // rho
    double correlation = 0.6;     // gamma
    double snr_db = 30.0;
    double condition_number = 1.0;  // kappa
    std::uint64_t seed = 1;

    void validate() const;
};

// One realization of the linear recovery problem y = A x + z with x = a . h.
struct Instance {
    CMat pilot;        // M x N
    IVec activity;     // length N, entries 0/1
    CVec channel;      // length N
    CVec signal;       // length N, signal[i] = activity[i] * channel[i]
    CVec observation;  // length M
    double noise_var = 0.0;
};

// Spectral content of a structured pilot A = Lambda Pi F.
struct PilotFactors {
    RVec singular_values;          // length M, descending
    std::vector<int> permutation;  // length N
};

// (P(1|1), P(1|0)) of the stationary two-state Markov chain realizing
// marginal rho and lag correlation gamma^|i-j|.
std::pair<double, double> activity_transition_probs(double rho, double gamma);

IVec gen_activity(int n, double rho, double gamma, RandomStream& rng);

// h_i ~ CN(0, 1/rho).
CVec gen_channel(int n, double rho, RandomStream& rng);

// A = Lambda V^H with V^H = Pi F; sum(lambda_i) = N, lambda_i/lambda_{i+1} =
// kappa^{1/M}. F is the unitary N-point DFT.
std::pair<CMat, PilotFactors> build_pilot(int n, int m, double kappa, RandomStream& rng);

// y = A x + z, z iid CN(0, sigma^2) with
// sigma^2 = tr(A A^H) * E|x_i|^2 / (M * 10^(snr_db/10)) and E|x_i|^2 = 1.
// snr_db = +infinity disables the noise.
std::pair<CVec, double> transmit(const CMat& A, const CVec& x, double snr_db, RandomStream& rng);

enum class PilotPolicy { PerInstance, Shared };

std::string pilot_policy_name(PilotPolicy policy);
PilotPolicy pilot_policy_from_name(const std::string& name);

// Deterministic in cfg.seed; instance k draws from a per-index substream so
// generation may run in parallel. `label` keys the instance substreams, so
// splits like "train"/"test" of one scenario are disjoint while a shared
// pilot (drawn from cfg.seed alone) stays identical across them.
std::vector<Instance> gen_dataset(const ScenarioConfig& cfg, int count,
                                  PilotPolicy policy = PilotPolicy::PerInstance,
                                  std::string_view label = "data");

}  // namespace vqccs
