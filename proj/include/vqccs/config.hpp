#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "vqccs/postproc.hpp"
#include "vqccs/system_model.hpp"
#include "vqccs/training.hpp"

namespace vqccs {

nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const nlohmann::json& j);

nlohmann::json train_to_json(const TrainConfig& cfg);
TrainConfig train_from_json(const nlohmann::json& j);

nlohmann::json mlp_train_to_json(const MlpTrainConfig& cfg);
MlpTrainConfig mlp_train_from_json(const nlohmann::json& j);

struct DataConfig {
    int train_count = 1024;
    int test_count = 5000;
    int lambda_val_count = 500;
    PilotPolicy pilot_policy = PilotPolicy::PerInstance;
    std::string dir = "data";

    void validate() const;
};

struct SolverConfig {
    double ista_lambda = 0.0;  // 0 = calibrate on a held-out split
    LeVariant le_variant = LeVariant::PseudoInverse;

    void validate() const;
};

struct MlpSection {
    bool enabled = true;
    MlpTrainConfig hyper;
};

struct OutputConfig {
    std::string dir = "out";
};

// Whole-experiment configuration. The defaults reproduce the reference
// scenario (N=10, M=7, rho=0.2, gamma=0.6, 30 dB) with the published
// training hyperparameters, so an empty config file is a valid experiment.
struct ExperimentConfig {
    ScenarioConfig scenario;
    DataConfig data;
    TrainConfig train;
    SolverConfig solvers;
    MlpSection mlp;
    OutputConfig output;
    int seed_trials = 3;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);

    // Empty path = defaults. File keys override defaults; unknown keys are
    // ConfigError. Environment variables VQCCS_<SECTION>_<KEY> (upper case)
    // override both.
    static ExperimentConfig load(const std::string& path);

    void validate() const;

    // Stable hash of the canonical JSON dump; embedded in every output file.
    std::string hash() const;

    // Sets every seed field (scenario, train, mlp) to one master value.
    void override_seed(std::uint64_t seed);
};

}  // namespace vqccs
