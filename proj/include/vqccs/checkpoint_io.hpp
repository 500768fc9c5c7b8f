#pragma once

#include <string>
#include <vector>

#include "vqccs/postproc.hpp"
#include "vqccs/system_model.hpp"
#include "vqccs/training.hpp"

namespace vqccs {

struct Checkpoint {
    int format_version = 1;
    std::string tool_version = kToolVersion;
    ScenarioConfig scenario;
    TrainConfig train;
    std::vector<DenoiserParams> params;
    std::vector<double> train_loss_history;
    std::vector<double> val_loss_history;
    int best_epoch = -1;
    double best_val_loss = 0.0;
    std::uint64_t selected_seed = 0;  // the winning seed trial
    bool has_mlp = false;
    MlpParams mlp;
    std::string circuit_text;  // structure echo of the per-qubit circuit
};

// Versioned JSON, temp-then-rename. Doubles round-trip exactly.
void write_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace vqccs
