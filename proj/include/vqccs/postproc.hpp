#pragma once

#include <vector>

#include "vqccs/common.hpp"
#include "vqccs/rng.hpp"

namespace vqccs {

// Fully connected activity detector, N -> 4N -> 2N -> N. Hidden layers are
// rectified linear, the output layer is logistic.
struct MlpParams {
    RMat w1;  // 4N x N
    RVec b1;
    RMat w2;  // 2N x 4N
    RVec b2;
    RMat w3;  // N x 2N
    RVec b3;

    static MlpParams zeros(int n);

    // Hidden weights ~ N(0, 2/fan_in), output weights ~ N(0, 1/fan_in),
    // biases zero.
    static MlpParams random_init(int n, RandomStream& rng);

    void validate() const;
    int input_size() const { return static_cast<int>(w1.cols()); }
    std::size_t count() const;
};

// Per-device activity probabilities in (0, 1) from magnitude features.
RVec mlp_forward(const MlpParams& params, const RVec& features);

// -(1/N) sum_i [a_i log p_i + (1 - a_i) log(1 - p_i)], probabilities clamped
// to [1e-12, 1 - 1e-12] before the logs.
double bce_loss(const RVec& probs, const IVec& labels);

struct MlpGrad {
    double loss = 0.0;
    MlpParams grads;
};

// BCE loss and its exact gradient for one instance.
MlpGrad mlp_grad(const MlpParams& params, const RVec& features, const IVec& labels);

// Flat layout: w1 row-major, b1, w2, b2, w3, b3.
RVec flatten_mlp(const MlpParams& params);
MlpParams unflatten_mlp(const RVec& flat, int n);

struct MlpTrainConfig {
    double learning_rate = 0.005;
    double rmsprop_beta = 0.9;
    double rmsprop_eps = 1e-8;
    int epochs = 200;
    int batch_size = 64;
    double val_fraction = 0.2;
    std::uint64_t seed = 1;
    int workers = 0;

    void validate() const;
};

struct MlpTrainResult {
    MlpParams params;  // snapshot from the best validation epoch
    std::vector<double> loss_history;      // mean train BCE per epoch
    std::vector<double> val_loss_history;  // mean validation BCE per epoch
    int best_epoch = -1;
    double best_val_loss = 0.0;
};

// Mini-batch RMSProp on the BCE objective with a held-out validation split;
// the returned parameters are the best-validation-loss snapshot (the net
// overfits well before the last epoch). Deterministic under cfg.seed.
// NumericalError when the epoch loss stops being finite.
MlpTrainResult train_mlp(const std::vector<RVec>& features, const std::vector<IVec>& labels,
                         const MlpTrainConfig& cfg);

}  // namespace vqccs
