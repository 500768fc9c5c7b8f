#pragma once

#include <functional>
#include <vector>

#include "vqccs/common.hpp"
#include "vqccs/cs_solvers.hpp"
#include "vqccs/system_model.hpp"
#include "vqccs/vqc_denoiser.hpp"

namespace vqccs {

// Geometric per-iteration weights decay^(T-t) for t = 1..T; the final
// iteration always has weight 1.
std::vector<double> loss_weights(int iterations, double decay);

// C = (1/N) sum_t weight_t ||x_hat^t - x||^2 for one recovered trajectory.
double unrolled_loss(const SolverTrajectory& traj, const CVec& x_true,
                     const std::vector<double>& weights);

struct UnrolledGrad {
    double loss = 0.0;
    std::vector<DenoiserParams> grads;
};

// Loss and its exact gradient w.r.t. every per-iteration parameter of the
// unrolled recovery, for a single instance. The forward pass reproduces
// vqc_cs with exact expectations (shots are never sampled while training).
UnrolledGrad unrolled_grad(const CVec& y, const CMat& A, const CVec& x_true,
                           const std::vector<DenoiserParams>& params, int iterations,
                           const VqcRunOptions& options, const std::vector<double>& weights);

// Flat layout used by the optimizer and checkpoints: per CS iteration, the
// s1 producer then the s2 producer; within one VQC the input weights
// row-major, then each angle bank row-major.
RVec flatten_params(const std::vector<DenoiserParams>& params);
std::vector<DenoiserParams> unflatten_params(const RVec& flat, int n, int layers,
                                             int iterations);

// accum += scale * grads, element by element against matching shapes.
void add_scaled(std::vector<DenoiserParams>& accum, const std::vector<DenoiserParams>& grads,
                double scale);

// RMSProp with the usual leaky second-moment accumulator:
//   v <- beta v + (1-beta) g^2,  theta <- theta - lr g / (sqrt(v) + eps)
struct RmspropState {
    double beta = 0.9;
    double eps = 1e-8;
    RVec second_moment;

    void step(RVec& params, const RVec& grad, double learning_rate);
};

struct TrainConfig {
    int iterations = 10;
    int layers = 3;
    double loss_decay = 0.85;
    double learning_rate = 0.01;
    double rmsprop_beta = 0.9;
    double rmsprop_eps = 1e-8;
    int epochs = 100;
    int batch_size = 32;
    double val_fraction = 0.2;
    std::uint64_t seed = 1;
    LeVariant variant = LeVariant::PseudoInverse;
    PrepMode prep_mode = PrepMode::PerLayer;
    int workers = 0;  // 0 picks the environment default

    void validate() const;
};

struct TrainResult {
    std::vector<DenoiserParams> params;  // best-validation snapshot
    std::vector<double> train_loss_history;
    std::vector<double> val_loss_history;
    int best_epoch = -1;
    double best_val_loss = 0.0;
    bool diverged = false;  // loss became non-finite; params hold the last finite snapshot
    int diverged_epoch = -1;
};

using EpochCallback = std::function<void(int epoch, double train_loss, double val_loss)>;

// Mini-batch RMSProp over the unrolled recovery. The instance list is split
// deterministically from cfg.seed into train/validation parts; the returned
// parameters are the snapshot with the lowest validation loss.
TrainResult train(const std::vector<Instance>& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = nullptr);

// Mean unrolled loss of fixed parameters over a set of instances.
double evaluate_loss(const std::vector<Instance>& data, const std::vector<DenoiserParams>& params,
                     const TrainConfig& cfg, int workers);

}  // namespace vqccs
