#pragma once

#include <string>
#include <vector>

#include "vqccs/checkpoint_io.hpp"
#include "vqccs/config.hpp"
#include "vqccs/dataset_io.hpp"
#include "vqccs/eval_metrics.hpp"

namespace vqccs {

std::string train_dataset_path(const ExperimentConfig& cfg);
std::string test_dataset_path(const ExperimentConfig& cfg);
std::string default_checkpoint_path(const ExperimentConfig& cfg);

struct GenDataResult {
    std::string train_path;
    std::string test_path;
    std::string train_hash;
    std::string test_hash;
};

// Writes the train and test containers plus manifests under cfg.data.dir.
GenDataResult run_gen_data(const ExperimentConfig& cfg);

struct TrainArtifacts {
    Checkpoint checkpoint;
    std::string checkpoint_path;
    std::string loss_csv_path;
    std::vector<double> trial_val_losses;  // one per seed trial
    int selected_trial = -1;
};

// Trains seed_trials independent initializations, keeps the one with the
// lowest validation loss, optionally trains the post-processing MLP on the
// training-set estimates, and writes checkpoint + loss CSV. When every
// trial diverges the last finite snapshot is still written, then
// NumericalError is thrown.
TrainArtifacts run_train(const ExperimentConfig& cfg, const EpochCallback& on_epoch = nullptr);

// Grid search for the soft-threshold weight on a held-out split of the same
// scenario, minimizing final-iteration MSE. nesterov = false tunes the
// plain proximal solver, true the accelerated one.
double calibrate_lambda(const ExperimentConfig& cfg, bool nesterov, int workers);

// Core evaluation shared by run_eval and run_sweep. ck may be null
// (baselines only). iterations must not exceed the checkpoint's when ck is
// given. shots > 0 samples the VQC expectations instead of exact values.
MetricsReport evaluate_solvers(const ExperimentConfig& cfg, const std::vector<Instance>& test,
                               const Checkpoint* ck, double lambda_ista, double lambda_fista,
                               int iterations, int workers, int shots);

struct EvalArtifacts {
    MetricsReport report;
    double lambda_ista = 0.0;
    double lambda_fista = 0.0;
    std::string mse_csv_path;
    std::string roc_csv_path;
    std::string summary_path;
};

EvalArtifacts run_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                       int workers, int shots);

struct SweepArtifacts {
    std::string csv_path;
    std::size_t rows = 0;
};

// Axis is one of m, gamma, snr, t. Re-evaluates the test scenario per grid
// value and emits one tidy CSV (axis, value, solver, metric, value) with
// two metrics per solver: final_mse and auc.
SweepArtifacts run_sweep(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                         const std::string& axis, const std::vector<double>& values, int workers,
                         int shots);

// Human-readable rendering of a summary.json written by run_eval.
std::string report_text(const std::string& summary_path);

}  // namespace vqccs
