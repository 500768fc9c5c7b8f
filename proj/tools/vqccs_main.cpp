#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vqccs/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitDivergence = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    int shots = 0;
    std::string checkpoint;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file (defaults when omitted)");
    cmd->add_option("--out", args.out_dir, "output directory override");
    cmd->add_option("--seed", args.seed, "master seed override (scenario, training, MLP)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--workers", args.workers, "worker thread count (0 = all cores)");
}

vqccs::ExperimentConfig load_config(const CommonArgs& args) {
    vqccs::ExperimentConfig cfg = vqccs::ExperimentConfig::load(args.config_path);
    if (args.seed_set) cfg.override_seed(args.seed);
    if (!args.out_dir.empty()) cfg.output.dir = args.out_dir;
    cfg.validate();
    return cfg;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        values.push_back(std::stod(tok));
    }
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grant-free access simulator: quantum-circuit-aided compressed sensing"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, eval_args, sweep_args;
    std::string sweep_axis, sweep_values_text, report_path;

    CLI::App* gen = app.add_subcommand("gen-data", "generate train/test datasets + manifests");
    add_common(gen, gen_args);

    CLI::App* train_cmd = app.add_subcommand("train", "train the unrolled recovery (and MLP)");
    add_common(train_cmd, train_args);

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate all solvers on the test set");
    add_common(eval_cmd, eval_args);
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file");
    eval_cmd->add_option("--shots", eval_args.shots, "VQC measurement shots (0 = exact)");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "evaluate across a parameter grid");
    add_common(sweep_cmd, sweep_args);
    sweep_cmd->add_option("--checkpoint", sweep_args.checkpoint, "checkpoint file (optional)");
    sweep_cmd->add_option("--shots", sweep_args.shots, "VQC measurement shots (0 = exact)");
    sweep_cmd->add_option("--axis", sweep_axis, "grid axis: m, gamma, snr or t")->required();
    sweep_cmd->add_option("--values", sweep_values_text, "comma-separated grid values")
        ->required();

    CLI::App* report_cmd = app.add_subcommand("report", "print a summary.json in readable form");
    report_cmd->add_option("summary", report_path, "path to summary.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            vqccs::ExperimentConfig cfg = load_config(gen_args);
            vqccs::GenDataResult res = vqccs::run_gen_data(cfg);
            std::cout << "wrote " << res.train_path << " (hash " << res.train_hash << ")\n"
                      << "wrote " << res.test_path << " (hash " << res.test_hash << ")\n";
        } else if (train_cmd->parsed()) {
            vqccs::ExperimentConfig cfg = load_config(train_args);
            auto progress = [](int epoch, double train_loss, double val_loss) {
                if (epoch % 10 == 0) {
                    std::cout << "epoch " << epoch << " train " << train_loss << " val "
                              << val_loss << "\n";
                }
            };
            vqccs::TrainArtifacts art = vqccs::run_train(cfg, progress);
            std::cout << "selected trial " << art.selected_trial << " (validation loss "
                      << art.checkpoint.best_val_loss << ")\n"
                      << "checkpoint: " << art.checkpoint_path << "\n"
                      << "loss curve: " << art.loss_csv_path << "\n"
                      << "final validation loss: " << art.checkpoint.best_val_loss << "\n";
        } else if (eval_cmd->parsed()) {
            vqccs::ExperimentConfig cfg = load_config(eval_args);
            vqccs::EvalArtifacts art =
                vqccs::run_eval(cfg, eval_args.checkpoint, eval_args.workers, eval_args.shots);
            std::cout << "lambda (ista/fista): " << art.lambda_ista << " / " << art.lambda_fista
                      << "\n"
                      << "mse curve: " << art.mse_csv_path << "\n"
                      << "roc points: " << art.roc_csv_path << "\n"
                      << "summary: " << art.summary_path << "\n"
                      << vqccs::report_text(art.summary_path);
        } else if (sweep_cmd->parsed()) {
            vqccs::ExperimentConfig cfg = load_config(sweep_args);
            std::vector<double> values = parse_grid(sweep_values_text);
            vqccs::SweepArtifacts art = vqccs::run_sweep(cfg, sweep_args.checkpoint, sweep_axis,
                                                         values, sweep_args.workers,
                                                         sweep_args.shots);
            std::cout << "sweep rows: " << art.rows << "\n"
                      << "sweep csv: " << art.csv_path << "\n";
        } else if (report_cmd->parsed()) {
            std::cout << vqccs::report_text(report_path);
        }
    } catch (const vqccs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const vqccs::ParamError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const vqccs::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const vqccs::NumericalError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const vqccs::DegenerateDenoiserError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
