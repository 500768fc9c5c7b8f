#include "vqccs/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "vqccs/csv.hpp"
#include "vqccs/parallel.hpp"

namespace vqccs {

using nlohmann::json;

std::string train_dataset_path(const ExperimentConfig& cfg) {
    return cfg.data.dir + "/train.dataset";
}

std::string test_dataset_path(const ExperimentConfig& cfg) {
    return cfg.data.dir + "/test.dataset";
}

std::string default_checkpoint_path(const ExperimentConfig& cfg) {
    return cfg.output.dir + "/checkpoint.json";
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string csv_comment(const ExperimentConfig& cfg) {
    return std::string(kToolVersion) + " config=" + cfg.hash();
}

}  // namespace

GenDataResult run_gen_data(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_dir(cfg.data.dir);

    GenDataResult res;
    res.train_path = train_dataset_path(cfg);
    res.test_path = test_dataset_path(cfg);

    DatasetFile train_ds;
    train_ds.scenario = cfg.scenario;
    train_ds.policy = cfg.data.pilot_policy;
    train_ds.label = "train";
    train_ds.instances = gen_dataset(cfg.scenario, cfg.data.train_count, cfg.data.pilot_policy,
                                     "train");
    write_dataset(res.train_path, train_ds);
    res.train_hash = file_content_hash(res.train_path);

    DatasetFile test_ds;
    test_ds.scenario = cfg.scenario;
    test_ds.policy = cfg.data.pilot_policy;
    test_ds.label = "test";
    test_ds.instances = gen_dataset(cfg.scenario, cfg.data.test_count, cfg.data.pilot_policy,
                                    "test");
    write_dataset(res.test_path, test_ds);
    res.test_hash = file_content_hash(res.test_path);
    return res;
}

namespace {

void check_scenario_match(const ScenarioConfig& want, const ScenarioConfig& got,
                          const std::string& what) {
    std::ostringstream msg;
    if (want.n_devices != got.n_devices) {
        msg << what << ": n_devices expected " << want.n_devices << ", found " << got.n_devices;
        throw ConfigError(msg.str());
    }
    if (want.n_measurements != got.n_measurements) {
        msg << what << ": n_measurements expected " << want.n_measurements << ", found "
            << got.n_measurements;
        throw ConfigError(msg.str());
    }
}

std::vector<RVec> final_magnitudes(const std::vector<Instance>& data,
                                   const std::vector<DenoiserParams>& params,
                                   const TrainConfig& tcfg, int workers) {
    std::vector<RVec> features(data.size());
    parallel_for(data.size(), static_cast<std::size_t>(workers), [&](std::size_t i) {
        VqcRunOptions opt;
        opt.variant = tcfg.variant;
        opt.prep_mode = tcfg.prep_mode;
        opt.sigma2 = data[i].noise_var;
        SolverTrajectory traj =
            vqc_cs(data[i].observation, data[i].pilot, params, tcfg.iterations, opt);
        features[i] = traj.nle_estimates.back().cwiseAbs();
    });
    return features;
}

}  // namespace

TrainArtifacts run_train(const ExperimentConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    DatasetFile ds = read_dataset(train_dataset_path(cfg));
    check_scenario_match(cfg.scenario, ds.scenario, "train dataset");
    ensure_dir(cfg.output.dir);

    const int workers =
        cfg.train.workers > 0 ? cfg.train.workers : static_cast<int>(default_workers());
    RandomStream trial_root = RandomStream(cfg.train.seed).substream("trial");

    TrainArtifacts art;
    TrainResult best;
    best.best_val_loss = std::numeric_limits<double>::infinity();
    std::uint64_t best_seed = 0;
    TrainResult last;  // fallback when every trial diverges
    std::uint64_t last_seed = 0;
    for (int trial = 0; trial < cfg.seed_trials; ++trial) {
        TrainConfig tcfg = cfg.train;
        tcfg.seed = trial_root.substream(static_cast<std::uint64_t>(trial)).seed();
        TrainResult res = train(ds.instances, tcfg, on_epoch);
        art.trial_val_losses.push_back(res.best_val_loss);
        last = res;
        last_seed = tcfg.seed;
        if (!res.diverged && res.best_val_loss < best.best_val_loss) {
            best = std::move(res);
            best_seed = tcfg.seed;
            art.selected_trial = trial;
        }
    }

    const bool all_diverged = art.selected_trial < 0;
    if (all_diverged) {
        best = std::move(last);
        best_seed = last_seed;
    }

    Checkpoint ck;
    ck.scenario = ds.scenario;
    ck.train = cfg.train;
    ck.params = best.params;
    ck.train_loss_history = best.train_loss_history;
    ck.val_loss_history = best.val_loss_history;
    ck.best_epoch = best.best_epoch;
    ck.best_val_loss = best.best_val_loss;
    ck.selected_seed = best_seed;
    ck.circuit_text = circuit_to_text(
        build_ansatz_circuit(ds.scenario.n_devices, cfg.train.layers, cfg.train.prep_mode));

    if (!all_diverged && cfg.mlp.enabled) {
        std::vector<RVec> features = final_magnitudes(ds.instances, ck.params, cfg.train, workers);
        std::vector<IVec> labels(ds.instances.size());
        for (std::size_t i = 0; i < ds.instances.size(); ++i) labels[i] = ds.instances[i].activity;
        MlpTrainResult mlp_res = train_mlp(features, labels, cfg.mlp.hyper);
        ck.has_mlp = true;
        ck.mlp = mlp_res.params;
    }

    art.checkpoint_path = default_checkpoint_path(cfg);
    write_checkpoint(art.checkpoint_path, ck);

    art.loss_csv_path = cfg.output.dir + "/train_loss.csv";
    std::vector<std::vector<std::string>> rows;
    for (std::size_t e = 0; e < best.train_loss_history.size(); ++e) {
        rows.push_back({std::to_string(e), format_double(best.train_loss_history[e]),
                        format_double(e < best.val_loss_history.size()
                                          ? best.val_loss_history[e]
                                          : std::numeric_limits<double>::quiet_NaN())});
    }
    write_csv(art.loss_csv_path, csv_comment(cfg), {"epoch", "train_loss", "val_loss"}, rows);

    art.checkpoint = std::move(ck);
    if (all_diverged) {
        throw NumericalError("training diverged in every seed trial; last finite state written to " +
                             art.checkpoint_path);
    }
    return art;
}

double calibrate_lambda(const ExperimentConfig& cfg, bool nesterov, int workers) {
    std::vector<Instance> val = gen_dataset(cfg.scenario, cfg.data.lambda_val_count,
                                            cfg.data.pilot_policy, "lambda_val");
    double mean_noise = 0.0;
    for (const Instance& inst : val) mean_noise += inst.noise_var;
    mean_noise /= static_cast<double>(val.size());
    const double base =
        std::sqrt(std::max(mean_noise, 1e-12) * std::log(static_cast<double>(cfg.scenario.n_devices)));

    const double factors[] = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
    double best_lambda = base;
    double best_mse = std::numeric_limits<double>::infinity();
    std::vector<double> inst_mse(val.size());
    for (double f : factors) {
        const double lambda = f * base;
        parallel_for(val.size(), static_cast<std::size_t>(workers), [&](std::size_t i) {
            SolverTrajectory traj =
                nesterov ? fista(val[i].observation, val[i].pilot, lambda, cfg.train.iterations)
                         : ista(val[i].observation, val[i].pilot, lambda, cfg.train.iterations);
            inst_mse[i] = mse(traj.nle_estimates.back(), val[i].signal);
        });
        double total = 0.0;
        for (double v : inst_mse) total += v;
        total /= static_cast<double>(val.size());
        if (total < best_mse) {
            best_mse = total;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

namespace {

struct InstanceEval {
    std::vector<std::vector<double>> mse_rows;   // per solver, iterations+1
    std::vector<std::vector<double>> score_rows;  // per score source, N
};

}  // namespace

MetricsReport evaluate_solvers(const ExperimentConfig& cfg, const std::vector<Instance>& test,
                               const Checkpoint* ck, double lambda_ista, double lambda_fista,
                               int iterations, int workers, int shots) {
    if (test.empty()) throw ParamError("evaluate_solvers: empty test set");
    if (iterations < 1) throw ParamError("evaluate_solvers: iterations must be >= 1");
    if (ck != nullptr) {
        const int n = static_cast<int>(test.front().pilot.cols());
        if (ck->params.empty() || ck->params.front().vqc_s1.n != n) {
            std::ostringstream msg;
            msg << "checkpoint: n_devices expected " << n << ", found "
                << (ck->params.empty() ? 0 : ck->params.front().vqc_s1.n);
            throw ConfigError(msg.str());
        }
        if (static_cast<int>(ck->params.size()) < iterations) {
            std::ostringstream msg;
            msg << "checkpoint: iterations expected >= " << iterations << ", found "
                << ck->params.size();
            throw ConfigError(msg.str());
        }
    }

    std::vector<std::string> solvers = {"ista", "fista", "oamp"};
    if (ck != nullptr) solvers.push_back("vqc");
    const bool with_mlp = ck != nullptr && ck->has_mlp;
    std::vector<std::string> score_sources = solvers;
    if (with_mlp) score_sources.push_back("vqc_mlp");

    const std::size_t count = test.size();
    std::vector<InstanceEval> evals(count);
    RandomStream shot_root = RandomStream(cfg.scenario.seed).substream("shots");

    parallel_for(count, static_cast<std::size_t>(workers), [&](std::size_t i) {
        const Instance& inst = test[i];
        InstanceEval& ev = evals[i];
        const double mse0 = inst.signal.squaredNorm() / static_cast<double>(inst.signal.size());

        auto push_solver = [&](const SolverTrajectory& traj) {
            std::vector<double> row(static_cast<std::size_t>(iterations) + 1);
            row[0] = mse0;
            for (int t = 0; t < iterations; ++t) {
                row[static_cast<std::size_t>(t) + 1] =
                    mse(traj.nle_estimates[static_cast<std::size_t>(t)], inst.signal);
            }
            ev.mse_rows.push_back(std::move(row));
            RVec mags = traj.nle_estimates.back().cwiseAbs();
            ev.score_rows.emplace_back(mags.data(), mags.data() + mags.size());
        };

        push_solver(ista(inst.observation, inst.pilot, lambda_ista, iterations));
        push_solver(fista(inst.observation, inst.pilot, lambda_fista, iterations));
        push_solver(oamp(inst.observation, inst.pilot, cfg.scenario.activity_rate,
                         inst.noise_var, iterations, cfg.solvers.le_variant));
        if (ck != nullptr) {
            VqcRunOptions opt;
            opt.variant = ck->train.variant;
            opt.prep_mode = ck->train.prep_mode;
            opt.sigma2 = inst.noise_var;
            opt.shots = shots;
            RandomStream shot_rng = shot_root.substream(static_cast<std::uint64_t>(i));
            if (shots > 0) opt.shot_rng = &shot_rng;
            SolverTrajectory traj = vqc_cs(inst.observation, inst.pilot, ck->params, iterations,
                                           opt);
            push_solver(traj);
            if (with_mlp) {
                RVec mags = traj.nle_estimates.back().cwiseAbs();
                RVec probs = mlp_forward(ck->mlp, mags);
                ev.score_rows.emplace_back(probs.data(), probs.data() + probs.size());
            }
        }
    });

    MetricsReport report;
    report.sample_count = count;
    report.config_hash = cfg.hash();
    report.tool_version = kToolVersion;

    for (std::size_t s = 0; s < solvers.size(); ++s) {
        SolverMse sm;
        sm.solver = solvers[s];
        sm.per_iteration.assign(static_cast<std::size_t>(iterations) + 1, 0.0);
        for (const InstanceEval& ev : evals) {
            for (std::size_t t = 0; t < sm.per_iteration.size(); ++t) {
                sm.per_iteration[t] += ev.mse_rows[s][t];
            }
        }
        for (double& v : sm.per_iteration) v /= static_cast<double>(count);
        report.mse_per_solver.push_back(std::move(sm));
    }

    std::vector<int> labels;
    labels.reserve(count * static_cast<std::size_t>(test.front().activity.size()));
    for (const Instance& inst : test) {
        for (Eigen::Index d = 0; d < inst.activity.size(); ++d) labels.push_back(inst.activity[d]);
    }
    for (std::size_t s = 0; s < score_sources.size(); ++s) {
        std::vector<double> scores;
        scores.reserve(labels.size());
        for (const InstanceEval& ev : evals) {
            scores.insert(scores.end(), ev.score_rows[s].begin(), ev.score_rows[s].end());
        }
        SolverRoc sr;
        sr.solver = score_sources[s];
        sr.roc = roc_auc(scores, labels);
        report.roc_per_solver.push_back(std::move(sr));
    }
    return report;
}

namespace {

json summary_json(const ExperimentConfig& cfg, const MetricsReport& report, double lambda_ista,
                  double lambda_fista) {
    json auc = json::object();
    for (const SolverRoc& sr : report.roc_per_solver) auc[sr.solver] = sr.roc.auc;
    json final_mse = json::object();
    json final_mse_db = json::object();
    for (const SolverMse& sm : report.mse_per_solver) {
        final_mse[sm.solver] = sm.per_iteration.back();
        final_mse_db[sm.solver] = to_db(sm.per_iteration.back());
    }
    return json{{"tool_version", kToolVersion},
                {"config_hash", cfg.hash()},
                {"sample_count", report.sample_count},
                {"lambda_ista", lambda_ista},
                {"lambda_fista", lambda_fista},
                {"auc", auc},
                {"final_mse", final_mse},
                {"final_mse_db", final_mse_db}};
}

}  // namespace

EvalArtifacts run_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                       int workers, int shots) {
    cfg.validate();
    DatasetFile ds = read_dataset(test_dataset_path(cfg));
    check_scenario_match(cfg.scenario, ds.scenario, "test dataset");
    Checkpoint ck = read_checkpoint(checkpoint_path.empty() ? default_checkpoint_path(cfg)
                                                            : checkpoint_path);
    ensure_dir(cfg.output.dir);
    const int w = workers > 0 ? workers : static_cast<int>(default_workers());

    EvalArtifacts art;
    art.lambda_ista = cfg.solvers.ista_lambda > 0.0 ? cfg.solvers.ista_lambda
                                                    : calibrate_lambda(cfg, false, w);
    art.lambda_fista = cfg.solvers.ista_lambda > 0.0 ? cfg.solvers.ista_lambda
                                                     : calibrate_lambda(cfg, true, w);
    art.report = evaluate_solvers(cfg, ds.instances, &ck, art.lambda_ista, art.lambda_fista,
                                  cfg.train.iterations, w, shots);

    // Per-iteration MSE, one solver per column pair (linear + dB).
    std::vector<std::string> header = {"iteration"};
    for (const SolverMse& sm : art.report.mse_per_solver) {
        header.push_back(sm.solver);
        header.push_back(sm.solver + "_db");
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t t = 0; t <= static_cast<std::size_t>(cfg.train.iterations); ++t) {
        std::vector<std::string> row = {std::to_string(t)};
        for (const SolverMse& sm : art.report.mse_per_solver) {
            row.push_back(format_double(sm.per_iteration[t]));
            row.push_back(format_double(to_db(sm.per_iteration[t])));
        }
        rows.push_back(std::move(row));
    }
    art.mse_csv_path = cfg.output.dir + "/mse.csv";
    write_csv(art.mse_csv_path, csv_comment(cfg), header, rows);

    std::vector<std::vector<std::string>> roc_rows;
    for (const SolverRoc& sr : art.report.roc_per_solver) {
        for (const RocPoint& p : sr.roc.points) {
            roc_rows.push_back({sr.solver, format_double(p.fpr), format_double(p.tpr)});
        }
    }
    art.roc_csv_path = cfg.output.dir + "/roc.csv";
    write_csv(art.roc_csv_path, csv_comment(cfg), {"solver", "fpr", "tpr"}, roc_rows);

    art.summary_path = cfg.output.dir + "/summary.json";
    atomic_write_file(art.summary_path,
                      summary_json(cfg, art.report, art.lambda_ista, art.lambda_fista).dump(2) +
                          "\n");
    return art;
}

SweepArtifacts run_sweep(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                         const std::string& axis, const std::vector<double>& values, int workers,
                         int shots) {
    cfg.validate();
    if (values.empty()) throw ConfigError("sweep: empty grid");
    std::string ax = axis;
    std::transform(ax.begin(), ax.end(), ax.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ax != "m" && ax != "gamma" && ax != "snr" && ax != "t")
        throw ConfigError("sweep: axis must be one of m, gamma, snr, t");

    Checkpoint ck;
    bool have_ck = !checkpoint_path.empty();
    if (have_ck) ck = read_checkpoint(checkpoint_path);
    ensure_dir(cfg.output.dir);
    const int w = workers > 0 ? workers : static_cast<int>(default_workers());

    std::vector<std::vector<std::string>> rows;
    for (double value : values) {
        ExperimentConfig point = cfg;
        int iterations = cfg.train.iterations;
        if (ax == "m") {
            point.scenario.n_measurements = static_cast<int>(value);
        } else if (ax == "gamma") {
            point.scenario.correlation = value;
        } else if (ax == "snr") {
            point.scenario.snr_db = value;
        } else {
            iterations = static_cast<int>(value);
        }
        point.validate();

        std::vector<Instance> test = gen_dataset(point.scenario, point.data.test_count,
                                                 point.data.pilot_policy, "test");
        double li = point.solvers.ista_lambda > 0.0 ? point.solvers.ista_lambda
                                                    : calibrate_lambda(point, false, w);
        double lf = point.solvers.ista_lambda > 0.0 ? point.solvers.ista_lambda
                                                    : calibrate_lambda(point, true, w);
        MetricsReport report = evaluate_solvers(point, test, have_ck ? &ck : nullptr, li, lf,
                                                iterations, w, shots);

        for (const SolverMse& sm : report.mse_per_solver) {
            rows.push_back({ax, format_double(value), sm.solver, "final_mse",
                            format_double(sm.per_iteration.back())});
        }
        for (const SolverRoc& sr : report.roc_per_solver) {
            if (sr.solver == "vqc_mlp") continue;  // keep one auc row per solver
            rows.push_back(
                {ax, format_double(value), sr.solver, "auc", format_double(sr.roc.auc)});
        }
    }

    SweepArtifacts art;
    art.csv_path = cfg.output.dir + "/sweep_" + ax + ".csv";
    art.rows = rows.size();
    write_csv(art.csv_path, csv_comment(cfg), {"axis", "value", "solver", "metric", "value"},
              rows);
    return art;
}

std::string report_text(const std::string& summary_path) {
    std::ifstream in(summary_path);
    if (!in) throw IoError("cannot open summary: " + summary_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("summary unparseable in " + summary_path + ": " + e.what());
    }
    std::ostringstream out;
    out << "evaluation summary (" << j.value("tool_version", "?") << ")\n";
    out << "  config hash: " << j.value("config_hash", "?") << "\n";
    out << "  samples: " << j.value("sample_count", 0) << "\n";
    out << "  final MSE (dB):\n";
    if (j.contains("final_mse_db")) {
        for (const auto& item : j.at("final_mse_db").items()) {
            out << "    " << item.key() << ": " << item.value().get<double>() << "\n";
        }
    }
    out << "  AUC:\n";
    if (j.contains("auc")) {
        for (const auto& item : j.at("auc").items()) {
            out << "    " << item.key() << ": " << item.value().get<double>() << "\n";
        }
    }
    return out.str();
}

}  // namespace vqccs
