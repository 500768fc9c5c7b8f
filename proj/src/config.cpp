#include "vqccs/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

namespace vqccs {

using nlohmann::json;

namespace {

// Pulls a field if present, leaving the default otherwise. The caller has
// already rejected unknown keys, so presence checks are enough here.
template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void get_if(const json& j, const char* key, PilotPolicy& out) {
    if (j.contains(key)) out = pilot_policy_from_name(j.at(key).get<std::string>());
}

void get_if(const json& j, const char* key, LeVariant& out) {
    if (j.contains(key)) out = le_variant_from_name(j.at(key).get<std::string>());
}

void get_if(const json& j, const char* key, PrepMode& out) {
    if (j.contains(key)) out = prep_mode_from_name(j.at(key).get<std::string>());
}

}  // namespace

json scenario_to_json(const ScenarioConfig& cfg) {
    return json{{"n_devices", cfg.n_devices},
                {"n_measurements", cfg.n_measurements},
                {"activity_rate", cfg.activity_rate},
                {"correlation", cfg.correlation},
                {"snr_db", cfg.snr_db},
                {"condition_number", cfg.condition_number},
                {"seed", cfg.seed}};
}

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig cfg;
    get_if(j, "n_devices", cfg.n_devices);
    get_if(j, "n_measurements", cfg.n_measurements);
    get_if(j, "activity_rate", cfg.activity_rate);
    get_if(j, "correlation", cfg.correlation);
    get_if(j, "snr_db", cfg.snr_db);
    get_if(j, "condition_number", cfg.condition_number);
    get_if(j, "seed", cfg.seed);
    return cfg;
}

json train_to_json(const TrainConfig& cfg) {
    return json{{"iterations", cfg.iterations},
                {"layers", cfg.layers},
                {"loss_decay", cfg.loss_decay},
                {"learning_rate", cfg.learning_rate},
                {"rmsprop_beta", cfg.rmsprop_beta},
                {"rmsprop_eps", cfg.rmsprop_eps},
                {"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"val_fraction", cfg.val_fraction},
                {"seed", cfg.seed},
                {"le_variant", le_variant_name(cfg.variant)},
                {"prep_mode", prep_mode_name(cfg.prep_mode)},
                {"workers", cfg.workers}};
}

TrainConfig train_from_json(const json& j) {
    TrainConfig cfg;
    get_if(j, "iterations", cfg.iterations);
    get_if(j, "layers", cfg.layers);
    get_if(j, "loss_decay", cfg.loss_decay);
    get_if(j, "learning_rate", cfg.learning_rate);
    get_if(j, "rmsprop_beta", cfg.rmsprop_beta);
    get_if(j, "rmsprop_eps", cfg.rmsprop_eps);
    get_if(j, "epochs", cfg.epochs);
    get_if(j, "batch_size", cfg.batch_size);
    get_if(j, "val_fraction", cfg.val_fraction);
    get_if(j, "seed", cfg.seed);
    get_if(j, "le_variant", cfg.variant);
    get_if(j, "prep_mode", cfg.prep_mode);
    get_if(j, "workers", cfg.workers);
    return cfg;
}

json mlp_train_to_json(const MlpTrainConfig& cfg) {
    return json{{"learning_rate", cfg.learning_rate},
                {"rmsprop_beta", cfg.rmsprop_beta},
                {"rmsprop_eps", cfg.rmsprop_eps},
                {"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"val_fraction", cfg.val_fraction},
                {"seed", cfg.seed},
                {"workers", cfg.workers}};
}

MlpTrainConfig mlp_train_from_json(const json& j) {
    MlpTrainConfig cfg;
    get_if(j, "learning_rate", cfg.learning_rate);
    get_if(j, "rmsprop_beta", cfg.rmsprop_beta);
    get_if(j, "rmsprop_eps", cfg.rmsprop_eps);
    get_if(j, "epochs", cfg.epochs);
    get_if(j, "batch_size", cfg.batch_size);
    get_if(j, "val_fraction", cfg.val_fraction);
    get_if(j, "seed", cfg.seed);
    get_if(j, "workers", cfg.workers);
    return cfg;
}

void DataConfig::validate() const {
    if (train_count < 1) throw ConfigError("data.train_count must be >= 1");
    if (test_count < 1) throw ConfigError("data.test_count must be >= 1");
    if (lambda_val_count < 1) throw ConfigError("data.lambda_val_count must be >= 1");
    if (dir.empty()) throw ConfigError("data.dir must not be empty");
}

void SolverConfig::validate() const {
    if (ista_lambda < 0.0) throw ConfigError("solvers.ista_lambda must be non-negative");
}

json ExperimentConfig::to_json() const {
    return json{{"scenario", scenario_to_json(scenario)},
                {"data",
                 json{{"train_count", data.train_count},
                      {"test_count", data.test_count},
                      {"lambda_val_count", data.lambda_val_count},
                      {"pilot_policy", pilot_policy_name(data.pilot_policy)},
                      {"dir", data.dir}}},
                {"train", train_to_json(train)},
                {"solvers",
                 json{{"ista_lambda", solvers.ista_lambda},
                      {"le_variant", le_variant_name(solvers.le_variant)}}},
                {"mlp", [this] {
                     json m = mlp_train_to_json(mlp.hyper);
                     m["enabled"] = mlp.enabled;
                     return m;
                 }()},
                {"output", json{{"dir", output.dir}}},
                {"seed_trials", seed_trials}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    if (j.contains("scenario")) cfg.scenario = scenario_from_json(j.at("scenario"));
    if (j.contains("data")) {
        const json& d = j.at("data");
        get_if(d, "train_count", cfg.data.train_count);
        get_if(d, "test_count", cfg.data.test_count);
        get_if(d, "lambda_val_count", cfg.data.lambda_val_count);
        get_if(d, "pilot_policy", cfg.data.pilot_policy);
        get_if(d, "dir", cfg.data.dir);
    }
    if (j.contains("train")) cfg.train = train_from_json(j.at("train"));
    if (j.contains("solvers")) {
        const json& s = j.at("solvers");
        get_if(s, "ista_lambda", cfg.solvers.ista_lambda);
        get_if(s, "le_variant", cfg.solvers.le_variant);
    }
    if (j.contains("mlp")) {
        const json& m = j.at("mlp");
        cfg.mlp.hyper = mlp_train_from_json(m);
        get_if(m, "enabled", cfg.mlp.enabled);
    }
    if (j.contains("output")) get_if(j.at("output"), "dir", cfg.output.dir);
    get_if(j, "seed_trials", cfg.seed_trials);
    return cfg;
}

namespace {

// Rejects keys that the defaults do not know about, recursively; typos in a
// config file should fail loudly rather than silently run the defaults.
void check_known_keys(const json& provided, const json& defaults, const std::string& prefix) {
    for (const auto& item : provided.items()) {
        if (!defaults.contains(item.key())) {
            throw ConfigError("unknown config key: " + prefix + item.key());
        }
        if (item.value().is_object() && defaults.at(item.key()).is_object()) {
            check_known_keys(item.value(), defaults.at(item.key()), prefix + item.key() + ".");
        }
    }
}

void apply_env_value(json& slot, const std::string& name, const char* text) {
    try {
        if (slot.is_boolean()) {
            std::string v(text);
            if (v == "1" || v == "true") {
                slot = true;
            } else if (v == "0" || v == "false") {
                slot = false;
            } else {
                throw ConfigError("");
            }
        } else if (slot.is_number_integer() || slot.is_number_unsigned()) {
            slot = json::parse(text);
            if (!slot.is_number()) throw ConfigError("");
        } else if (slot.is_number_float()) {
            slot = std::stod(text);
        } else {
            slot = std::string(text);
        }
    } catch (const std::exception&) {
        throw ConfigError("environment override " + name + " is not parseable");
    }
}

std::string env_name(const std::string& section, const std::string& key) {
    std::string name = "VQCCS_";
    auto append_upper = [&name](const std::string& s) {
        for (char c : s) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    };
    if (!section.empty()) {
        append_upper(section);
        name += '_';
    }
    append_upper(key);
    return name;
}

void apply_env_overrides(json& j) {
    for (auto& section : j.items()) {
        if (section.value().is_object()) {
            for (auto& field : section.value().items()) {
                std::string name = env_name(section.key(), field.key());
                if (const char* text = std::getenv(name.c_str())) {
                    apply_env_value(field.value(), name, text);
                }
            }
        } else {
            std::string name = env_name("", section.key());
            if (const char* text = std::getenv(name.c_str())) {
                apply_env_value(section.value(), name, text);
            }
        }
    }
}

void merge_into(json& base, const json& overlay) {
    for (const auto& item : overlay.items()) {
        if (item.value().is_object() && base.at(item.key()).is_object()) {
            merge_into(base.at(item.key()), item.value());
        } else {
            base.at(item.key()) = item.value();
        }
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    json merged = ExperimentConfig{}.to_json();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path);
        json from_file;
        try {
            in >> from_file;
        } catch (const json::exception& e) {
            throw ConfigError("config parse error in " + path + ": " + e.what());
        }
        if (!from_file.is_object()) throw ConfigError("config root must be an object: " + path);
        check_known_keys(from_file, merged, "");
        merge_into(merged, from_file);
    }
    apply_env_overrides(merged);
    ExperimentConfig cfg = from_json(merged);
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    scenario.validate();
    data.validate();
    train.validate();
    solvers.validate();
    mlp.hyper.validate();
    if (output.dir.empty()) throw ConfigError("output.dir must not be empty");
    if (seed_trials < 1) throw ConfigError("seed_trials must be >= 1");
}

std::string ExperimentConfig::hash() const {
    std::string dump = to_json().dump();
    return to_hex(fnv1a64(dump.data(), dump.size()));
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
    scenario.seed = seed;
    train.seed = seed;
    mlp.hyper.seed = seed;
}

}  // namespace vqccs
