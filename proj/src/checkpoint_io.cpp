#include "vqccs/checkpoint_io.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vqccs/config.hpp"
#include "vqccs/dataset_io.hpp"

namespace vqccs {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

double sanitize(double v) {
    // JSON has no non-finite literals; clamp diverged diagnostics.
    if (std::isnan(v)) return 0.0;
    if (std::isinf(v)) return v > 0 ? 1e308 : -1e308;
    return v;
}

json mat_to_json(const RMat& m) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(sanitize(m(i, j)));
    return arr;
}

RMat mat_from_json(const json& arr, Eigen::Index rows, Eigen::Index cols,
                   const std::string& what) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
        throw IoError("checkpoint field " + what + " has wrong length");
    RMat m(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr.at(static_cast<std::size_t>(k++));
    return m;
}

RVec vec_from_json(const json& arr, Eigen::Index size, const std::string& what) {
    RMat m = mat_from_json(arr, size, 1, what);
    return m.col(0);
}

json vqc_to_json(const VqcParams& p) {
    return json{{"input_weights", mat_to_json(p.input_weights)},
                {"angles_a", mat_to_json(p.angles_a)},
                {"angles_b", mat_to_json(p.angles_b)},
                {"angles_c", mat_to_json(p.angles_c)}};
}

VqcParams vqc_from_json(const json& j, int n, int layers) {
    VqcParams p = VqcParams::zeros(n, layers);
    p.input_weights = mat_from_json(j.at("input_weights"), n, n, "input_weights");
    p.angles_a = mat_from_json(j.at("angles_a"), n, layers, "angles_a");
    p.angles_b = mat_from_json(j.at("angles_b"), n, layers, "angles_b");
    p.angles_c = mat_from_json(j.at("angles_c"), n, layers, "angles_c");
    return p;
}

json mlp_to_json(const MlpParams& p) {
    return json{{"n", p.w3.rows()},
                {"w1", mat_to_json(p.w1)}, {"b1", mat_to_json(p.b1)},
                {"w2", mat_to_json(p.w2)}, {"b2", mat_to_json(p.b2)},
                {"w3", mat_to_json(p.w3)}, {"b3", mat_to_json(p.b3)}};
}

MlpParams mlp_from_json(const json& j) {
    const int n = j.at("n").get<int>();
    MlpParams p = MlpParams::zeros(n);
    p.w1 = mat_from_json(j.at("w1"), 4 * n, n, "w1");
    p.b1 = vec_from_json(j.at("b1"), 4 * n, "b1");
    p.w2 = mat_from_json(j.at("w2"), 2 * n, 4 * n, "w2");
    p.b2 = vec_from_json(j.at("b2"), 2 * n, "b2");
    p.w3 = mat_from_json(j.at("w3"), n, 2 * n, "w3");
    p.b3 = vec_from_json(j.at("b3"), n, "b3");
    return p;
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
    if (ck.params.empty()) throw ParamError("write_checkpoint: no parameters");
    const int n = ck.params.front().vqc_s1.n;
    const int layers = ck.params.front().vqc_s1.layers;

    json params = json::array();
    for (const DenoiserParams& p : ck.params) {
        params.push_back(json{{"s1", vqc_to_json(p.vqc_s1)}, {"s2", vqc_to_json(p.vqc_s2)}});
    }
    json history_train = json::array();
    for (double v : ck.train_loss_history) history_train.push_back(sanitize(v));
    json history_val = json::array();
    for (double v : ck.val_loss_history) history_val.push_back(sanitize(v));

    json j{{"format", "vqccs-checkpoint"},
           {"format_version", kFormatVersion},
           {"tool_version", ck.tool_version},
           {"scenario", scenario_to_json(ck.scenario)},
           {"train", train_to_json(ck.train)},
           {"ansatz",
            json{{"n", n},
                 {"layers", layers},
                 {"iterations", ck.params.size()},
                 {"prep_mode", prep_mode_name(ck.train.prep_mode)}}},
           {"best_epoch", ck.best_epoch},
           {"best_val_loss", sanitize(ck.best_val_loss)},
           {"selected_seed", ck.selected_seed},
           {"train_loss_history", history_train},
           {"val_loss_history", history_val},
           {"params", params},
           {"circuit", ck.circuit_text}};
    if (ck.has_mlp) j["mlp"] = mlp_to_json(ck.mlp);

    atomic_write_file(path, j.dump(2) + "\n");
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("checkpoint unparseable in " + path + ": " + e.what());
    }

    try {
        if (j.at("format").get<std::string>() != "vqccs-checkpoint")
            throw IoError("not a checkpoint file: " + path);
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw IoError("unsupported checkpoint version in " + path);

        Checkpoint ck;
        ck.format_version = kFormatVersion;
        ck.tool_version = j.at("tool_version").get<std::string>();
        ck.scenario = scenario_from_json(j.at("scenario"));
        ck.train = train_from_json(j.at("train"));
        const json& ansatz = j.at("ansatz");
        const int n = ansatz.at("n").get<int>();
        const int layers = ansatz.at("layers").get<int>();
        for (const json& p : j.at("params")) {
            DenoiserParams dp;
            dp.vqc_s1 = vqc_from_json(p.at("s1"), n, layers);
            dp.vqc_s2 = vqc_from_json(p.at("s2"), n, layers);
            ck.params.push_back(std::move(dp));
        }
        ck.best_epoch = j.at("best_epoch").get<int>();
        ck.best_val_loss = j.at("best_val_loss").get<double>();
        ck.selected_seed = j.at("selected_seed").get<std::uint64_t>();
        ck.train_loss_history = j.at("train_loss_history").get<std::vector<double>>();
        ck.val_loss_history = j.at("val_loss_history").get<std::vector<double>>();
        ck.circuit_text = j.at("circuit").get<std::string>();
        if (j.contains("mlp")) {
            ck.has_mlp = true;
            ck.mlp = mlp_from_json(j.at("mlp"));
        }
        return ck;
    } catch (const json::exception& e) {
        throw IoError("checkpoint field error in " + path + ": " + e.what());
    }
}

}  // namespace vqccs
