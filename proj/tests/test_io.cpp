#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "vqccs/checkpoint_io.hpp"
#include "vqccs/csv.hpp"
#include "vqccs/dataset_io.hpp"
#include "vqccs/rng.hpp"

using namespace vqccs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("vqccs_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

DatasetFile small_dataset(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.n_devices = 4;
    cfg.n_measurements = 3;
    cfg.seed = seed;
    DatasetFile data;
    data.scenario = cfg;
    data.policy = PilotPolicy::PerInstance;
    data.label = "unit";
    data.instances = gen_dataset(cfg, 6, PilotPolicy::PerInstance, "unit");
    return data;
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Checkpoint small_checkpoint() {
    Checkpoint ck;
    ck.scenario.n_devices = 3;
    ck.scenario.n_measurements = 2;
    ck.train.iterations = 2;
    ck.train.layers = 2;
    RandomStream rng(33);
    for (int t = 0; t < ck.train.iterations; ++t) {
        DenoiserParams dp;
        dp.vqc_s1 = VqcParams::random_init(3, 2, rng);
        dp.vqc_s2 = VqcParams::random_init(3, 2, rng);
        ck.params.push_back(std::move(dp));
    }
    ck.train_loss_history = {1.25, 0.5, 1.0 / 3.0};
    ck.val_loss_history = {1.5, 0.625, 0.4};
    ck.best_epoch = 2;
    ck.best_val_loss = 0.4;
    ck.selected_seed = 42;
    ck.circuit_text = circuit_to_text(build_qubit_circuit(0, VqcParams::zeros(3, 2)));
    return ck;
}

}  // namespace

TEST_CASE("dataset files round trip every field exactly") {
    TempDir dir;
    DatasetFile data = small_dataset(11);
    const std::string path = dir.file("a.dataset");
    write_dataset(path, data);
    DatasetFile back = read_dataset(path);

    CHECK(back.scenario.n_devices == data.scenario.n_devices);
    CHECK(back.scenario.n_measurements == data.scenario.n_measurements);
    CHECK(back.scenario.activity_rate == data.scenario.activity_rate);
    CHECK(back.scenario.correlation == data.scenario.correlation);
    CHECK(back.scenario.snr_db == data.scenario.snr_db);
    CHECK(back.scenario.condition_number == data.scenario.condition_number);
    CHECK(back.scenario.seed == data.scenario.seed);
    CHECK(back.policy == data.policy);
    CHECK(back.label == data.label);
    REQUIRE(back.instances.size() == data.instances.size());
    for (std::size_t k = 0; k < data.instances.size(); ++k) {
        const Instance& a = data.instances[k];
        const Instance& b = back.instances[k];
        CHECK((b.pilot - a.pilot).cwiseAbs().maxCoeff() == 0.0);
        CHECK((b.channel - a.channel).cwiseAbs().maxCoeff() == 0.0);
        CHECK((b.signal - a.signal).cwiseAbs().maxCoeff() == 0.0);
        CHECK((b.observation - a.observation).cwiseAbs().maxCoeff() == 0.0);
        CHECK(b.activity == a.activity);
        CHECK(b.noise_var == a.noise_var);
    }
}

TEST_CASE("dataset writes are bit identical for identical content") {
    TempDir dir;
    DatasetFile data = small_dataset(13);
    const std::string p1 = dir.file("x.dataset");
    const std::string p2 = dir.file("y.dataset");
    write_dataset(p1, data);
    write_dataset(p2, data);
    CHECK(read_bytes(p1) == read_bytes(p2));
    CHECK(file_content_hash(p1) == file_content_hash(p2));
}

TEST_CASE("the manifest records the content hash of the payload") {
    TempDir dir;
    const std::string path = dir.file("m.dataset");
    write_dataset(path, small_dataset(17));

    const std::string mpath = dataset_manifest_path(path);
    REQUIRE(fs::exists(mpath));
    const std::string manifest = read_bytes(mpath);
    const std::string hash = file_content_hash(path);
    CHECK(manifest.find(hash) != std::string::npos);
    CHECK(manifest.find("\"count\"") != std::string::npos);
}

TEST_CASE("content hash changes when a payload byte flips") {
    TempDir dir;
    const std::string path = dir.file("h.dataset");
    write_dataset(path, small_dataset(19));
    const std::string before = file_content_hash(path);

    std::string bytes = read_bytes(path);
    bytes[bytes.size() / 2] ^= 0x01;
    atomic_write_file(path, bytes);
    CHECK(file_content_hash(path) != before);
    CHECK_THROWS_AS(file_content_hash(dir.file("missing.bin")), IoError);
}

TEST_CASE("truncated and corrupted dataset files are rejected") {
    TempDir dir;
    const std::string path = dir.file("t.dataset");
    write_dataset(path, small_dataset(23));
    const std::string bytes = read_bytes(path);

    const std::string cut = dir.file("cut.dataset");
    atomic_write_file(cut, bytes.substr(0, bytes.size() - 9));
    CHECK_THROWS_AS(read_dataset(cut), IoError);

    const std::string magic = dir.file("magic.dataset");
    std::string wrong = bytes;
    wrong[0] ^= 0xFF;
    atomic_write_file(magic, wrong);
    CHECK_THROWS_AS(read_dataset(magic), IoError);

    const std::string padded = dir.file("pad.dataset");
    atomic_write_file(padded, bytes + "extra");
    CHECK_THROWS_AS(read_dataset(padded), IoError);

    CHECK_THROWS_AS(read_dataset(dir.file("nope.dataset")), IoError);
}

TEST_CASE("write_dataset validates its input") {
    TempDir dir;
    DatasetFile empty;
    CHECK_THROWS_AS(write_dataset(dir.file("e.dataset"), empty), ParamError);

    DatasetFile bad = small_dataset(29);
    bad.instances[2].signal = CVec::Zero(7);
    CHECK_THROWS_AS(write_dataset(dir.file("b.dataset"), bad), ParamError);
}

TEST_CASE("atomic write leaves no temp file behind") {
    TempDir dir;
    const std::string path = dir.file("atom.txt");
    atomic_write_file(path, "payload");
    CHECK(read_bytes(path) == "payload");
    CHECK_FALSE(fs::exists(path + ".tmp"));
    atomic_write_file(path, "replaced");
    CHECK(read_bytes(path) == "replaced");
}

TEST_CASE("checkpoints round trip exactly including loss histories") {
    TempDir dir;
    Checkpoint ck = small_checkpoint();
    const std::string path = dir.file("ck.json");
    write_checkpoint(path, ck);
    Checkpoint back = read_checkpoint(path);

    CHECK(back.format_version == ck.format_version);
    CHECK(back.scenario.n_devices == ck.scenario.n_devices);
    CHECK(back.train.iterations == ck.train.iterations);
    CHECK(back.train.layers == ck.train.layers);
    CHECK(back.best_epoch == ck.best_epoch);
    CHECK(back.best_val_loss == ck.best_val_loss);
    CHECK(back.selected_seed == ck.selected_seed);
    CHECK(back.has_mlp == ck.has_mlp);
    CHECK(back.circuit_text == ck.circuit_text);
    REQUIRE(back.train_loss_history.size() == ck.train_loss_history.size());
    for (std::size_t i = 0; i < ck.train_loss_history.size(); ++i)
        CHECK(back.train_loss_history[i] == ck.train_loss_history[i]);
    REQUIRE(back.params.size() == ck.params.size());
    for (std::size_t t = 0; t < ck.params.size(); ++t) {
        for (auto member : {&DenoiserParams::vqc_s1, &DenoiserParams::vqc_s2}) {
            const VqcParams& a = ck.params[t].*member;
            const VqcParams& b = back.params[t].*member;
            CHECK((b.input_weights - a.input_weights).cwiseAbs().maxCoeff() == 0.0);
            CHECK((b.angles_a - a.angles_a).cwiseAbs().maxCoeff() == 0.0);
            CHECK((b.angles_b - a.angles_b).cwiseAbs().maxCoeff() == 0.0);
            CHECK((b.angles_c - a.angles_c).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("checkpoint doubles survive extreme exponents") {
    TempDir dir;
    Checkpoint ck = small_checkpoint();
    ck.best_val_loss = 1e-308;
    ck.train_loss_history = {1.0 / 3.0, 2.2250738585072014e-308, 1.7976931348623157e308};
    const std::string path = dir.file("ext.json");
    write_checkpoint(path, ck);
    Checkpoint back = read_checkpoint(path);
    CHECK(back.best_val_loss == ck.best_val_loss);
    for (std::size_t i = 0; i < ck.train_loss_history.size(); ++i)
        CHECK(back.train_loss_history[i] == ck.train_loss_history[i]);
}

TEST_CASE("checkpoint with an attached detector round trips") {
    TempDir dir;
    Checkpoint ck = small_checkpoint();
    ck.has_mlp = true;
    RandomStream rng(55);
    ck.mlp = MlpParams::random_init(3, rng);
    const std::string path = dir.file("mlp.json");
    write_checkpoint(path, ck);
    Checkpoint back = read_checkpoint(path);
    REQUIRE(back.has_mlp);
    CHECK((flatten_mlp(back.mlp) - flatten_mlp(ck.mlp)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("broken checkpoints are rejected") {
    TempDir dir;
    CHECK_THROWS_AS(read_checkpoint(dir.file("missing.json")), IoError);

    const std::string garbled = dir.file("garbled.json");
    atomic_write_file(garbled, "{ not json ");
    CHECK_THROWS_AS(read_checkpoint(garbled), IoError);

    const std::string other = dir.file("other.json");
    atomic_write_file(other, "{\"kind\": \"something else\"}");
    CHECK_THROWS_AS(read_checkpoint(other), IoError);

    Checkpoint empty;
    CHECK_THROWS_AS(write_checkpoint(dir.file("e.json"), empty), ParamError);
}

TEST_CASE("format_double round trips exactly") {
    RandomStream rng(77);
    for (int rep = 0; rep < 200; ++rep) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, 40.0 * (rng.uniform() - 0.5));
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.25) == "0.25");
    CHECK(format_double(0.0) == "0");
}

TEST_CASE("csv files have comment, header, and rows in order") {
    TempDir dir;
    const std::string path = dir.file("table.csv");
    write_csv(path, "version=x hash=y", {"iteration", "mse"},
              {{"1", "0.5"}, {"2", "0.25"}});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# version=x hash=y");
    std::getline(in, line);
    CHECK(line == "iteration,mse");
    std::getline(in, line);
    CHECK(line == "1,0.5");
    std::getline(in, line);
    CHECK(line == "2,0.25");
    CHECK_FALSE(std::getline(in, line));

    CHECK_THROWS_AS(write_csv(dir.file("bad.csv"), "c", {"a", "b"}, {{"1"}}), ParamError);
}

TEST_CASE("csv writes are deterministic") {
    TempDir dir;
    const std::string p1 = dir.file("a.csv");
    const std::string p2 = dir.file("b.csv");
    const std::vector<std::vector<std::string>> rows{{format_double(1.0 / 3.0), "x"}};
    write_csv(p1, "c", {"v", "s"}, rows);
    write_csv(p2, "c", {"v", "s"}, rows);
    CHECK(read_bytes(p1) == read_bytes(p2));
}
