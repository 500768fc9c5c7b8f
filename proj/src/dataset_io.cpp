#include "vqccs/dataset_io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vqccs/config.hpp"

namespace vqccs {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'V', 'Q', 'C', 'C', 'S', 'D', 'S', '1'};
constexpr int kFormatVersion = 1;

void append_f64(std::string& out, double v) {
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof(double));
    out.append(buf, sizeof(double));
}

void append_cvec(std::string& out, const CVec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        append_f64(out, v[i].real());
        append_f64(out, v[i].imag());
    }
}

class Reader {
public:
    Reader(const std::string& bytes, const std::string& path)
        : bytes_(bytes), path_(path) {}

    double f64() {
        if (pos_ + sizeof(double) > bytes_.size())
            throw IoError("dataset file truncated: " + path_);
        double v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(double));
        pos_ += sizeof(double);
        return v;
    }

    cplx c64() {
        double re = f64();
        double im = f64();
        return {re, im};
    }

    CVec cvec(Eigen::Index n) {
        CVec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = c64();
        return v;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

    std::size_t pos_ = 0;

private:
    const std::string& bytes_;
    const std::string& path_;
};

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) throw IoError("read failure: " + path);
    return bytes;
}

}  // namespace

void atomic_write_file(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out.good()) throw IoError("write failure: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path + ": " + ec.message());
}

std::string dataset_manifest_path(const std::string& path) { return path + ".manifest.json"; }

std::string file_content_hash(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    return to_hex(fnv1a64(bytes.data(), bytes.size()));
}

void write_dataset(const std::string& path, const DatasetFile& data) {
    if (data.instances.empty()) throw ParamError("write_dataset: no instances");
    const auto& first = data.instances.front();
    const Eigen::Index m = first.pilot.rows();
    const Eigen::Index n = first.pilot.cols();

    json header{{"format_version", kFormatVersion},
                {"tool_version", kToolVersion},
                {"scenario", scenario_to_json(data.scenario)},
                {"pilot_policy", pilot_policy_name(data.policy)},
                {"label", data.label},
                {"count", data.instances.size()}};
    std::string header_text = header.dump();

    std::string bytes;
    bytes.reserve(16 + header_text.size() +
                  data.instances.size() * static_cast<std::size_t>(2 * m * n + 5 * n + 2 * m + 1) *
                      sizeof(double));
    bytes.append(kMagic, sizeof(kMagic));
    auto header_len = static_cast<std::uint32_t>(header_text.size());
    char len_buf[4];
    std::memcpy(len_buf, &header_len, 4);
    bytes.append(len_buf, 4);
    bytes += header_text;

    for (const Instance& inst : data.instances) {
        if (inst.pilot.rows() != m || inst.pilot.cols() != n || inst.activity.size() != n ||
            inst.channel.size() != n || inst.signal.size() != n || inst.observation.size() != m)
            throw ParamError("write_dataset: inconsistent instance shapes");
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index k = 0; k < n; ++k) {
                append_f64(bytes, inst.pilot(i, k).real());
                append_f64(bytes, inst.pilot(i, k).imag());
            }
        }
        for (Eigen::Index i = 0; i < n; ++i)
            append_f64(bytes, static_cast<double>(inst.activity[i]));
        append_cvec(bytes, inst.channel);
        append_cvec(bytes, inst.signal);
        append_cvec(bytes, inst.observation);
        append_f64(bytes, inst.noise_var);
    }

    atomic_write_file(path, bytes);

    json manifest{{"format", "vqccs-dataset"},
                  {"format_version", kFormatVersion},
                  {"tool_version", kToolVersion},
                  {"content_hash", to_hex(fnv1a64(bytes.data(), bytes.size()))},
                  {"count", data.instances.size()},
                  {"pilot_policy", pilot_policy_name(data.policy)},
                  {"label", data.label},
                  {"scenario", scenario_to_json(data.scenario)}};
    atomic_write_file(dataset_manifest_path(path), manifest.dump(2) + "\n");
}

DatasetFile read_dataset(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    if (bytes.size() < sizeof(kMagic) + 4 ||
        std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw IoError("not a dataset file: " + path);
    }
    std::uint32_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + sizeof(kMagic), 4);
    if (bytes.size() < sizeof(kMagic) + 4 + header_len)
        throw IoError("dataset header truncated: " + path);
    json header;
    try {
        header = json::parse(bytes.substr(sizeof(kMagic) + 4, header_len));
    } catch (const json::exception& e) {
        throw IoError("dataset header unparseable in " + path + ": " + e.what());
    }
    if (header.at("format_version").get<int>() != kFormatVersion)
        throw IoError("unsupported dataset format version in " + path);

    DatasetFile data;
    data.scenario = scenario_from_json(header.at("scenario"));
    data.policy = pilot_policy_from_name(header.at("pilot_policy").get<std::string>());
    data.label = header.at("label").get<std::string>();
    const auto count = header.at("count").get<std::size_t>();
    const Eigen::Index n = data.scenario.n_devices;
    const Eigen::Index m = data.scenario.n_measurements;

    Reader r(bytes, path);
    r.pos_ = sizeof(kMagic) + 4 + header_len;
    data.instances.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        Instance& inst = data.instances[k];
        inst.pilot.resize(m, n);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index c = 0; c < n; ++c) inst.pilot(i, c) = r.c64();
        inst.activity.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) inst.activity[i] = static_cast<int>(r.f64());
        inst.channel = r.cvec(n);
        inst.signal = r.cvec(n);
        inst.observation = r.cvec(m);
        inst.noise_var = r.f64();
    }
    if (!r.at_end()) throw IoError("dataset has trailing bytes: " + path);
    return data;
}

}  // namespace vqccs
