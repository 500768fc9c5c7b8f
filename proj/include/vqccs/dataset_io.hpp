#pragma once

#include <string>
#include <vector>

#include "vqccs/common.hpp"
#include "vqccs/system_model.hpp"

namespace vqccs {

struct DatasetFile {
    ScenarioConfig scenario;
    PilotPolicy policy = PilotPolicy::Shared;
    std::string label = "data";
    std::vector<Instance> instances;
};

// Binary container: 8-byte magic, u32 JSON header length, JSON header
// (format version, tool version, scenario, policy, label, count), then raw
// little-endian f64 payload per instance. A JSON manifest with the content
// hash is written next to it. Both writes are temp-then-rename.
void write_dataset(const std::string& path, const DatasetFile& data);

DatasetFile read_dataset(const std::string& path);

std::string dataset_manifest_path(const std::string& path);

// fnv1a64 over the raw file bytes, hex encoded. IoError when unreadable.
std::string file_content_hash(const std::string& path);

// Shared atomic write helper: writes to path + ".tmp", then renames.
void atomic_write_file(const std::string& path, const std::string& bytes);

}  // namespace vqccs
