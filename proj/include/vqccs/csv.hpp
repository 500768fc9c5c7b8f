#pragma once

#include <string>
#include <vector>

#include "vqccs/common.hpp"

namespace vqccs {

// Shortest decimal string that round-trips the exact double.
std::string format_double(double v);

// Comma-separated file: one '#' comment line (tool version + config hash),
// a header row, then data rows. Temp-then-rename.
void write_csv(const std::string& path, const std::string& comment,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace vqccs
