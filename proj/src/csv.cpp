#include "vqccs/csv.hpp"

#include <charconv>
#include <cmath>

#include "vqccs/dataset_io.hpp"

namespace vqccs {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw NumericalError("format_double: conversion failed");
    return {buf, ptr};
}

void write_csv(const std::string& path, const std::string& comment,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    out += "# " + comment + "\n";
    auto append_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    append_row(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ParamError("write_csv: row width differs from header");
        append_row(row);
    }
    atomic_write_file(path, out);
}

}  // namespace vqccs
