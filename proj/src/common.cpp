#include "vqccs/common.hpp"

#include <array>

namespace vqccs {

std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::array<char, 16> buf{};
    for (int i = 15; i >= 0; --i) {
        buf[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return std::string(buf.data(), buf.size());
}

}  // namespace vqccs
