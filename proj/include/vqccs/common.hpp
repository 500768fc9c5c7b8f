#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace vqccs {

inline constexpr const char* kToolVersion = "vqccs 1.0.0";
inline constexpr double kPi = 3.14159265358979323846;

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

// Invalid argument ranges (rates, correlations, dimensions).
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed configuration files or unresolved circuit bindings.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rank-deficient operator where an inverse is required.
struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Divergence-corrected denoiser hit unit average derivative.
struct DegenerateDenoiserError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values encountered mid-computation.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric requested on data where it has no definition (e.g. ROC with a
// single class).
struct UndefinedMetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t state = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        state ^= p[i];
        state *= 0x100000001b3ull;
    }
    return state;
}

std::string to_hex(std::uint64_t value);

}  // namespace vqccs
