#pragma once

#include <span>
#include <string>
#include <vector>

#include "vqccs/common.hpp"
#include "vqccs/rng.hpp"

namespace vqccs {

enum class Axis { X, Y, Z };

// Single-qubit amplitudes over the computational basis.
struct QubitState {
    cplx amp0{1.0, 0.0};
    cplx amp1{0.0, 0.0};

    double norm_sq() const { return std::norm(amp0) + std::norm(amp1); }
};

struct RotationGate {
    Axis axis = Axis::Y;
    double angle = 0.0;
};

// Half-angle convention:
//   R_X = [[cos(a/2), -i sin(a/2)], [-i sin(a/2), cos(a/2)]]
//   R_Y = [[cos(a/2), -sin(a/2)],   [sin(a/2),    cos(a/2)]]
//   R_Z = diag(e^{-i a/2}, e^{i a/2})
Eigen::Matrix2cd rotation_matrix(Axis axis, double angle);
inline Eigen::Matrix2cd rotation_matrix(const RotationGate& g) {
    return rotation_matrix(g.axis, g.angle);
}

Eigen::Matrix2cd pauli(Axis axis);

QubitState apply(const QubitState& state, const RotationGate& gate);

// <Z> = |amp0|^2 - |amp1|^2, clamped into [-1, 1].
double expect_z(const QubitState& state);

// Empirical <Z> from `shots` Bernoulli draws on the Z-basis probabilities.
double sample_expect_z(const QubitState& state, int shots, RandomStream& rng);

// How a gate's angle is resolved at run time.
struct GateBinding {
    enum class Kind { Fixed, Param, Data, DataTimesParam };

    Kind kind = Kind::Fixed;
    double fixed_angle = 0.0;
    int param_index = -1;
    int data_index = -1;

    static GateBinding fixed(double angle) { return {Kind::Fixed, angle, -1, -1}; }
    static GateBinding param(int p) { return {Kind::Param, 0.0, p, -1}; }
    static GateBinding data(int d) { return {Kind::Data, 0.0, -1, d}; }
    static GateBinding data_times_param(int d, int p) {
        return {Kind::DataTimesParam, 0.0, p, d};
    }
};

struct BoundGate {
    Axis axis = Axis::Y;
    GateBinding binding;
};

// Ordered gate list evaluated left to right from |0>.
struct QubitCircuit {
    std::vector<BoundGate> gates;
    int n_params = 0;
    int n_data = 0;

    // ConfigError when a binding index falls outside [0, n_params) / [0, n_data).
    void validate() const;
};

double resolve_angle(const BoundGate& gate, std::span<const double> params,
                     std::span<const double> data);

QubitState run_circuit_state(const QubitCircuit& circuit, std::span<const double> params,
                             std::span<const double> data);

double run_circuit(const QubitCircuit& circuit, std::span<const double> params,
                   std::span<const double> data);

struct CircuitGradient {
    double expectation = 0.0;
    RVec d_params;
    RVec d_data;
};

// Exact gradient of <Z> w.r.t. every parameter and data entry via the adjoint
// sweep through the 2x2 gate chain. Multi-occurrence bindings accumulate.
CircuitGradient run_circuit_grad(const QubitCircuit& circuit, std::span<const double> params,
                                 std::span<const double> data);
void run_circuit_grad(const QubitCircuit& circuit, std::span<const double> params,
                      std::span<const double> data, CircuitGradient& out);

// d<Z>/d(params[param_index]) via (E(a + pi/2) - E(a - pi/2)) / 2 per bound
// gate, with the data chain factor for data-weighted bindings.
double param_shift_grad(const QubitCircuit& circuit, std::span<const double> params,
                        std::span<const double> data, int param_index);

// Structured-text round trip for checkpoint files.
std::string circuit_to_text(const QubitCircuit& circuit);
QubitCircuit circuit_from_text(const std::string& text);

}  // namespace vqccs
