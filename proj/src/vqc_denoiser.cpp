#include "vqccs/vqc_denoiser.hpp"

#include <cmath>

namespace vqccs {

std::string prep_mode_name(PrepMode mode) {
    switch (mode) {
        case PrepMode::PerLayer: return "per_layer";
        case PrepMode::FirstLayer: return "first_layer";
        case PrepMode::Off: return "off";
    }
    return "?";
}

PrepMode prep_mode_from_name(const std::string& name) {
    if (name == "per_layer") return PrepMode::PerLayer;
    if (name == "first_layer") return PrepMode::FirstLayer;
    if (name == "off") return PrepMode::Off;
    throw ConfigError("unknown prep mode: " + name);
}

VqcParams VqcParams::zeros(int n, int layers) {
    if (n <= 0 || layers <= 0) throw ParamError("VqcParams: n and layers must be positive");
    VqcParams p;
    p.n = n;
    p.layers = layers;
    p.input_weights = RMat::Zero(n, n);
    p.angles_a = RMat::Zero(n, layers);
    p.angles_b = RMat::Zero(n, layers);
    p.angles_c = RMat::Zero(n, layers);
    return p;
}

VqcParams VqcParams::random_init(int n, int layers, RandomStream& rng) {
    VqcParams p = zeros(n, layers);
    double sigma = kPi / (2.0 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p.input_weights(i, j) = sigma * rng.normal();
    auto fill_bank = [&](RMat& bank) {
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < layers; ++l) bank(i, l) = 0.2 * rng.uniform() - 0.1;
    };
    fill_bank(p.angles_a);
    fill_bank(p.angles_b);
    fill_bank(p.angles_c);
    return p;
}

void VqcParams::validate() const {
    if (n <= 0 || layers <= 0) throw ParamError("VqcParams: uninitialized shapes");
    if (input_weights.rows() != n || input_weights.cols() != n)
        throw ParamError("VqcParams: input_weights shape mismatch");
    auto check_bank = [&](const RMat& bank, const char* name) {
        if (bank.rows() != n || bank.cols() != layers)
            throw ParamError(std::string("VqcParams: ") + name + " shape mismatch");
        if (!bank.allFinite()) throw ParamError(std::string("VqcParams: ") + name + " not finite");
    };
    if (!input_weights.allFinite()) throw ParamError("VqcParams: input_weights not finite");
    check_bank(angles_a, "angles_a");
    check_bank(angles_b, "angles_b");
    check_bank(angles_c, "angles_c");
}

void VqcParams::set_zero() {
    input_weights.setZero();
    angles_a.setZero();
    angles_b.setZero();
    angles_c.setZero();
}

DenoiserParams DenoiserParams::zeros(int n, int layers) {
    return {VqcParams::zeros(n, layers), VqcParams::zeros(n, layers)};
}

DenoiserParams DenoiserParams::random_init(int n, int layers, RandomStream& rng) {
    DenoiserParams p;
    p.vqc_s1 = VqcParams::random_init(n, layers, rng);
    p.vqc_s2 = VqcParams::random_init(n, layers, rng);
    return p;
}

void DenoiserParams::validate() const {
    vqc_s1.validate();
    vqc_s2.validate();
    if (vqc_s1.n != vqc_s2.n || vqc_s1.layers != vqc_s2.layers)
        throw ParamError("DenoiserParams: the two VQCs must share (N, L)");
}

RVec embed(const CVec& l) {
    RVec r(l.size());
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        r[i] = kPi * std::tanh(std::norm(l[i]));
    }
    return r;
}

double prep_angle(const CVec& y, const CMat& A, const CVec& x_hat) {
    if (A.rows() != y.size() || A.cols() != x_hat.size())
        throw ParamError("prep_angle: dimension mismatch");
    double err = (y - A * x_hat).squaredNorm() / static_cast<double>(A.cols());
    return kPi * std::tanh(err);
}

QubitCircuit build_ansatz_circuit(int n, int layers, PrepMode mode) {
    QubitCircuit circuit;
    circuit.n_params = n + 3 * layers;
    circuit.n_data = n + 1;
    for (int l = 0; l < layers; ++l) {
        bool with_prep = mode == PrepMode::PerLayer || (mode == PrepMode::FirstLayer && l == 0);
        if (with_prep) circuit.gates.push_back({Axis::X, GateBinding::data(n)});
        for (int j = 0; j < n; ++j) {
            circuit.gates.push_back({Axis::Y, GateBinding::data_times_param(j, j)});
        }
        circuit.gates.push_back({Axis::Z, GateBinding::param(n + 3 * l)});
        circuit.gates.push_back({Axis::Y, GateBinding::param(n + 3 * l + 1)});
        circuit.gates.push_back({Axis::Z, GateBinding::param(n + 3 * l + 2)});
    }
    return circuit;
}

QubitCircuit build_qubit_circuit(int qubit, const VqcParams& params, PrepMode mode) {
    params.validate();
    if (qubit < 0 || qubit >= params.n) throw ParamError("build_qubit_circuit: qubit out of range");
    return build_ansatz_circuit(params.n, params.layers, mode);
}

void pack_qubit_params(const VqcParams& params, int qubit, RVec& out) {
    const int n = params.n;
    const int layers = params.layers;
    out.resize(n + 3 * layers);
    for (int j = 0; j < n; ++j) out[j] = params.input_weights(qubit, j);
    for (int l = 0; l < layers; ++l) {
        out[n + 3 * l] = params.angles_a(qubit, l);
        out[n + 3 * l + 1] = params.angles_b(qubit, l);
        out[n + 3 * l + 2] = params.angles_c(qubit, l);
    }
}

RVec pack_qubit_params(const VqcParams& params, int qubit) {
    RVec out;
    pack_qubit_params(params, qubit, out);
    return out;
}

void scatter_qubit_grad(const RVec& packed_grad, int qubit, VqcParams& accum) {
    const int n = accum.n;
    const int layers = accum.layers;
    if (packed_grad.size() != n + 3 * layers)
        throw ParamError("scatter_qubit_grad: packed size mismatch");
    for (int j = 0; j < n; ++j) accum.input_weights(qubit, j) += packed_grad[j];
    for (int l = 0; l < layers; ++l) {
        accum.angles_a(qubit, l) += packed_grad[n + 3 * l];
        accum.angles_b(qubit, l) += packed_grad[n + 3 * l + 1];
        accum.angles_c(qubit, l) += packed_grad[n + 3 * l + 2];
    }
}

RVec scaling_factors(const RVec& r, double v2, const VqcParams& params, PrepMode mode, int shots,
                     RandomStream* rng) {
    params.validate();
    if (r.size() != params.n) throw ParamError("scaling_factors: embedded vector length mismatch");
    QubitCircuit circuit = build_ansatz_circuit(params.n, params.layers, mode);

    RVec data(params.n + 1);
    data.head(params.n) = r;
    data[params.n] = v2;

    RVec s(params.n);
    RVec packed;
    for (int i = 0; i < params.n; ++i) {
        pack_qubit_params(params, i, packed);
        double m;
        if (shots > 0) {
            if (rng == nullptr) throw ParamError("scaling_factors: shots > 0 requires an rng");
            QubitState state = run_circuit_state(
                circuit, {packed.data(), static_cast<std::size_t>(packed.size())},
                {data.data(), static_cast<std::size_t>(data.size())});
            m = sample_expect_z(state, shots, *rng);
        } else {
            m = run_circuit(circuit, {packed.data(), static_cast<std::size_t>(packed.size())},
                            {data.data(), static_cast<std::size_t>(data.size())});
        }
        s[i] = 0.5 * (m + 1.0);
    }
    return s;
}

CVec denoise(const CVec& l, const RVec& s1, const RVec& s2) {
    if (s1.size() != l.size() || s2.size() != l.size())
        throw ParamError("denoise: length mismatch");
    CVec out(l.size());
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        out[i] = s1[i] / (1.0 + s2[i]) * l[i];
    }
    return out;
}

}  // namespace vqccs
