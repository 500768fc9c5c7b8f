#include "vqccs/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vqccs {

namespace {

constexpr cplx kI{0.0, 1.0};

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::X: return "RX";
        case Axis::Y: return "RY";
        case Axis::Z: return "RZ";
    }
    return "?";
}

}  // namespace

Eigen::Matrix2cd rotation_matrix(Axis axis, double angle) {
    if (!std::isfinite(angle)) throw ParamError("rotation_matrix: angle must be finite");
    double c = std::cos(angle * 0.5);
    double s = std::sin(angle * 0.5);
    Eigen::Matrix2cd u;
    switch (axis) {
        case Axis::X:
            u << cplx(c, 0), cplx(0, -s), cplx(0, -s), cplx(c, 0);
            break;
        case Axis::Y:
            u << cplx(c, 0), cplx(-s, 0), cplx(s, 0), cplx(c, 0);
            break;
        case Axis::Z:
            u << cplx(c, -s), cplx(0, 0), cplx(0, 0), cplx(c, s);
            break;
    }
    return u;
}

Eigen::Matrix2cd pauli(Axis axis) {
    Eigen::Matrix2cd p;
    switch (axis) {
        case Axis::X: p << 0, 1, 1, 0; break;
        case Axis::Y: p << 0, -kI, kI, 0; break;
        case Axis::Z: p << 1, 0, 0, -1; break;
    }
    return p;
}

QubitState apply(const QubitState& state, const RotationGate& gate) {
    double c = std::cos(gate.angle * 0.5);
    double s = std::sin(gate.angle * 0.5);
    QubitState out;
    switch (gate.axis) {
        case Axis::X:
            out.amp0 = c * state.amp0 - kI * (s * state.amp1);
            out.amp1 = -kI * (s * state.amp0) + c * state.amp1;
            break;
        case Axis::Y:
            out.amp0 = c * state.amp0 - s * state.amp1;
            out.amp1 = s * state.amp0 + c * state.amp1;
            break;
        case Axis::Z:
            out.amp0 = cplx(c, -s) * state.amp0;
            out.amp1 = cplx(c, s) * state.amp1;
            break;
    }
    return out;
}

double expect_z(const QubitState& state) {
    double v = std::norm(state.amp0) - std::norm(state.amp1);
    return std::clamp(v, -1.0, 1.0);
}

double sample_expect_z(const QubitState& state, int shots, RandomStream& rng) {
    if (shots <= 0) return expect_z(state);
    double p0 = std::clamp(std::norm(state.amp0), 0.0, 1.0);
    long long ups = 0;
    for (int k = 0; k < shots; ++k) {
        if (rng.uniform() < p0) ++ups;
    }
    return (2.0 * static_cast<double>(ups) - shots) / static_cast<double>(shots);
}

void QubitCircuit::validate() const {
    for (std::size_t k = 0; k < gates.size(); ++k) {
        const GateBinding& b = gates[k].binding;
        bool needs_param = b.kind == GateBinding::Kind::Param ||
                           b.kind == GateBinding::Kind::DataTimesParam;
        bool needs_data = b.kind == GateBinding::Kind::Data ||
                          b.kind == GateBinding::Kind::DataTimesParam;
        if (needs_param && (b.param_index < 0 || b.param_index >= n_params)) {
            throw ConfigError("circuit gate " + std::to_string(k) +
                              ": parameter index out of range");
        }
        if (needs_data && (b.data_index < 0 || b.data_index >= n_data)) {
            throw ConfigError("circuit gate " + std::to_string(k) + ": data index out of range");
        }
    }
}

double resolve_angle(const BoundGate& gate, std::span<const double> params,
                     std::span<const double> data) {
    const GateBinding& b = gate.binding;
    switch (b.kind) {
        case GateBinding::Kind::Fixed:
            return b.fixed_angle;
        case GateBinding::Kind::Param:
            if (b.param_index < 0 || std::size_t(b.param_index) >= params.size())
                throw ConfigError("unresolved parameter binding");
            return params[std::size_t(b.param_index)];
        case GateBinding::Kind::Data:
            if (b.data_index < 0 || std::size_t(b.data_index) >= data.size())
                throw ConfigError("unresolved data binding");
            return data[std::size_t(b.data_index)];
        case GateBinding::Kind::DataTimesParam:
            if (b.param_index < 0 || std::size_t(b.param_index) >= params.size() ||
                b.data_index < 0 || std::size_t(b.data_index) >= data.size())
                throw ConfigError("unresolved data-weighted binding");
            return data[std::size_t(b.data_index)] * params[std::size_t(b.param_index)];
    }
    throw ConfigError("unknown binding kind");
}

QubitState run_circuit_state(const QubitCircuit& circuit, std::span<const double> params,
                             std::span<const double> data) {
    QubitState state;
    for (const BoundGate& g : circuit.gates) {
        state = apply(state, RotationGate{g.axis, resolve_angle(g, params, data)});
    }
    return state;
}

double run_circuit(const QubitCircuit& circuit, std::span<const double> params,
                   std::span<const double> data) {
    return expect_z(run_circuit_state(circuit, params, data));
}

void run_circuit_grad(const QubitCircuit& circuit, std::span<const double> params,
                      std::span<const double> data, CircuitGradient& out) {
    const std::size_t n_gates = circuit.gates.size();
    if (out.d_params.size() != circuit.n_params) out.d_params.resize(circuit.n_params);
    if (out.d_data.size() != circuit.n_data) out.d_data.resize(circuit.n_data);
    out.d_params.setZero();
    out.d_data.setZero();

    thread_local std::vector<Eigen::Vector2cd> states;
    thread_local std::vector<double> half_cos, half_sin;
    states.resize(n_gates + 1);
    half_cos.resize(n_gates);
    half_sin.resize(n_gates);

    states[0] << cplx(1, 0), cplx(0, 0);
    for (std::size_t k = 0; k < n_gates; ++k) {
        const BoundGate& g = circuit.gates[k];
        double angle = resolve_angle(g, params, data);
        double c = std::cos(angle * 0.5);
        double s = std::sin(angle * 0.5);
        half_cos[k] = c;
        half_sin[k] = s;
        const Eigen::Vector2cd& in = states[k];
        Eigen::Vector2cd& outv = states[k + 1];
        switch (g.axis) {
            case Axis::X:
                outv[0] = c * in[0] - kI * (s * in[1]);
                outv[1] = -kI * (s * in[0]) + c * in[1];
                break;
            case Axis::Y:
                outv[0] = c * in[0] - s * in[1];
                outv[1] = s * in[0] + c * in[1];
                break;
            case Axis::Z:
                outv[0] = cplx(c, -s) * in[0];
                outv[1] = cplx(c, s) * in[1];
                break;
        }
    }

    const Eigen::Vector2cd& final_state = states[n_gates];
    out.expectation = std::clamp(std::norm(final_state[0]) - std::norm(final_state[1]), -1.0, 1.0);

    // lambda_k = U_{k+1}^H .. U_G^H Z psi_G; then
    // d<Z>/d(angle_k) = 2 Re(lambda_k^H dU_k psi_{k-1}) with dU = -(i/2) P U.
    Eigen::Vector2cd lambda;
    lambda[0] = final_state[0];
    lambda[1] = -final_state[1];
    for (std::size_t k = n_gates; k-- > 0;) {
        const BoundGate& g = circuit.gates[k];
        double c = half_cos[k];
        double s = half_sin[k];

        Eigen::Vector2cd dpsi;  // dU * psi_{k-1}
        switch (g.axis) {
            case Axis::X: {
                // dU = -(i/2) X U; X U psi = swap of U psi
                Eigen::Vector2cd upsi = states[k + 1];
                dpsi[0] = -0.5 * kI * upsi[1];
                dpsi[1] = -0.5 * kI * upsi[0];
                break;
            }
            case Axis::Y: {
                Eigen::Vector2cd upsi = states[k + 1];
                dpsi[0] = -0.5 * upsi[1];
                dpsi[1] = 0.5 * upsi[0];
                break;
            }
            case Axis::Z: {
                Eigen::Vector2cd upsi = states[k + 1];
                dpsi[0] = -0.5 * kI * upsi[0];
                dpsi[1] = 0.5 * kI * upsi[1];
                break;
            }
        }
        double dangle = 2.0 * (lambda.dot(dpsi)).real();  // dot() conjugates lambda

        const GateBinding& b = g.binding;
        switch (b.kind) {
            case GateBinding::Kind::Fixed:
                break;
            case GateBinding::Kind::Param:
                out.d_params[b.param_index] += dangle;
                break;
            case GateBinding::Kind::Data:
                out.d_data[b.data_index] += dangle;
                break;
            case GateBinding::Kind::DataTimesParam:
                out.d_params[b.param_index] += data[std::size_t(b.data_index)] * dangle;
                out.d_data[b.data_index] += params[std::size_t(b.param_index)] * dangle;
                break;
        }

        // lambda_{k-1} = U_k^H lambda_k
        Eigen::Vector2cd next;
        switch (g.axis) {
            case Axis::X:
                next[0] = c * lambda[0] + kI * (s * lambda[1]);
                next[1] = kI * (s * lambda[0]) + c * lambda[1];
                break;
            case Axis::Y:
                next[0] = c * lambda[0] + s * lambda[1];
                next[1] = -s * lambda[0] + c * lambda[1];
                break;
            case Axis::Z:
                next[0] = cplx(c, s) * lambda[0];
                next[1] = cplx(c, -s) * lambda[1];
                break;
        }
        lambda = next;
    }
}

CircuitGradient run_circuit_grad(const QubitCircuit& circuit, std::span<const double> params,
                                 std::span<const double> data) {
    CircuitGradient out;
    run_circuit_grad(circuit, params, data, out);
    return out;
}

namespace {

// Evaluates <Z> with a single gate's resolved angle offset by delta.
double run_with_shift(const QubitCircuit& circuit, std::span<const double> params,
                      std::span<const double> data, std::size_t gate_index, double delta) {
    QubitState state;
    for (std::size_t k = 0; k < circuit.gates.size(); ++k) {
        const BoundGate& g = circuit.gates[k];
        double angle = resolve_angle(g, params, data);
        if (k == gate_index) angle += delta;
        state = apply(state, RotationGate{g.axis, angle});
    }
    return expect_z(state);
}

}  // namespace

double param_shift_grad(const QubitCircuit& circuit, std::span<const double> params,
                        std::span<const double> data, int param_index) {
    if (param_index < 0 || param_index >= circuit.n_params) {
        throw ConfigError("param_shift_grad: parameter index not bound in this circuit");
    }
    double grad = 0.0;
    for (std::size_t k = 0; k < circuit.gates.size(); ++k) {
        const GateBinding& b = circuit.gates[k].binding;
        double chain = 0.0;
        if (b.kind == GateBinding::Kind::Param && b.param_index == param_index) {
            chain = 1.0;
        } else if (b.kind == GateBinding::Kind::DataTimesParam && b.param_index == param_index) {
            chain = data[std::size_t(b.data_index)];
        } else {
            continue;
        }
        double plus = run_with_shift(circuit, params, data, k, kPi / 2);
        double minus = run_with_shift(circuit, params, data, k, -kPi / 2);
        grad += chain * 0.5 * (plus - minus);
    }
    return grad;
}

std::string circuit_to_text(const QubitCircuit& circuit) {
    std::ostringstream os;
    os.precision(17);
    os << "qubit-circuit v1 params=" << circuit.n_params << " data=" << circuit.n_data
       << " gates=" << circuit.gates.size() << "\n";
    for (const BoundGate& g : circuit.gates) {
        os << axis_name(g.axis) << " ";
        switch (g.binding.kind) {
            case GateBinding::Kind::Fixed:
                os << "fixed " << g.binding.fixed_angle;
                break;
            case GateBinding::Kind::Param:
                os << "param " << g.binding.param_index;
                break;
            case GateBinding::Kind::Data:
                os << "data " << g.binding.data_index;
                break;
            case GateBinding::Kind::DataTimesParam:
                os << "data*param " << g.binding.data_index << " " << g.binding.param_index;
                break;
        }
        os << "\n";
    }
    return os.str();
}

QubitCircuit circuit_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string tag, version;
    is >> tag >> version;
    if (tag != "qubit-circuit" || version != "v1") {
        throw ConfigError("circuit_from_text: unrecognized header");
    }
    QubitCircuit circuit;
    std::size_t n_gates = 0;
    std::string field;
    while (is >> field) {
        if (field.rfind("params=", 0) == 0) {
            circuit.n_params = std::stoi(field.substr(7));
        } else if (field.rfind("data=", 0) == 0) {
            circuit.n_data = std::stoi(field.substr(5));
        } else if (field.rfind("gates=", 0) == 0) {
            n_gates = std::stoul(field.substr(6));
            break;
        } else {
            throw ConfigError("circuit_from_text: unexpected header field " + field);
        }
    }
    for (std::size_t k = 0; k < n_gates; ++k) {
        std::string axis, kind;
        if (!(is >> axis >> kind)) throw ConfigError("circuit_from_text: truncated gate list");
        BoundGate g;
        if (axis == "RX") g.axis = Axis::X;
        else if (axis == "RY") g.axis = Axis::Y;
        else if (axis == "RZ") g.axis = Axis::Z;
        else throw ConfigError("circuit_from_text: unknown axis " + axis);
        if (kind == "fixed") {
            double a;
            is >> a;
            g.binding = GateBinding::fixed(a);
        } else if (kind == "param") {
            int p;
            is >> p;
            g.binding = GateBinding::param(p);
        } else if (kind == "data") {
            int d;
            is >> d;
            g.binding = GateBinding::data(d);
        } else if (kind == "data*param") {
            int d, p;
            is >> d >> p;
            g.binding = GateBinding::data_times_param(d, p);
        } else {
            throw ConfigError("circuit_from_text: unknown binding kind " + kind);
        }
        circuit.gates.push_back(g);
    }
    circuit.validate();
    return circuit;
}

}  // namespace vqccs
