#pragma once

#include <string>

#include "vqccs/common.hpp"
#include "vqccs/quantum.hpp"
#include "vqccs/rng.hpp"

namespace vqccs {

// Placement of the residual-error R_X state-preparation gate.
enum class PrepMode { PerLayer, FirstLayer, Off };

std::string prep_mode_name(PrepMode mode);
PrepMode prep_mode_from_name(const std::string& name);

// Trainable quantities of one VQC at one CS iteration. input_weights(i, j)
// scales data angle r_j on qubit i; the three N x L banks parameterize the
// trainable Z-Y-Z block of each layer.
struct VqcParams {
    int n = 0;
    int layers = 0;
    RMat input_weights;  // N x N
    RMat angles_a;       // N x L, first R_Z
    RMat angles_b;       // N x L, R_Y
    RMat angles_c;       // N x L, second R_Z

    static VqcParams zeros(int n, int layers);

    // w ~ N(0, (pi/2N)^2), angle banks ~ U(-0.1, 0.1).
    static VqcParams random_init(int n, int layers, RandomStream& rng);

    void validate() const;
    void set_zero();

    std::size_t count() const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 3 * layers);
    }
};

// The two scaling-factor producers of the denoiser.
struct DenoiserParams {
    VqcParams vqc_s1;
    VqcParams vqc_s2;

    static DenoiserParams zeros(int n, int layers);
    static DenoiserParams random_init(int n, int layers, RandomStream& rng);
    void validate() const;
};

// r_i = pi * tanh(|l_i|^2), in [0, pi).
RVec embed(const CVec& l);

// v~^2 = pi * tanh(||y - A x_hat||^2 / N), in [0, pi).
double prep_angle(const CVec& y, const CMat& A, const CVec& x_hat);

// Per-layer gate template: R_X(v~^2) prep, N data gates R_Y(r_j w_{i,j}),
// then the trainable R_Z, R_Y, R_Z block. Layers are concatenated
// (data re-uploading). The circuit binds against the flat layout produced by
// pack_qubit_params and the data vector [r_1..r_N, v~^2].
QubitCircuit build_qubit_circuit(int qubit, const VqcParams& params,
                                 PrepMode mode = PrepMode::PerLayer);

// The gate/binding structure is qubit independent; only the packed slice of
// the parameter banks differs per qubit.
QubitCircuit build_ansatz_circuit(int n, int layers, PrepMode mode);

// Flat layout: [w_{i,1}..w_{i,N}, then per layer (a, b, c)].
RVec pack_qubit_params(const VqcParams& params, int qubit);
void pack_qubit_params(const VqcParams& params, int qubit, RVec& out);

// Adds a packed-gradient slice back onto the matching rows of a
// VqcParams-shaped accumulator.
void scatter_qubit_grad(const RVec& packed_grad, int qubit, VqcParams& accum);

// s_i = (m_i + 1)/2 with m_i the Pauli-Z expectation of qubit i's circuit.
// shots > 0 replaces exact expectations with finite-shot averages.
RVec scaling_factors(const RVec& r, double v2, const VqcParams& params,
                     PrepMode mode = PrepMode::PerLayer, int shots = 0,
                     RandomStream* rng = nullptr);

// x_hat_i = s1_i / (1 + s2_i) * l_i.
CVec denoise(const CVec& l, const RVec& s1, const RVec& s2);

}  // namespace vqccs
