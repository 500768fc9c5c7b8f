#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vqccs/common.hpp"
#include "vqccs/vqc_denoiser.hpp"

namespace vqccs {

// Decorrelation matrix flavor of the LE step.
enum class LeVariant { MatchedFilter, PseudoInverse, Lmmse };

std::string le_variant_name(LeVariant v);
LeVariant le_variant_from_name(const std::string& name);

// Per-iteration record of a CS solver run. x_hat^0 = 0 by convention;
// le_estimates[t] and nle_estimates[t] hold l^{t+1} and x_hat^{t+1}.
struct SolverTrajectory {
    std::vector<CVec> le_estimates;
    std::vector<CVec> nle_estimates;
    std::vector<double> residual_mse;  // ||y - A x_hat^t||^2 / M
    std::vector<double> tau2;
    int iterations = 0;
};

// D = N / tr(D_hat A) * D_hat with D_hat per variant.
CMat decorrelation_matrix(const CMat& A, LeVariant variant, double tau2 = 0.0,
                          double sigma2 = 0.0);

// l = x_hat + D (y - A x_hat).
CVec le_step(const CVec& y, const CMat& A, const CVec& x_hat, LeVariant variant,
             double tau2 = 0.0, double sigma2 = 0.0);

struct MmseDenoised {
    CVec x_hat;
    double divergence;  // average of (1/2)(dRe/dRe + dIm/dIm), analytic
};

// Posterior mean under the Bernoulli-Gaussian prior: x_i = 0 w.p. 1-rho,
// x_i ~ CN(0, 1/rho) w.p. rho, observed through CN(0, tau2) noise.
MmseDenoised mmse_denoise(const CVec& l, double tau2, double rho);

// Divergence-free NLE: p_t (eta(l) - div * l) with p_t = 1/(1 - div).
CVec oamp_nle(const CVec& l, double tau2, double rho);

// Test hook: same correction applied to an arbitrary elementwise denoiser.
using DenoiserFn = std::function<MmseDenoised(const CVec&)>;
CVec oamp_nle_with(const CVec& l, const DenoiserFn& denoiser);

// tau2_hat = max((||y - A x_hat||^2 - M sigma^2) / tr(A^H A), 1e-9).
double estimate_tau2(const CVec& y, const CMat& A, const CVec& x_hat, double sigma2);
inline constexpr double kTau2Floor = 1e-9;

// Error variance of l = x_hat + D(y - A x_hat) given the error variance v2 of
// x_hat: (tr(BB^H) v2 + tr(DD^H) sigma2) / N with B = I - DA, floored.
double nle_input_variance(const CMat& A, const CMat& d, double v2, double sigma2);

// eta(u) = max(|u| - s, 0) * u/|u|.
CVec soft_threshold(const CVec& u, double s);

// Proximal gradient for 0.5||y - Ax||^2 + lambda ||x||_1 with step
// 1/lambda_max(A^H A); FISTA adds Nesterov momentum.
SolverTrajectory ista(const CVec& y, const CMat& A, double lambda, int iterations);
SolverTrajectory fista(const CVec& y, const CMat& A, double lambda, int iterations);

// Alternates le_step / oamp_nle with estimate_tau2 each iteration. A candidate
// update is kept only if it does not raise the residual error estimate; a
// rejected correction falls back to the plain posterior mean, and if that
// regresses too the estimate freezes for the remaining iterations.
SolverTrajectory oamp(const CVec& y, const CMat& A, double rho, double sigma2, int iterations,
                      LeVariant variant = LeVariant::PseudoInverse);

struct VqcRunOptions {
    LeVariant variant = LeVariant::PseudoInverse;
    PrepMode prep_mode = PrepMode::PerLayer;
    double sigma2 = 0.0;  // used by the Lmmse variant and tau2 diagnostics
    int shots = 0;        // 0 = exact expectation values
    RandomStream* shot_rng = nullptr;
};

// Algorithm: per iteration LE, state-prep angle, embedding, two VQC
// measurements, scaling denoise. No divergence correction in the NLE.
SolverTrajectory vqc_cs(const CVec& y, const CMat& A, const std::vector<DenoiserParams>& params,
                        int iterations, const VqcRunOptions& options = {});

}  // namespace vqccs
