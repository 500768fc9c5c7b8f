#include "vqccs/cs_solvers.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace vqccs {

std::string le_variant_name(LeVariant v) {
    switch (v) {
        case LeVariant::MatchedFilter: return "mf";
        case LeVariant::PseudoInverse: return "pinv";
        case LeVariant::Lmmse: return "lmmse";
    }
    return "?";
}

LeVariant le_variant_from_name(const std::string& name) {
    if (name == "mf") return LeVariant::MatchedFilter;
    if (name == "pinv") return LeVariant::PseudoInverse;
    if (name == "lmmse") return LeVariant::Lmmse;
    throw ConfigError("unknown LE variant: " + name);
}

namespace {

// tr(D_hat A) for D_hat (N x M) and A (M x N).
double trace_of_product(const CMat& d_hat, const CMat& A) {
    return d_hat.cwiseProduct(A.transpose()).sum().real();
}

CMat raw_decorrelation(const CMat& A, LeVariant variant, double tau2, double sigma2) {
    const auto m = A.rows();
    switch (variant) {
        case LeVariant::MatchedFilter:
            return A.adjoint();
        case LeVariant::PseudoInverse: {
            CMat gram = A * A.adjoint();
            Eigen::FullPivLU<CMat> lu(gram);
            if (!lu.isInvertible()) {
                throw SingularityError("pseudo-inverse LE: pilot is rank deficient");
            }
            return A.adjoint() * lu.inverse();
        }
        case LeVariant::Lmmse: {
            if (!(tau2 > 0.0)) throw ParamError("LMMSE LE requires tau2 > 0");
            CMat gram = tau2 * (A * A.adjoint());
            gram += sigma2 * CMat::Identity(m, m);
            Eigen::FullPivLU<CMat> lu(gram);
            if (!lu.isInvertible()) {
                throw SingularityError("LMMSE LE: regularized Gram matrix singular");
            }
            return tau2 * (A.adjoint() * lu.inverse());
        }
    }
    throw ParamError("unknown LE variant");
}

}  // namespace

CMat decorrelation_matrix(const CMat& A, LeVariant variant, double tau2, double sigma2) {
    CMat d_hat = raw_decorrelation(A, variant, tau2, sigma2);
    double tr = trace_of_product(d_hat, A);
    if (std::abs(tr) < 1e-300) throw SingularityError("LE trace normalization degenerate");
    return (static_cast<double>(A.cols()) / tr) * d_hat;
}

CVec le_step(const CVec& y, const CMat& A, const CVec& x_hat, LeVariant variant, double tau2,
             double sigma2) {
    if (A.rows() != y.size() || A.cols() != x_hat.size())
        throw ParamError("le_step: dimension mismatch");
    CMat d = decorrelation_matrix(A, variant, tau2, sigma2);
    return x_hat + d * (y - A * x_hat);
}

MmseDenoised mmse_denoise(const CVec& l, double tau2, double rho) {
    if (!(tau2 > 0.0)) throw ParamError("mmse_denoise: tau2 must be positive");
    if (!(rho > 0.0 && rho <= 1.0)) throw ParamError("mmse_denoise: rho must lie in (0, 1]");

    const double sig_x2 = 1.0 / rho;
    const double wiener = sig_x2 / (sig_x2 + tau2);
    const double beta = sig_x2 / (tau2 * (sig_x2 + tau2));
    const bool degenerate_prior = rho == 1.0;
    // pi_i = sigmoid(beta |l_i|^2 - log K), K = ((1-rho)/rho) (sig_x2+tau2)/tau2
    const double log_k = degenerate_prior
                             ? 0.0
                             : std::log((1.0 - rho) / rho) + std::log((sig_x2 + tau2) / tau2);

    MmseDenoised out;
    out.x_hat.resize(l.size());
    double div_sum = 0.0;
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        double m = std::norm(l[i]);
        double pi;
        if (degenerate_prior) {
            pi = 1.0;
        } else {
            double t = beta * m - log_k;
            pi = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
        }
        out.x_hat[i] = pi * wiener * l[i];
        // d x_hat_i / d l_i in the Wirtinger sense, averaged later.
        div_sum += wiener * (pi + beta * m * pi * (1.0 - pi));
    }
    out.divergence = l.size() > 0 ? div_sum / static_cast<double>(l.size()) : 0.0;
    return out;
}

CVec oamp_nle_with(const CVec& l, const DenoiserFn& denoiser) {
    MmseDenoised den = denoiser(l);
    double div = den.divergence;
    if (std::abs(1.0 - div) < 1e-12) {
        throw DegenerateDenoiserError("oamp_nle: unit average derivative, correction degenerate");
    }
    double p = 1.0 / (1.0 - div);
    return p * (den.x_hat - div * l);
}

CVec oamp_nle(const CVec& l, double tau2, double rho) {
    return oamp_nle_with(l, [&](const CVec& v) { return mmse_denoise(v, tau2, rho); });
}

double estimate_tau2(const CVec& y, const CMat& A, const CVec& x_hat, double sigma2) {
    if (A.rows() != y.size() || A.cols() != x_hat.size())
        throw ParamError("estimate_tau2: dimension mismatch");
    double residual = (y - A * x_hat).squaredNorm();
    double value = (residual - static_cast<double>(A.rows()) * sigma2) / A.squaredNorm();
    return std::max(value, kTau2Floor);
}

double nle_input_variance(const CMat& A, const CMat& d, double v2, double sigma2) {
    const auto n = A.cols();
    CMat b = CMat::Identity(n, n) - d * A;
    double value = (b.squaredNorm() * v2 + d.squaredNorm() * sigma2) / static_cast<double>(n);
    return std::max(value, kTau2Floor);
}

CVec soft_threshold(const CVec& u, double s) {
    CVec out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        double a = std::abs(u[i]);
        out[i] = a > s ? (1.0 - s / a) * u[i] : cplx(0.0, 0.0);
    }
    return out;
}

namespace {

double largest_gram_eigenvalue(const CMat& A) {
    CMat gram = A * A.adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> es(gram, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

void record_iteration(SolverTrajectory& traj, const CVec& y, const CMat& A, const CVec& l,
                      const CVec& x, double tau2) {
    traj.le_estimates.push_back(l);
    traj.nle_estimates.push_back(x);
    traj.residual_mse.push_back((y - A * x).squaredNorm() / static_cast<double>(A.rows()));
    traj.tau2.push_back(tau2);
}

SolverTrajectory proximal_gradient(const CVec& y, const CMat& A, double lambda, int iterations,
                                   bool nesterov) {
    if (!(lambda > 0.0)) throw ParamError("soft-threshold solvers require lambda > 0");
    if (iterations < 0) throw ParamError("iterations must be non-negative");

    SolverTrajectory traj;
    traj.iterations = iterations;
    double lip = largest_gram_eigenvalue(A);
    if (!(lip > 0.0)) throw SingularityError("proximal gradient: zero operator");
    double mu = 1.0 / lip;
    double shrink = lambda * mu;

    const auto n = A.cols();
    CVec x = CVec::Zero(n);
    CVec x_prev = x;
    CVec momentum = x;
    double t_k = 1.0;
    for (int t = 0; t < iterations; ++t) {
        const CVec& base = nesterov ? momentum : x;
        CVec u = base + mu * (A.adjoint() * (y - A * base));
        CVec x_new = soft_threshold(u, shrink);
        if (nesterov) {
            double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
            momentum = x_new + ((t_k - 1.0) / t_next) * (x_new - x);
            t_k = t_next;
        }
        x_prev = x;
        x = x_new;
        // sigma2 is unknown to these baselines; the recorded tau2 is the
        // residual-only estimate.
        record_iteration(traj, y, A, u, x, estimate_tau2(y, A, x, 0.0));
    }
    return traj;
}

}  // namespace

SolverTrajectory ista(const CVec& y, const CMat& A, double lambda, int iterations) {
    return proximal_gradient(y, A, lambda, iterations, false);
}

SolverTrajectory fista(const CVec& y, const CMat& A, double lambda, int iterations) {
    return proximal_gradient(y, A, lambda, iterations, true);
}

SolverTrajectory oamp(const CVec& y, const CMat& A, double rho, double sigma2, int iterations,
                      LeVariant variant) {
    if (iterations < 0) throw ParamError("oamp: iterations must be non-negative");
    SolverTrajectory traj;
    traj.iterations = iterations;
    const auto n = A.cols();
    CVec x = CVec::Zero(n);

    // D is tau2-independent for these variants; hoist it out of the loop.
    CMat fixed_d;
    bool d_is_fixed = variant != LeVariant::Lmmse;
    if (d_is_fixed) fixed_d = decorrelation_matrix(A, variant);

    bool frozen = false;
    CVec l = x;
    for (int t = 0; t < iterations; ++t) {
        double v2 = estimate_tau2(y, A, x, sigma2);
        if (!frozen) {
            CMat d = d_is_fixed ? fixed_d : decorrelation_matrix(A, variant, v2, sigma2);
            l = x + d * (y - A * x);
            double tau2 = nle_input_variance(A, d, v2, sigma2);
            MmseDenoised den = mmse_denoise(l, tau2, rho);

            // The divergence correction assumes the denoiser error matches the
            // model; on instances where it does not (small N, clustered
            // activity) it amplifies instead of correcting. Keep a candidate
            // only if it does not raise the residual error estimate.
            bool accepted = false;
            if (std::abs(1.0 - den.divergence) >= 1e-12) {
                double p = 1.0 / (1.0 - den.divergence);
                CVec corrected = p * (den.x_hat - den.divergence * l);
                if (estimate_tau2(y, A, corrected, sigma2) <= v2) {
                    x = std::move(corrected);
                    accepted = true;
                }
            }
            if (!accepted) {
                if (estimate_tau2(y, A, den.x_hat, sigma2) <= v2) {
                    x = std::move(den.x_hat);
                } else {
                    frozen = true;
                }
            }
        }
        record_iteration(traj, y, A, l, x, v2);
    }
    return traj;
}

SolverTrajectory vqc_cs(const CVec& y, const CMat& A, const std::vector<DenoiserParams>& params,
                        int iterations, const VqcRunOptions& options) {
    if (iterations < 0) throw ParamError("vqc_cs: iterations must be non-negative");
    if (static_cast<int>(params.size()) < iterations)
        throw ParamError("vqc_cs: need at least one DenoiserParams per iteration");

    SolverTrajectory traj;
    traj.iterations = iterations;
    const auto n = A.cols();
    CVec x = CVec::Zero(n);

    CMat fixed_d;
    bool d_is_fixed = options.variant != LeVariant::Lmmse;
    if (d_is_fixed) fixed_d = decorrelation_matrix(A, options.variant);

    for (int t = 0; t < iterations; ++t) {
        double tau2 = estimate_tau2(y, A, x, options.sigma2);
        CVec l = d_is_fixed ? CVec(x + fixed_d * (y - A * x))
                            : le_step(y, A, x, options.variant, tau2, options.sigma2);
        double v2 = prep_angle(y, A, x);
        RVec r = embed(l);
        const DenoiserParams& p = params[static_cast<std::size_t>(t)];
        RVec s1 = scaling_factors(r, v2, p.vqc_s1, options.prep_mode, options.shots,
                                  options.shot_rng);
        RVec s2 = scaling_factors(r, v2, p.vqc_s2, options.prep_mode, options.shots,
                                  options.shot_rng);
        x = denoise(l, s1, s2);
        record_iteration(traj, y, A, l, x, tau2);
    }
    return traj;
}

}  // namespace vqccs
