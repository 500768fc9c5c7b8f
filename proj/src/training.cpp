#include "vqccs/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vqccs/parallel.hpp"

namespace vqccs {

std::vector<double> loss_weights(int iterations, double decay) {
    if (iterations < 0) throw ParamError("loss_weights: iterations must be non-negative");
    if (!(decay > 0.0 && decay <= 1.0)) throw ParamError("loss_weights: decay must lie in (0, 1]");
    std::vector<double> w(static_cast<std::size_t>(iterations));
    for (int t = 0; t < iterations; ++t) {
        w[static_cast<std::size_t>(t)] = std::pow(decay, iterations - 1 - t);
    }
    return w;
}

double unrolled_loss(const SolverTrajectory& traj, const CVec& x_true,
                     const std::vector<double>& weights) {
    if (traj.nle_estimates.size() < weights.size())
        throw ParamError("unrolled_loss: trajectory shorter than weight list");
    double loss = 0.0;
    const double n = static_cast<double>(x_true.size());
    for (std::size_t t = 0; t < weights.size(); ++t) {
        loss += weights[t] * (traj.nle_estimates[t] - x_true).squaredNorm() / n;
    }
    return loss;
}

namespace {

struct IterTape {
    CVec u;
    CVec l;
    double tau2 = 0.0;
    bool tau2_on_floor = false;
    double q = 0.0;
    double v2 = 0.0;
    RVec r;
    RVec expect[2];  // <Z> per qubit, s1 then s2 producer
    RMat d_params[2];
    RMat d_data[2];
    RVec s1, s2;
    CVec x_hat;
    CMat d;       // LMMSE only: normalized decorrelation matrix
    CMat b_inv;   // LMMSE only: (tau2 A A^H + sigma2 I)^{-1}
};

}  // namespace

UnrolledGrad unrolled_grad(const CVec& y, const CMat& A, const CVec& x_true,
                           const std::vector<DenoiserParams>& params, int iterations,
                           const VqcRunOptions& options, const std::vector<double>& weights) {
    if (iterations < 0) throw ParamError("unrolled_grad: iterations must be non-negative");
    if (static_cast<int>(params.size()) < iterations)
        throw ParamError("unrolled_grad: need at least one DenoiserParams per iteration");
    if (static_cast<int>(weights.size()) != iterations)
        throw ParamError("unrolled_grad: one loss weight per iteration");
    if (A.rows() != y.size() || A.cols() != x_true.size())
        throw ParamError("unrolled_grad: dimension mismatch");

    const int n = static_cast<int>(A.cols());
    UnrolledGrad out;
    out.grads.reserve(params.size());
    for (const DenoiserParams& p : params) {
        p.validate();
        if (p.vqc_s1.n != n) throw ParamError("unrolled_grad: VQC width must match signal size");
        out.grads.push_back(DenoiserParams::zeros(p.vqc_s1.n, p.vqc_s1.layers));
    }
    if (iterations == 0) return out;

    const int layers = params[0].vqc_s1.layers;
    const bool lmmse = options.variant == LeVariant::Lmmse;
    const double trace_a2 = A.squaredNorm();

    CMat fixed_d;
    if (!lmmse) fixed_d = decorrelation_matrix(A, options.variant);
    CMat gram;
    if (lmmse) gram = A * A.adjoint();

    QubitCircuit circuit = build_ansatz_circuit(n, layers, options.prep_mode);
    RVec packed(circuit.n_params);
    RVec data(circuit.n_data);
    CircuitGradient cg;

    // Forward pass, taping everything the reverse sweep needs.
    std::vector<IterTape> tape(static_cast<std::size_t>(iterations));
    CVec x = CVec::Zero(n);
    for (int t = 0; t < iterations; ++t) {
        IterTape& tp = tape[static_cast<std::size_t>(t)];
        tp.u = y - A * x;
        double raw = (tp.u.squaredNorm() - static_cast<double>(A.rows()) * options.sigma2) /
                     trace_a2;
        tp.tau2 = std::max(raw, kTau2Floor);
        tp.tau2_on_floor = raw <= kTau2Floor;
        if (lmmse) {
            CMat reg = tp.tau2 * gram;
            reg += options.sigma2 * CMat::Identity(A.rows(), A.rows());
            Eigen::FullPivLU<CMat> lu(reg);
            if (!lu.isInvertible())
                throw SingularityError("unrolled_grad: regularized Gram matrix singular");
            tp.b_inv = lu.inverse();
            tp.d = decorrelation_matrix(A, LeVariant::Lmmse, tp.tau2, options.sigma2);
            tp.l = x + tp.d * tp.u;
        } else {
            tp.l = x + fixed_d * tp.u;
        }
        tp.q = tp.u.squaredNorm() / static_cast<double>(n);
        tp.v2 = kPi * std::tanh(tp.q);
        tp.r = embed(tp.l);

        for (int j = 0; j < n; ++j) data[j] = tp.r[j];
        data[n] = tp.v2;

        const DenoiserParams& dp = params[static_cast<std::size_t>(t)];
        tp.s1.resize(n);
        tp.s2.resize(n);
        for (int k = 0; k < 2; ++k) {
            const VqcParams& vp = k == 0 ? dp.vqc_s1 : dp.vqc_s2;
            tp.expect[k].resize(n);
            tp.d_params[k].resize(n, circuit.n_params);
            tp.d_data[k].resize(n, circuit.n_data);
            for (int i = 0; i < n; ++i) {
                pack_qubit_params(vp, i, packed);
                run_circuit_grad(circuit,
                                 std::span<const double>(packed.data(),
                                                         static_cast<std::size_t>(packed.size())),
                                 std::span<const double>(data.data(),
                                                         static_cast<std::size_t>(data.size())),
                                 cg);
                tp.expect[k][i] = cg.expectation;
                tp.d_params[k].row(i) = cg.d_params.transpose();
                tp.d_data[k].row(i) = cg.d_data.transpose();
            }
        }
        for (int i = 0; i < n; ++i) {
            tp.s1[i] = (tp.expect[0][i] + 1.0) / 2.0;
            tp.s2[i] = (tp.expect[1][i] + 1.0) / 2.0;
        }
        tp.x_hat = denoise(tp.l, tp.s1, tp.s2);
        x = tp.x_hat;

        out.loss += weights[static_cast<std::size_t>(t)] *
                    (tp.x_hat - x_true).squaredNorm() / static_cast<double>(n);
    }

    // Reverse sweep. xbar holds dC/d(x_hat^t) in the convention
    // zbar = dC/dRe(z) + i dC/dIm(z); for u = B w that gives wbar = B^H ubar.
    CVec xbar = CVec::Zero(n);
    RVec packed_grad(circuit.n_params);
    for (int t = iterations - 1; t >= 0; --t) {
        IterTape& tp = tape[static_cast<std::size_t>(t)];
        DenoiserParams& g = out.grads[static_cast<std::size_t>(t)];
        xbar += (2.0 * weights[static_cast<std::size_t>(t)] / static_cast<double>(n)) *
                (tp.x_hat - x_true);

        // x_hat_i = s1_i / (1 + s2_i) * l_i
        RVec s1bar(n), s2bar(n);
        CVec lbar(n);
        for (int i = 0; i < n; ++i) {
            double gain_re = std::real(std::conj(xbar[i]) * tp.l[i]);
            double denom = 1.0 + tp.s2[i];
            s1bar[i] = gain_re / denom;
            s2bar[i] = -gain_re * tp.s1[i] / (denom * denom);
            lbar[i] = (tp.s1[i] / denom) * xbar[i];
        }

        // s = (m + 1)/2, then the per-qubit circuit gradients.
        RVec rbar = RVec::Zero(n);
        double v2bar = 0.0;
        for (int k = 0; k < 2; ++k) {
            VqcParams& acc = k == 0 ? g.vqc_s1 : g.vqc_s2;
            const RVec& sbar = k == 0 ? s1bar : s2bar;
            for (int i = 0; i < n; ++i) {
                double mbar = sbar[i] / 2.0;
                packed_grad = mbar * tp.d_params[k].row(i).transpose();
                scatter_qubit_grad(packed_grad, i, acc);
                rbar += mbar * tp.d_data[k].row(i).head(n).transpose();
                v2bar += mbar * tp.d_data[k](i, n);
            }
        }

        // r_j = pi tanh(|l_j|^2)
        for (int j = 0; j < n; ++j) {
            double th = std::tanh(std::norm(tp.l[j]));
            lbar[j] += rbar[j] * kPi * (1.0 - th * th) * 2.0 * tp.l[j];
        }

        // v~^2 = pi tanh(||u||^2 / N)
        double thq = std::tanh(tp.q);
        double qbar = v2bar * kPi * (1.0 - thq * thq);
        CVec ubar = (qbar * 2.0 / static_cast<double>(n)) * tp.u;

        // l = x_prev + D u
        CVec xbar_prev = lbar;
        const CMat& d_used = lmmse ? tp.d : fixed_d;
        ubar += d_used.adjoint() * lbar;

        if (lmmse && !tp.tau2_on_floor) {
            // tau2 enters through D = c(tau2) D_hat(tau2).
            CMat d_hat = tp.tau2 * (A.adjoint() * tp.b_inv);
            CMat d_hat_dt = A.adjoint() * tp.b_inv -
                            tp.tau2 * (A.adjoint() * tp.b_inv * gram * tp.b_inv);
            double tr = d_hat.cwiseProduct(A.transpose()).sum().real();
            double tr_dt = d_hat_dt.cwiseProduct(A.transpose()).sum().real();
            double c = static_cast<double>(n) / tr;
            double c_dt = -static_cast<double>(n) * tr_dt / (tr * tr);
            CMat d_dt = c_dt * d_hat + c * d_hat_dt;
            double tau2bar = lbar.dot(d_dt * tp.u).real();
            ubar += (tau2bar * 2.0 / trace_a2) * tp.u;
        }

        // u = y - A x_prev
        xbar_prev -= A.adjoint() * ubar;
        xbar = xbar_prev;
    }

    return out;
}

RVec flatten_params(const std::vector<DenoiserParams>& params) {
    std::size_t total = 0;
    for (const DenoiserParams& p : params) total += p.vqc_s1.count() + p.vqc_s2.count();
    RVec flat(static_cast<Eigen::Index>(total));
    Eigen::Index k = 0;
    auto push_mat = [&](const RMat& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) flat[k++] = m(i, j);
    };
    for (const DenoiserParams& p : params) {
        for (const VqcParams* v : {&p.vqc_s1, &p.vqc_s2}) {
            push_mat(v->input_weights);
            push_mat(v->angles_a);
            push_mat(v->angles_b);
            push_mat(v->angles_c);
        }
    }
    return flat;
}

std::vector<DenoiserParams> unflatten_params(const RVec& flat, int n, int layers,
                                             int iterations) {
    std::vector<DenoiserParams> params(static_cast<std::size_t>(iterations),
                                       DenoiserParams::zeros(n, layers));
    Eigen::Index expected = 0;
    for (const DenoiserParams& p : params)
        expected += static_cast<Eigen::Index>(p.vqc_s1.count() + p.vqc_s2.count());
    if (flat.size() != expected) throw ParamError("unflatten_params: size mismatch");
    Eigen::Index k = 0;
    auto pull_mat = [&](RMat& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = flat[k++];
    };
    for (DenoiserParams& p : params) {
        for (VqcParams* v : {&p.vqc_s1, &p.vqc_s2}) {
            pull_mat(v->input_weights);
            pull_mat(v->angles_a);
            pull_mat(v->angles_b);
            pull_mat(v->angles_c);
        }
    }
    return params;
}

void add_scaled(std::vector<DenoiserParams>& accum, const std::vector<DenoiserParams>& grads,
                double scale) {
    if (accum.size() != grads.size()) throw ParamError("add_scaled: shape mismatch");
    for (std::size_t t = 0; t < accum.size(); ++t) {
        for (auto [a, g] : {std::pair{&accum[t].vqc_s1, &grads[t].vqc_s1},
                            std::pair{&accum[t].vqc_s2, &grads[t].vqc_s2}}) {
            a->input_weights += scale * g->input_weights;
            a->angles_a += scale * g->angles_a;
            a->angles_b += scale * g->angles_b;
            a->angles_c += scale * g->angles_c;
        }
    }
}

void RmspropState::step(RVec& params, const RVec& grad, double learning_rate) {
    if (params.size() != grad.size()) throw ParamError("rmsprop: size mismatch");
    if (second_moment.size() == 0) second_moment = RVec::Zero(params.size());
    if (second_moment.size() != params.size()) throw ParamError("rmsprop: state size mismatch");
    second_moment = beta * second_moment.array() + (1.0 - beta) * grad.array().square();
    params.array() -= learning_rate * grad.array() / (second_moment.array().sqrt() + eps);
}

void TrainConfig::validate() const {
    if (iterations < 1) throw ConfigError("train: iterations must be >= 1");
    if (layers < 1) throw ConfigError("train: layers must be >= 1");
    if (!(loss_decay > 0.0 && loss_decay <= 1.0))
        throw ConfigError("train: loss_decay must lie in (0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (!(rmsprop_beta >= 0.0 && rmsprop_beta < 1.0))
        throw ConfigError("train: rmsprop_beta must lie in [0, 1)");
    if (!(rmsprop_eps > 0.0)) throw ConfigError("train: rmsprop_eps must be positive");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(val_fraction >= 0.0 && val_fraction < 1.0))
        throw ConfigError("train: val_fraction must lie in [0, 1)");
    if (workers < 0) throw ConfigError("train: workers must be non-negative");
}

namespace {

VqcRunOptions run_options(const TrainConfig& cfg, double sigma2) {
    VqcRunOptions opt;
    opt.variant = cfg.variant;
    opt.prep_mode = cfg.prep_mode;
    opt.sigma2 = sigma2;
    return opt;
}

double mean_loss(const std::vector<Instance>& data, const std::vector<int>& idx,
                 const std::vector<DenoiserParams>& params, const TrainConfig& cfg,
                 const std::vector<double>& weights, int workers) {
    if (idx.empty()) return 0.0;
    std::vector<double> losses(idx.size(), 0.0);
    parallel_for(idx.size(), static_cast<std::size_t>(workers), [&](std::size_t i) {
        const Instance& inst = data[static_cast<std::size_t>(idx[i])];
        SolverTrajectory traj = vqc_cs(inst.observation, inst.pilot, params, cfg.iterations,
                                       run_options(cfg, inst.noise_var));
        losses[i] = unrolled_loss(traj, inst.signal, weights);
    });
    double sum = 0.0;
    for (double v : losses) sum += v;
    return sum / static_cast<double>(idx.size());
}

}  // namespace

TrainResult train(const std::vector<Instance>& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    if (data.empty()) throw ParamError("train: empty dataset");
    const int n = static_cast<int>(data[0].pilot.cols());
    const int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(default_workers());

    RandomStream root(cfg.seed);
    RandomStream split_rng = root.substream("split");
    std::vector<int> perm = split_rng.permutation(static_cast<int>(data.size()));
    auto val_count = static_cast<std::size_t>(
        std::llround(cfg.val_fraction * static_cast<double>(data.size())));
    if (val_count >= data.size()) val_count = data.size() - 1;
    const std::size_t train_count = data.size() - val_count;
    std::vector<int> train_idx(perm.begin(), perm.begin() + static_cast<long>(train_count));
    std::vector<int> val_idx(perm.begin() + static_cast<long>(train_count), perm.end());

    RandomStream init_rng = root.substream("init");
    std::vector<DenoiserParams> params;
    params.reserve(static_cast<std::size_t>(cfg.iterations));
    for (int t = 0; t < cfg.iterations; ++t) {
        params.push_back(DenoiserParams::random_init(n, cfg.layers, init_rng));
    }

    const std::vector<double> weights = loss_weights(cfg.iterations, cfg.loss_decay);
    RmspropState opt;
    opt.beta = cfg.rmsprop_beta;
    opt.eps = cfg.rmsprop_eps;
    RVec flat = flatten_params(params);

    RandomStream shuffle_root = root.substream("shuffle");
    TrainResult res;
    res.best_val_loss = std::numeric_limits<double>::infinity();

    std::vector<UnrolledGrad> batch_grads;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order =
            shuffle_root.substream(static_cast<std::uint64_t>(epoch))
                .permutation(static_cast<int>(train_count));
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < train_count;
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bs =
                std::min(static_cast<std::size_t>(cfg.batch_size), train_count - start);
            batch_grads.assign(bs, UnrolledGrad{});
            parallel_for(bs, static_cast<std::size_t>(workers), [&](std::size_t i) {
                const Instance& inst =
                    data[static_cast<std::size_t>(train_idx[static_cast<std::size_t>(
                        order[start + i])])];
                batch_grads[i] = unrolled_grad(inst.observation, inst.pilot, inst.signal, params,
                                               cfg.iterations,
                                               run_options(cfg, inst.noise_var), weights);
            });
            std::vector<DenoiserParams> gsum(static_cast<std::size_t>(cfg.iterations),
                                             DenoiserParams::zeros(n, cfg.layers));
            for (std::size_t i = 0; i < bs; ++i) {
                add_scaled(gsum, batch_grads[i].grads, 1.0 / static_cast<double>(bs));
                loss_sum += batch_grads[i].loss;
            }
            RVec gflat = flatten_params(gsum);
            opt.step(flat, gflat, cfg.learning_rate);
            params = unflatten_params(flat, n, cfg.layers, cfg.iterations);
        }
        const double train_loss = loss_sum / static_cast<double>(train_count);
        const double val_loss =
            val_idx.empty() ? train_loss
                            : mean_loss(data, val_idx, params, cfg, weights, workers);
        res.train_loss_history.push_back(train_loss);
        res.val_loss_history.push_back(val_loss);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
            res.diverged = true;
            res.diverged_epoch = epoch;
            break;
        }
        if (val_loss < res.best_val_loss) {
            res.best_val_loss = val_loss;
            res.best_epoch = epoch;
            res.params = params;
        }
        if (on_epoch) on_epoch(epoch, train_loss, val_loss);
    }
    if (res.params.empty()) res.params = params;
    return res;
}

double evaluate_loss(const std::vector<Instance>& data, const std::vector<DenoiserParams>& params,
                     const TrainConfig& cfg, int workers) {
    std::vector<int> idx(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) idx[i] = static_cast<int>(i);
    const std::vector<double> weights = loss_weights(cfg.iterations, cfg.loss_decay);
    const int w = workers > 0 ? workers : static_cast<int>(default_workers());
    return mean_loss(data, idx, params, cfg, weights, w);
}

}  // namespace vqccs
