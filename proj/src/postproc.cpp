#include "vqccs/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vqccs/parallel.hpp"
#include "vqccs/training.hpp"

namespace vqccs {

MlpParams MlpParams::zeros(int n) {
    if (n < 1) throw ParamError("MlpParams: n must be >= 1");
    MlpParams p;
    p.w1 = RMat::Zero(4 * n, n);
    p.b1 = RVec::Zero(4 * n);
    p.w2 = RMat::Zero(2 * n, 4 * n);
    p.b2 = RVec::Zero(2 * n);
    p.w3 = RMat::Zero(n, 2 * n);
    p.b3 = RVec::Zero(n);
    return p;
}

MlpParams MlpParams::random_init(int n, RandomStream& rng) {
    MlpParams p = zeros(n);
    auto fill = [&rng](RMat& w, double variance) {
        double s = std::sqrt(variance);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = s * rng.normal();
    };
    fill(p.w1, 2.0 / static_cast<double>(p.w1.cols()));
    fill(p.w2, 2.0 / static_cast<double>(p.w2.cols()));
    fill(p.w3, 1.0 / static_cast<double>(p.w3.cols()));
    return p;
}

void MlpParams::validate() const {
    const auto n = w1.cols();
    if (n < 1) throw ParamError("MlpParams: empty input layer");
    if (w1.rows() != 4 * n || b1.size() != 4 * n || w2.rows() != 2 * n ||
        w2.cols() != 4 * n || b2.size() != 2 * n || w3.rows() != n || w3.cols() != 2 * n ||
        b3.size() != n) {
        throw ParamError("MlpParams: layer shape chain broken");
    }
    if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite() ||
        !w3.allFinite() || !b3.allFinite()) {
        throw ParamError("MlpParams: non-finite parameter");
    }
}

std::size_t MlpParams::count() const {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() +
                                    b3.size());
}

namespace {

inline double logistic(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

constexpr double kProbClamp = 1e-12;

}  // namespace

RVec mlp_forward(const MlpParams& params, const RVec& features) {
    if (features.size() != params.w1.cols()) throw ParamError("mlp_forward: feature size mismatch");
    RVec h1 = (params.w1 * features + params.b1).cwiseMax(0.0);
    RVec h2 = (params.w2 * h1 + params.b2).cwiseMax(0.0);
    RVec z3 = params.w3 * h2 + params.b3;
    RVec out(z3.size());
    for (Eigen::Index i = 0; i < z3.size(); ++i) out[i] = logistic(z3[i]);
    return out;
}

double bce_loss(const RVec& probs, const IVec& labels) {
    if (probs.size() != labels.size()) throw ParamError("bce_loss: size mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
        sum += labels[i] != 0 ? -std::log(p) : -std::log(1.0 - p);
    }
    return sum / static_cast<double>(probs.size());
}

MlpGrad mlp_grad(const MlpParams& params, const RVec& features, const IVec& labels) {
    if (features.size() != params.w1.cols()) throw ParamError("mlp_grad: feature size mismatch");
    if (labels.size() != params.w3.rows()) throw ParamError("mlp_grad: label size mismatch");

    RVec z1 = params.w1 * features + params.b1;
    RVec h1 = z1.cwiseMax(0.0);
    RVec z2 = params.w2 * h1 + params.b2;
    RVec h2 = z2.cwiseMax(0.0);
    RVec z3 = params.w3 * h2 + params.b3;
    RVec probs(z3.size());
    for (Eigen::Index i = 0; i < z3.size(); ++i) probs[i] = logistic(z3[i]);

    MlpGrad out;
    out.loss = bce_loss(probs, labels);
    out.grads = MlpParams::zeros(static_cast<int>(params.w1.cols()));

    const double n = static_cast<double>(probs.size());
    RVec dz3(probs.size());
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        dz3[i] = (probs[i] - static_cast<double>(labels[i])) / n;
    }
    out.grads.w3 = dz3 * h2.transpose();
    out.grads.b3 = dz3;

    RVec dz2 = params.w3.transpose() * dz3;
    for (Eigen::Index i = 0; i < dz2.size(); ++i)
        if (z2[i] <= 0.0) dz2[i] = 0.0;
    out.grads.w2 = dz2 * h1.transpose();
    out.grads.b2 = dz2;

    RVec dz1 = params.w2.transpose() * dz2;
    for (Eigen::Index i = 0; i < dz1.size(); ++i)
        if (z1[i] <= 0.0) dz1[i] = 0.0;
    out.grads.w1 = dz1 * features.transpose();
    out.grads.b1 = dz1;
    return out;
}

RVec flatten_mlp(const MlpParams& params) {
    RVec flat(static_cast<Eigen::Index>(params.count()));
    Eigen::Index k = 0;
    auto push_mat = [&](const RMat& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) flat[k++] = m(i, j);
    };
    auto push_vec = [&](const RVec& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) flat[k++] = v[i];
    };
    push_mat(params.w1);
    push_vec(params.b1);
    push_mat(params.w2);
    push_vec(params.b2);
    push_mat(params.w3);
    push_vec(params.b3);
    return flat;
}

MlpParams unflatten_mlp(const RVec& flat, int n) {
    MlpParams p = MlpParams::zeros(n);
    if (flat.size() != static_cast<Eigen::Index>(p.count()))
        throw ParamError("unflatten_mlp: size mismatch");
    Eigen::Index k = 0;
    auto pull_mat = [&](RMat& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = flat[k++];
    };
    auto pull_vec = [&](RVec& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = flat[k++];
    };
    pull_mat(p.w1);
    pull_vec(p.b1);
    pull_mat(p.w2);
    pull_vec(p.b2);
    pull_mat(p.w3);
    pull_vec(p.b3);
    return p;
}

void MlpTrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("mlp: learning_rate must be positive");
    if (!(rmsprop_beta >= 0.0 && rmsprop_beta < 1.0))
        throw ConfigError("mlp: rmsprop_beta must lie in [0, 1)");
    if (!(rmsprop_eps > 0.0)) throw ConfigError("mlp: rmsprop_eps must be positive");
    if (epochs < 1) throw ConfigError("mlp: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("mlp: batch_size must be >= 1");
    if (!(val_fraction >= 0.0 && val_fraction < 1.0))
        throw ConfigError("mlp: val_fraction must lie in [0, 1)");
    if (workers < 0) throw ConfigError("mlp: workers must be non-negative");
}

MlpTrainResult train_mlp(const std::vector<RVec>& features, const std::vector<IVec>& labels,
                         const MlpTrainConfig& cfg) {
    cfg.validate();
    if (features.empty()) throw ParamError("train_mlp: empty dataset");
    if (features.size() != labels.size()) throw ParamError("train_mlp: feature/label mismatch");
    const int n = static_cast<int>(features[0].size());
    const int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(default_workers());

    RandomStream root(cfg.seed);
    RandomStream init_rng = root.substream("init");
    MlpParams params = MlpParams::random_init(n, init_rng);
    RVec flat = flatten_mlp(params);

    RandomStream split_rng = root.substream("split");
    std::vector<int> perm = split_rng.permutation(static_cast<int>(features.size()));
    auto val_count = static_cast<std::size_t>(
        std::llround(cfg.val_fraction * static_cast<double>(features.size())));
    if (val_count >= features.size()) val_count = features.size() - 1;
    const std::size_t train_count = features.size() - val_count;
    std::vector<int> val_idx(perm.begin() + static_cast<long>(train_count), perm.end());

    RmspropState opt;
    opt.beta = cfg.rmsprop_beta;
    opt.eps = cfg.rmsprop_eps;

    RandomStream shuffle_root = root.substream("shuffle");
    MlpTrainResult res;
    res.best_val_loss = std::numeric_limits<double>::infinity();
    RVec best_flat = flat;
    std::vector<MlpGrad> batch_grads;
    std::vector<double> val_losses(val_idx.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order = shuffle_root.substream(static_cast<std::uint64_t>(epoch))
                                     .permutation(static_cast<int>(train_count));
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < train_count;
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bs =
                std::min(static_cast<std::size_t>(cfg.batch_size), train_count - start);
            batch_grads.assign(bs, MlpGrad{});
            parallel_for(bs, static_cast<std::size_t>(workers), [&](std::size_t i) {
                const auto idx = static_cast<std::size_t>(perm[static_cast<std::size_t>(
                    order[start + i])]);
                batch_grads[i] = mlp_grad(params, features[idx], labels[idx]);
            });
            RVec gsum = RVec::Zero(flat.size());
            for (std::size_t i = 0; i < bs; ++i) {
                gsum += flatten_mlp(batch_grads[i].grads) / static_cast<double>(bs);
                loss_sum += batch_grads[i].loss;
            }
            opt.step(flat, gsum, cfg.learning_rate);
            params = unflatten_mlp(flat, n);
        }
        const double epoch_loss = loss_sum / static_cast<double>(train_count);

        double val_loss = epoch_loss;
        if (!val_idx.empty()) {
            parallel_for(val_idx.size(), static_cast<std::size_t>(workers), [&](std::size_t i) {
                const auto idx = static_cast<std::size_t>(val_idx[i]);
                val_losses[i] = bce_loss(mlp_forward(params, features[idx]), labels[idx]);
            });
            val_loss = 0.0;
            for (double v : val_losses) val_loss += v;
            val_loss /= static_cast<double>(val_idx.size());
        }
        if (!std::isfinite(epoch_loss) || !std::isfinite(val_loss)) {
            throw NumericalError("train_mlp: loss diverged at epoch " + std::to_string(epoch));
        }
        res.loss_history.push_back(epoch_loss);
        res.val_loss_history.push_back(val_loss);
        if (val_loss < res.best_val_loss) {
            res.best_val_loss = val_loss;
            res.best_epoch = epoch;
            best_flat = flat;
        }
    }
    res.params = unflatten_mlp(best_flat, n);
    return res;
}

}  // namespace vqccs
