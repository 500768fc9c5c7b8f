#include "vqccs/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vqccs {

double mse(const CVec& x_hat, const CVec& x) {
    if (x_hat.size() != x.size()) throw ParamError("mse: size mismatch");
    if (x.size() == 0) throw ParamError("mse: empty vectors");
    return (x_hat - x).squaredNorm() / static_cast<double>(x.size());
}

double to_db(double value) {
    if (value <= 0.0) return -400.0;
    return 10.0 * std::log10(value);
}

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ParamError("roc_auc: size mismatch");
    if (scores.empty()) throw ParamError("roc_auc: empty input");

    std::size_t positives = 0;
    for (int a : labels) positives += a != 0 ? 1 : 0;
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0)
        throw UndefinedMetricError("roc_auc: need both classes in the pooled labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocResult res;
    res.points.push_back({0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    double auc = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        // One threshold step per distinct score: tied scores move together.
        std::size_t j = i;
        std::size_t group_tp = 0;
        std::size_t group_fp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] != 0)
                ++group_tp;
            else
                ++group_fp;
            ++j;
        }
        double fpr_prev = static_cast<double>(fp) / static_cast<double>(negatives);
        double tpr_prev = static_cast<double>(tp) / static_cast<double>(positives);
        tp += group_tp;
        fp += group_fp;
        double fpr = static_cast<double>(fp) / static_cast<double>(negatives);
        double tpr = static_cast<double>(tp) / static_cast<double>(positives);
        auc += (fpr - fpr_prev) * (tpr + tpr_prev) / 2.0;
        res.points.push_back({fpr, tpr});
        i = j;
    }
    res.auc = auc;
    return res;
}

}  // namespace vqccs
