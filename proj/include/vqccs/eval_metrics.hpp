#pragma once

#include <string>
#include <vector>

#include "vqccs/common.hpp"

namespace vqccs {

// (1/N) ||x_hat - x||^2.
double mse(const CVec& x_hat, const CVec& x);

// 10 log10(value); -inf guarded to a large negative floor for value = 0.
double to_db(double value);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    std::vector<RocPoint> points;  // starts at (0,0), ends at (1,1)
    double auc = 0.0;
};

// Pooled ROC over all (instance, device) scores. Thresholds sweep the
// distinct score values from high to low; tied scores move as one step.
// AUC by trapezoidal integration, which makes ties count 1/2 exactly as in
// the pairwise-concordance definition. UndefinedMetricError when labels are
// single-class.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct SolverMse {
    std::string solver;
    std::vector<double> per_iteration;  // index 0 = all-zero initial estimate
};

struct SolverRoc {
    std::string solver;
    RocResult roc;
};

struct MetricsReport {
    std::vector<SolverMse> mse_per_solver;
    std::vector<SolverRoc> roc_per_solver;
    std::size_t sample_count = 0;
    std::string config_hash;
    std::string tool_version;
};

}  // namespace vqccs
