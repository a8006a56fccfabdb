#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "nbavg/dataset.hpp"

namespace nbavg {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    bool operator==(const RocPoint&) const = default;
};

struct EvalResult {
    double auc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1_harmonic = 0.0;
    /// Arithmetic mean of precision and recall.
    double f1_paper = 0.0;
    std::size_t threshold_rank = 0;
};

/// Mann-Whitney AUC: P(outlier score > inlier score) with ties counted half.
/// Labels must contain both classes.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// ROC points from the highest threshold down, one per distinct score, framed
/// by (0,0) and (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

double trapezoid_area(std::span<const RocPoint> curve);

/// Flags the `n_outliers` highest scores; ties at the cut go to the lower index.
std::vector<int> top_k_threshold(std::span<const double> scores, std::size_t n_outliers);

/// Fills precision, recall and both F1 variants; auc is left at 0.
EvalResult precision_recall_f1(std::span<const int> predicted, std::span<const int> truth);

/// AUC plus top-k thresholding at the true outlier count.
EvalResult evaluate(std::span<const double> scores, std::span<const int> labels);

/// Two-column "fpr,tpr" CSV.
void write_roc_csv(std::span<const RocPoint> curve, const std::filesystem::path& path);

}  // namespace nbavg
