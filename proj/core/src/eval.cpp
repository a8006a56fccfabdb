#include "nbavg/eval.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "nbavg/error.hpp"

namespace nbavg {

namespace {

struct ClassCounts {
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
};

ClassCounts check_binary(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw InvalidArgument(
            fmt::format("{} scores but {} labels", scores.size(), labels.size()));
    }
    ClassCounts counts;
    for (const int label : labels) {
        if (label == 1) {
            ++counts.positives;
        } else if (label == 0) {
            ++counts.negatives;
        } else {
            throw InvalidArgument(fmt::format("label {} is not 0 or 1", label));
        }
    }
    if (counts.positives == 0 || counts.negatives == 0) {
        throw InvalidArgument("ROC needs at least one outlier and one inlier label");
    }
    return counts;
}

// Indices ordered by score descending, ties by index ascending.
std::vector<std::size_t> rank_descending(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    const auto counts = check_binary(scores, labels);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the rank sum of the outliers, with tied groups sharing their
    // mid-rank; doubling keeps everything integral.
    std::int64_t twice_rank_sum = 0;
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t stop = start + 1;
        while (stop < order.size() && scores[order[stop]] == scores[order[start]]) ++stop;
        const auto twice_mid_rank = static_cast<std::int64_t>(start + 1 + stop);
        for (std::size_t p = start; p < stop; ++p) {
            if (labels[order[p]] == 1) twice_rank_sum += twice_mid_rank;
        }
        start = stop;
    }
    const std::int64_t twice_u = twice_rank_sum - counts.positives * (counts.positives + 1);
    return static_cast<double>(twice_u) /
           static_cast<double>(2 * counts.positives * counts.negatives);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    const auto counts = check_binary(scores, labels);
    const auto order = rank_descending(scores);
    const double positives = static_cast<double>(counts.positives);
    const double negatives = static_cast<double>(counts.negatives);

    std::vector<RocPoint> curve{{0.0, 0.0}};
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t stop = start;
        while (stop < order.size() && scores[order[stop]] == scores[order[start]]) {
            (labels[order[stop]] == 1 ? tp : fp) += 1;
            ++stop;
        }
        curve.push_back({static_cast<double>(fp) / negatives, static_cast<double>(tp) / positives});
        start = stop;
    }
    return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
    double area = 0.0;
    for (std::size_t p = 1; p < curve.size(); ++p) {
        area += (curve[p].fpr - curve[p - 1].fpr) * (curve[p].tpr + curve[p - 1].tpr) * 0.5;
    }
    return area;
}

std::vector<int> top_k_threshold(std::span<const double> scores, std::size_t n_outliers) {
    if (n_outliers > scores.size()) {
        throw InvalidArgument(fmt::format("cannot flag {} outliers among {} objects", n_outliers,
                                          scores.size()));
    }
    const auto order = rank_descending(scores);
    std::vector<int> predicted(scores.size(), 0);
    for (std::size_t r = 0; r < n_outliers; ++r) predicted[order[r]] = 1;
    return predicted;
}

EvalResult precision_recall_f1(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) {
        throw InvalidArgument(
            fmt::format("{} predictions but {} truth labels", predicted.size(), truth.size()));
    }
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] == 1 && truth[i] == 1) ++tp;
        if (predicted[i] == 1 && truth[i] == 0) ++fp;
        if (predicted[i] == 0 && truth[i] == 1) ++fn;
    }
    if (tp + fn == 0) throw InvalidArgument("truth labels contain no outliers");

    EvalResult r;
    r.threshold_rank = tp + fp;
    r.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double sum = r.precision + r.recall;
    r.f1_harmonic = sum == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / sum;
    r.f1_paper = sum / 2.0;
    return r;
}

EvalResult evaluate(std::span<const double> scores, std::span<const int> labels) {
    const double auc = roc_auc(scores, labels);
    const auto outliers = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    EvalResult r = precision_recall_f1(top_k_threshold(scores, outliers), labels);
    r.auc = auc;
    r.threshold_rank = outliers;
    return r;
}

void write_roc_csv(std::span<const RocPoint> curve, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << "fpr,tpr\n";
    for (const auto& p : curve) out << fmt::format("{:.17g},{:.17g}\n", p.fpr, p.tpr);
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace nbavg
