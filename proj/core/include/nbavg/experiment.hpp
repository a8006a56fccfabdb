#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nbavg/config.hpp"
#include "nbavg/eval.hpp"

namespace nbavg {

struct ReportRow {
    std::string dataset;
    std::string detector;
    std::size_t na_k = 0;
    std::size_t na_iterations = 0;
    double auc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1_harmonic = 0.0;
    double f1_paper = 0.0;
    double detector_time_s = 0.0;
    double na_time_s = 0.0;
    bool graph_reused = false;

    /// Empty for successful cells. Failed cells keep their grid position with
    /// NaN metrics and the message here.
    std::string error;
    /// Not serialized into the report CSV; emitted as per-cell files.
    std::vector<RocPoint> roc;

    bool failed() const noexcept { return !error.empty(); }
};

struct ExperimentReport {
    std::vector<ReportRow> rows;

    bool has_errors() const noexcept;
    /// Sorts by (dataset, detector, na_k, na_iterations).
    void sort_canonical();
};

struct RunOptions {
    /// Cells executed concurrently; 0 = hardware concurrency.
    std::size_t jobs = 1;
    bool keep_roc = true;
    /// Cells faster than this are re-timed and the median of 3 is kept.
    double repeat_below_s = 0.1;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

// Report CSV: the ReportRow fields from `dataset` to `graph_reused`, in order,
// with a header row.
void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path);
ExperimentReport read_report_csv(const std::filesystem::path& path);

enum class Axis { dataset, detector, na_k, na_iterations };
std::string_view to_string(Axis axis) noexcept;
/// Throws InvalidArgument for an unknown axis name.
Axis parse_axis(std::string_view name);
/// Comma-separated axis list.
std::vector<Axis> parse_axes(std::string_view list);

struct SummaryGroup {
    std::vector<std::string> key;
    std::size_t count = 0;
    std::size_t failed = 0;
    double auc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1_harmonic = 0.0;
    double f1_paper = 0.0;
    double detector_time_s = 0.0;
    double na_time_s = 0.0;
};

/// Per detector, averaged over datasets: original, NA at the default setting,
/// and NA at the best setting per dataset. F1 is the arithmetic-mean variant;
/// the "best" F1 is taken from the row that maximizes AUC.
struct DetectorTriplet {
    std::string detector;
    std::size_t datasets = 0;
    double auc_original = 0.0;
    double auc_na_default = 0.0;
    double auc_na_best = 0.0;
    double f1_original = 0.0;
    double f1_na_default = 0.0;
    double f1_na_best = 0.0;
    double auc_diff_default = 0.0;
    double auc_diff_best = 0.0;
};

struct Summary {
    std::vector<Axis> group_by;
    std::vector<SummaryGroup> groups;
    std::vector<DetectorTriplet> triplets;
};

/// Means of every metric per group (failed rows are counted but excluded from
/// means), plus the per-detector triplets. The default NA setting is
/// k = default_k with one iteration.
Summary summarize(const ExperimentReport& report, std::span<const Axis> group_by,
                  std::size_t default_k = 100);

/// Column-aligned text rendering of a summary.
std::string format_summary(const Summary& summary);
std::string format_triplets(const Summary& summary);

/// Writes report.csv, one CSV + text table per summary, per-cell ROC curves
/// (rows that carry them) and manifest.txt. Returns the artifact paths relative
/// to `output_dir`, manifest last.
std::vector<std::filesystem::path> emit_reports(const ExperimentReport& report,
                                                std::span<const Summary> summaries,
                                                const std::filesystem::path& output_dir,
                                                std::string_view config_hash);

}  // namespace nbavg
