#include "nbavg/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "nbavg/ensemble.hpp"
#include "nbavg/error.hpp"
#include "nbavg/na.hpp"
#include "nbavg/threading.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace nbavg {

namespace {

using Clock = std::chrono::steady_clock;

// Runs fn once; if that took less than `repeat_below` seconds, runs it twice
// more and reports the median of the three wall times. Returns the first result.
template <typename Fn>
auto timed(Fn&& fn, double repeat_below, double& seconds) {
    auto elapsed = [](Clock::time_point start) {
        return std::chrono::duration<double>(Clock::now() - start).count();
    };
    auto start = Clock::now();
    auto result = fn();
    double times[3] = {elapsed(start), 0.0, 0.0};
    if (times[0] >= repeat_below) {
        seconds = times[0];
        return result;
    }
    for (int r = 1; r < 3; ++r) {
        start = Clock::now();
        auto again = fn();
        times[r] = elapsed(start);
    }
    std::sort(std::begin(times), std::end(times));
    seconds = times[1];
    return result;
}

struct Prepared {
    std::string name;
    std::optional<Dataset> data;
    std::string error;
};

struct Unit {
    std::size_t dataset = 0;
    std::string detector;
    std::optional<Detection> detection;
    double detector_time_s = 0.0;
    std::string error;
};

ReportRow failed_row(const std::string& dataset, const std::string& detector, const NASetting& s,
                     const std::string& error) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    ReportRow row;
    row.dataset = dataset;
    row.detector = detector;
    row.na_k = s.k;
    row.na_iterations = s.iterations;
    row.auc = row.precision = row.recall = row.f1_harmonic = row.f1_paper = nan;
    row.detector_time_s = row.na_time_s = 0.0;
    row.error = error.empty() ? "failed" : error;
    return row;
}

std::vector<ReportRow> evaluate_unit(const Prepared& prepared, const Unit& unit,
                                     const std::vector<NASetting>& grid, const RunOptions& options) {
    std::vector<ReportRow> rows;
    rows.reserve(grid.size());
    for (const auto& setting : grid) {
        if (!prepared.data || !unit.detection) {
            rows.push_back(failed_row(prepared.name, unit.detector, setting,
                                      !prepared.error.empty() ? prepared.error : unit.error));
            continue;
        }
        const Dataset& d = *prepared.data;
        try {
            if (!d.has_labels()) throw InvalidArgument("dataset has no ground-truth labels");
            const auto& labels = *d.labels();

            ReportRow row;
            row.dataset = prepared.name;
            row.detector = unit.detector;
            row.na_k = setting.k;
            row.na_iterations = setting.iterations;
            row.detector_time_s = unit.detector_time_s;

            const ScoreVector* scores = &unit.detection->scores;
            std::optional<NAResult> na;
            if (!setting.off()) {
                const NAConfig cfg{setting.k, setting.iterations, setting.reuse_graph};
                const NeighborGraph* graph =
                    unit.detection->graph ? &*unit.detection->graph : nullptr;
                na = timed([&] { return apply_na(d, *scores, cfg, graph); }, options.repeat_below_s,
                           row.na_time_s);
                row.graph_reused = na->graph_reused;
                scores = &na->scores;
            }

            const EvalResult metrics = evaluate(scores->scores, labels);
            row.auc = metrics.auc;
            row.precision = metrics.precision;
            row.recall = metrics.recall;
            row.f1_harmonic = metrics.f1_harmonic;
            row.f1_paper = metrics.f1_paper;
            if (options.keep_roc) row.roc = roc_curve(scores->scores, labels);
            rows.push_back(std::move(row));
        } catch (const std::exception& e) {
            rows.push_back(failed_row(prepared.name, unit.detector, setting, e.what()));
        }
    }
    return rows;
}

}  // namespace

bool ExperimentReport::has_errors() const noexcept {
    return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.failed(); });
}

void ExperimentReport::sort_canonical() {
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.dataset, a.detector, a.na_k, a.na_iterations) <
               std::tie(b.dataset, b.detector, b.na_k, b.na_iterations);
    });
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    cfg.validate();
    const auto grid = cfg.na_grid();
    const std::size_t jobs = options.jobs == 0 ? max_threads() : options.jobs;

    // Cells running side by side keep library calls single-threaded.
    const std::size_t saved_threads = max_threads();
    struct Restore {
        std::size_t threads;
        bool active;
        ~Restore() {
            if (active) set_max_threads(threads);
        }
    } restore{saved_threads, jobs > 1};
    if (jobs > 1) set_max_threads(1);

    std::vector<Prepared> prepared(cfg.datasets.size());
    detail::parallel_for(
        cfg.datasets.size(),
        [&](std::size_t i) {
            prepared[i].name = cfg.datasets[i].name;
            try {
                prepared[i].data = standardize(cfg.datasets[i].load());
            } catch (const std::exception& e) {
                prepared[i].error = e.what();
            }
        },
        1, jobs);

    // Phase 1: every (dataset, detector) pair.
    const std::size_t n_det = cfg.detectors.size();
    std::vector<Unit> units(cfg.datasets.size() * n_det);
    std::vector<std::vector<ReportRow>> unit_rows(units.size());
    detail::parallel_for(
        units.size(),
        [&](std::size_t u) {
            Unit& unit = units[u];
            unit.dataset = u / n_det;
            DetectorConfig det = cfg.detectors[u % n_det];
            unit.detector = det.label();
            const Prepared& p = prepared[unit.dataset];
            if (p.data) {
                det.seed = detail::mix_seed(detail::mix_seed(cfg.seed, det.seed),
                                            fnv1a64(p.name + "/" + unit.detector));
                try {
                    unit.detection = timed([&] { return run_detector(*p.data, det); },
                                           options.repeat_below_s, unit.detector_time_s);
                } catch (const std::exception& e) {
                    unit.error = e.what();
                }
            }
            unit_rows[u] = evaluate_unit(p, unit, grid, options);
        },
        1, jobs);

    // Phase 2: ensemble groups reuse the phase-1 detections.
    const std::size_t n_groups = cfg.ensemble_groups.size();
    std::vector<std::vector<ReportRow>> group_rows(cfg.datasets.size() * n_groups);
    detail::parallel_for(
        group_rows.size(),
        [&](std::size_t u) {
            const std::size_t ds = u / n_groups;
            const auto& group = cfg.ensemble_groups[u % n_groups];
            Unit unit;
            unit.dataset = ds;
            EnsembleInput input;
            const NeighborGraph* graph = nullptr;
            std::vector<std::string> member_labels;
            for (const auto& member : group.members) {
                std::size_t index = n_det;
                for (std::size_t i = 0; i < n_det && index == n_det; ++i) {
                    if (cfg.detectors[i].label() == member) index = i;
                }
                for (std::size_t i = 0; i < n_det && index == n_det; ++i) {
                    if (to_string(cfg.detectors[i].kind) == member) index = i;
                }
                const Unit& source = units[ds * n_det + index];
                member_labels.push_back(source.detector);
                if (!source.detection) {
                    if (unit.error.empty()) {
                        unit.error = fmt::format("member {} failed: {}", source.detector,
                                                 source.error.empty() ? "no result" : source.error);
                    }
                    continue;
                }
                input.members.push_back(source.detection->scores);
                unit.detector_time_s += source.detector_time_s;
                if (source.detection->graph && (!graph || source.detection->graph->k() > graph->k())) {
                    graph = &*source.detection->graph;
                }
            }
            unit.detector = "ensemble";
            for (std::size_t m = 0; m < member_labels.size(); ++m) {
                unit.detector += (m ? "+" : "-") + member_labels[m];
            }
            if (unit.error.empty() && prepared[ds].data) {
                try {
                    double combine_s = 0.0;
                    Detection det;
                    det.scores = timed([&] { return average_ensemble(input); },
                                       options.repeat_below_s, combine_s);
                    det.scores.detector_id = unit.detector;
                    if (graph) det.graph = *graph;
                    unit.detection = std::move(det);
                    unit.detector_time_s += combine_s;
                } catch (const std::exception& e) {
                    unit.error = e.what();
                }
            }
            group_rows[u] = evaluate_unit(prepared[ds], unit, grid, options);
        },
        1, jobs);

    ExperimentReport report;
    for (auto& rows : unit_rows) {
        for (auto& row : rows) report.rows.push_back(std::move(row));
    }
    for (auto& rows : group_rows) {
        for (auto& row : rows) report.rows.push_back(std::move(row));
    }
    report.sort_canonical();
    return report;
}

}  // namespace nbavg
