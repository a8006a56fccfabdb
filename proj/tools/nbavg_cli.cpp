#include <charconv>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nbavg/config.hpp"
#include "nbavg/error.hpp"
#include "nbavg/experiment.hpp"
#include "nbavg/threading.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::string output_dir;
    std::size_t jobs = 1;
    bool no_roc = false;
    std::vector<std::string> group_by;
};

struct SweepFlags {
    std::string data;
    std::string synthetic;
    std::string label_column;
    std::vector<std::string> detectors{"knn", "lof"};
    std::size_t k = 10;
    std::string range;
    std::size_t na_k = 100;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Override the experiment seed");
    cmd->add_option("-o,--output-dir", flags.output_dir, "Directory for report files");
    cmd->add_option("-j,--jobs", flags.jobs, "Cells run concurrently (0 = all cores)");
    cmd->add_flag("--no-roc", flags.no_roc, "Skip per-cell ROC curve files");
    cmd->add_option("--group-by", flags.group_by,
                    "Summary axes, comma separated (dataset, detector, na_k, na_iterations); "
                    "repeat for several summaries");
}

nbavg::LabelColumn label_column_from(const std::string& text) {
    if (text.empty()) return {};
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
    if (ec == std::errc() && ptr == text.data() + text.size()) return index;
    return text;
}

std::vector<nbavg::Summary> build_summaries(const nbavg::ExperimentReport& report,
                                            const std::vector<std::string>& group_by,
                                            const std::vector<std::string>& fallback) {
    std::vector<nbavg::Summary> out;
    for (const auto& spec : group_by.empty() ? fallback : group_by) {
        const auto axes = nbavg::parse_axes(spec);
        out.push_back(nbavg::summarize(report, axes));
    }
    return out;
}

void print_summaries(const std::vector<nbavg::Summary>& summaries) {
    for (const auto& s : summaries) std::fputs(nbavg::format_summary(s).c_str(), stdout);
    if (!summaries.empty()) {
        std::fputs("\n", stdout);
        std::fputs(nbavg::format_triplets(summaries.front()).c_str(), stdout);
    }
}

int execute(const nbavg::ExperimentConfig& cfg, const CommonFlags& flags,
            const std::vector<std::string>& default_axes) {
    nbavg::RunOptions options;
    options.jobs = flags.jobs;
    options.keep_roc = !flags.no_roc;
    const auto report = nbavg::run_experiment(cfg, options);
    const auto summaries = build_summaries(report, flags.group_by, default_axes);
    const fs::path out_dir = flags.output_dir.empty() ? cfg.output_dir : fs::path(flags.output_dir);
    const auto files = nbavg::emit_reports(report, summaries, out_dir, cfg.hash());

    print_summaries(summaries);
    fmt::print("\n{} cells, {} files written to {}\n", report.rows.size(), files.size(),
               out_dir.string());
    if (report.has_errors()) {
        for (const auto& row : report.rows) {
            if (!row.failed()) continue;
            fmt::print(stderr, "error: {} / {} (k={}, it={}): {}\n", row.dataset, row.detector,
                       row.na_k, row.na_iterations, row.error);
        }
        return 1;
    }
    return 0;
}

nbavg::ExperimentConfig sweep_config(const SweepFlags& sweep, const CommonFlags& flags) {
    nbavg::ExperimentConfig cfg;
    nbavg::DatasetSource source;
    if (!sweep.data.empty() == !sweep.synthetic.empty()) {
        throw nbavg::InvalidArgument("give exactly one of --data or --synthetic");
    }
    if (!sweep.data.empty()) {
        source.path = fs::path(sweep.data);
        source.label_column = label_column_from(sweep.label_column);
    } else {
        source.synthetic = nbavg::parse_synthetic_spec(sweep.synthetic);
    }
    source.name = source.default_name();
    cfg.datasets.push_back(std::move(source));
    for (const auto& name : sweep.detectors) {
        nbavg::DetectorConfig det;
        det.kind = nbavg::parse_detector_kind(name);
        det.k = sweep.k;
        cfg.detectors.push_back(det);
    }
    if (flags.seed) cfg.seed = *flags.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neighborhood averaging of outlier scores: experiment runner"};
    app.require_subcommand(1);

    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads inside library calls (0 = all cores)");

    CommonFlags flags;
    SweepFlags sweep;

    auto* run = app.add_subcommand("run", "Run every cell declared in a config file");
    std::string config_path;
    run->add_option("config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
    add_common(run, flags);

    auto* summarize_cmd = app.add_subcommand("summarize", "Summarize an existing report.csv");
    std::string report_path;
    summarize_cmd->add_option("report", report_path, "report.csv from a previous run")
        ->required()
        ->check(CLI::ExistingFile);
    summarize_cmd->add_option("--group-by", flags.group_by, "Summary axes, comma separated");
    summarize_cmd->add_option("-o,--output-dir", flags.output_dir,
                              "Write summary files here as well");

    auto add_sweep = [&](CLI::App* cmd) {
        cmd->add_option("--data", sweep.data, "CSV dataset")->check(CLI::ExistingFile);
        cmd->add_option("--synthetic", sweep.synthetic,
                        "Synthetic fixture 'n_inliers,n_outliers,dim,spread,seed'");
        cmd->add_option("--label-column", sweep.label_column, "Label column name or index");
        cmd->add_option("--detector", sweep.detectors, "Detector kinds")->capture_default_str();
        cmd->add_option("--k", sweep.k, "Detector neighborhood size")->capture_default_str();
        add_common(cmd, flags);
    };
    auto* sweep_k = app.add_subcommand("sweep-k", "NA k sweep, k = 1 meaning NA off");
    add_sweep(sweep_k);
    sweep_k->add_option("--range", sweep.range, "k range 'a..b'")->default_str("1..100");

    auto* sweep_it = app.add_subcommand("sweep-iterations", "NA iteration sweep");
    add_sweep(sweep_it);
    sweep_it->add_option("--range", sweep.range, "iteration range 'a..b'")->default_str("0..10");
    sweep_it->add_option("--na-k", sweep.na_k, "NA neighborhood size")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    nbavg::set_max_threads(threads);

    try {
        if (run->parsed()) {
            auto cfg = nbavg::load_config(config_path);
            if (flags.seed) cfg.seed = *flags.seed;
            return execute(cfg, flags, {"detector,na_k,na_iterations", "dataset,detector"});
        }
        if (summarize_cmd->parsed()) {
            const auto report = nbavg::read_report_csv(report_path);
            const auto summaries =
                build_summaries(report, flags.group_by, {"detector,na_k,na_iterations"});
            print_summaries(summaries);
            if (!flags.output_dir.empty()) {
                std::ifstream in(report_path, std::ios::binary);
                std::ostringstream bytes;
                bytes << in.rdbuf();
                const auto hash = fmt::format("{:016x}", nbavg::fnv1a64(bytes.str()));
                nbavg::emit_reports(report, summaries, flags.output_dir, hash);
            }
            return 0;
        }
        if (sweep_k->parsed()) {
            auto cfg = sweep_config(sweep, flags);
            cfg.k_sweep = nbavg::parse_range(sweep.range.empty() ? "1..100" : sweep.range);
            if (flags.output_dir.empty()) cfg.output_dir = "results-sweep-k";
            return execute(cfg, flags, {"detector,na_k"});
        }
        if (sweep_it->parsed()) {
            auto cfg = sweep_config(sweep, flags);
            cfg.iteration_sweep = nbavg::parse_range(sweep.range.empty() ? "0..10" : sweep.range);
            cfg.iteration_sweep_k = sweep.na_k;
            if (flags.output_dir.empty()) cfg.output_dir = "results-sweep-iterations";
            return execute(cfg, flags, {"detector,na_iterations"});
        }
    } catch (const nbavg::Error& e) {
        fmt::print(stderr, "nbavg: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "nbavg: unexpected failure: {}\n", e.what());
        return 2;
    }
    return 0;
}
