#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "nbavg/error.hpp"
#include "nbavg/experiment.hpp"

namespace nbavg {

namespace {

constexpr std::string_view kReportHeader =
    "dataset,detector,na_k,na_iterations,auc,precision,recall,f1_harmonic,f1_paper,"
    "detector_time_s,na_time_s,graph_reused";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (const char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) throw ParseError(fmt::format("line {}: unterminated quote", line_no), line_no);
    fields.push_back(std::move(field));
    return fields;
}

std::string number(double x) {
    if (std::isnan(x)) return "nan";
    return fmt::format("{:.17g}", x);
}

double parse_real(const std::string& text, std::size_t line_no, std::size_t column) {
    if (text == "nan") return kNaN;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError(fmt::format("line {}, column {}: '{}' is not a number", line_no, column, text),
                         line_no, column);
    }
    return value;
}

std::size_t parse_count(const std::string& text, std::size_t line_no, std::size_t column) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError(
            fmt::format("line {}, column {}: '{}' is not a count", line_no, column, text), line_no,
            column);
    }
    return value;
}

std::string sanitize(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '.' || c == '-' || c == '+' || c == '_';
        if (!ok) c = '_';
    }
    return out;
}

std::string axis_value(const ReportRow& row, Axis axis) {
    switch (axis) {
        case Axis::dataset:
            return row.dataset;
        case Axis::detector:
            return row.detector;
        case Axis::na_k:
            return std::to_string(row.na_k);
        case Axis::na_iterations:
            return std::to_string(row.na_iterations);
    }
    return {};
}

struct Mean {
    double sum = 0.0;
    std::size_t count = 0;
    void add(double x) {
        if (std::isnan(x)) return;
        sum += x;
        ++count;
    }
    double value() const { return count == 0 ? kNaN : sum / static_cast<double>(count); }
};

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& body) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : body) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == 0) {
                out += fmt::format("{:<{}}", cells[c], width[c]);
            } else {
                out += fmt::format("  {:>{}}", cells[c], width[c]);
            }
        }
        out += '\n';
    };
    emit(header);
    std::size_t total = 0;
    for (const auto w : width) total += w + 2;
    out += std::string(total - 2, '-') + '\n';
    for (const auto& row : body) emit(row);
    return out;
}

std::string fixed(double x, int digits = 4) {
    return std::isnan(x) ? std::string("-") : fmt::format("{:.{}f}", x, digits);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

std::string summary_csv(const Summary& s) {
    std::string out;
    for (const auto axis : s.group_by) out += std::string(to_string(axis)) + ',';
    out += "count,failed,auc,precision,recall,f1_harmonic,f1_paper,detector_time_s,na_time_s\n";
    for (const auto& g : s.groups) {
        for (const auto& k : g.key) out += csv_field(k) + ',';
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", g.count, g.failed, number(g.auc),
                           number(g.precision), number(g.recall), number(g.f1_harmonic),
                           number(g.f1_paper), number(g.detector_time_s), number(g.na_time_s));
    }
    return out;
}

std::string triplets_csv(const Summary& s) {
    std::string out =
        "detector,datasets,auc_original,auc_na_default,auc_na_best,f1_original,f1_na_default,"
        "f1_na_best,auc_diff_default,auc_diff_best\n";
    for (const auto& t : s.triplets) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", csv_field(t.detector), t.datasets,
                           number(t.auc_original), number(t.auc_na_default), number(t.auc_na_best),
                           number(t.f1_original), number(t.f1_na_default), number(t.f1_na_best),
                           number(t.auc_diff_default), number(t.auc_diff_best));
    }
    return out;
}

std::string summary_stem(const Summary& s) {
    std::string stem = "summary";
    if (s.group_by.empty()) return stem + "_all";
    for (std::size_t a = 0; a < s.group_by.size(); ++a) {
        stem += (a ? "-" : "_") + std::string(to_string(s.group_by[a]));
    }
    return stem;
}

}  // namespace

void write_report_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    std::string text(kReportHeader);
    text += '\n';
    for (const auto& r : report.rows) {
        text += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(r.dataset),
                            csv_field(r.detector), r.na_k, r.na_iterations, number(r.auc),
                            number(r.precision), number(r.recall), number(r.f1_harmonic),
                            number(r.f1_paper), number(r.detector_time_s), number(r.na_time_s),
                            r.graph_reused ? 1 : 0);
    }
    write_text(path, text);
}

ExperimentReport read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open report '{}'", path.string()));
    ExperimentReport report;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kReportHeader) {
                throw ParseError(fmt::format("{}: unexpected report header", path.string()), line_no);
            }
            header_seen = true;
            continue;
        }
        const auto f = split_csv_line(line, line_no);
        if (f.size() != 12) {
            throw ParseError(fmt::format("line {}: expected 12 fields, got {}", line_no, f.size()),
                             line_no);
        }
        ReportRow row;
        row.dataset = f[0];
        row.detector = f[1];
        row.na_k = parse_count(f[2], line_no, 3);
        row.na_iterations = parse_count(f[3], line_no, 4);
        row.auc = parse_real(f[4], line_no, 5);
        row.precision = parse_real(f[5], line_no, 6);
        row.recall = parse_real(f[6], line_no, 7);
        row.f1_harmonic = parse_real(f[7], line_no, 8);
        row.f1_paper = parse_real(f[8], line_no, 9);
        row.detector_time_s = parse_real(f[9], line_no, 10);
        row.na_time_s = parse_real(f[10], line_no, 11);
        if (f[11] != "0" && f[11] != "1") {
            throw ParseError(fmt::format("line {}: graph_reused must be 0 or 1", line_no), line_no, 12);
        }
        row.graph_reused = f[11] == "1";
        if (std::isnan(row.auc)) row.error = "failed";
        report.rows.push_back(std::move(row));
    }
    if (!header_seen) throw ParseError(fmt::format("{}: empty report", path.string()));
    return report;
}

std::string_view to_string(Axis axis) noexcept {
    switch (axis) {
        case Axis::dataset:
            return "dataset";
        case Axis::detector:
            return "detector";
        case Axis::na_k:
            return "na_k";
        case Axis::na_iterations:
            return "na_iterations";
    }
    return "unknown";
}

Axis parse_axis(std::string_view name) {
    for (const auto axis : {Axis::dataset, Axis::detector, Axis::na_k, Axis::na_iterations}) {
        if (to_string(axis) == name) return axis;
    }
    throw InvalidArgument(fmt::format(
        "unknown axis '{}' (expected dataset, detector, na_k or na_iterations)", name));
}

std::vector<Axis> parse_axes(std::string_view list) {
    std::vector<Axis> axes;
    std::size_t start = 0;
    while (start <= list.size()) {
        auto comma = list.find(',', start);
        if (comma == std::string_view::npos) comma = list.size();
        const auto item = list.substr(start, comma - start);
        if (!item.empty()) axes.push_back(parse_axis(item));
        start = comma + 1;
    }
    return axes;
}

Summary summarize(const ExperimentReport& report, std::span<const Axis> group_by,
                  std::size_t default_k) {
    if (report.rows.empty()) throw InvalidArgument("cannot summarize an empty report");
    ExperimentReport sorted = report;
    sorted.sort_canonical();

    Summary summary;
    summary.group_by.assign(group_by.begin(), group_by.end());

    struct Accumulator {
        std::size_t count = 0;
        std::size_t failed = 0;
        Mean auc, precision, recall, f1_harmonic, f1_paper, detector_time, na_time;
    };
    std::vector<std::vector<std::string>> order;
    std::map<std::vector<std::string>, Accumulator> groups;
    for (const auto& row : sorted.rows) {
        std::vector<std::string> key;
        for (const auto axis : group_by) key.push_back(axis_value(row, axis));
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        Accumulator& acc = it->second;
        ++acc.count;
        if (row.failed()) {
            ++acc.failed;
            continue;
        }
        acc.auc.add(row.auc);
        acc.precision.add(row.precision);
        acc.recall.add(row.recall);
        acc.f1_harmonic.add(row.f1_harmonic);
        acc.f1_paper.add(row.f1_paper);
        acc.detector_time.add(row.detector_time_s);
        acc.na_time.add(row.na_time_s);
    }
    for (const auto& key : order) {
        const Accumulator& acc = groups.at(key);
        summary.groups.push_back({key, acc.count, acc.failed, acc.auc.value(),
                                  acc.precision.value(), acc.recall.value(),
                                  acc.f1_harmonic.value(), acc.f1_paper.value(),
                                  acc.detector_time.value(), acc.na_time.value()});
    }

    // Per-detector triplets over datasets.
    std::vector<std::string> detectors;
    for (const auto& row : sorted.rows) {
        if (std::find(detectors.begin(), detectors.end(), row.detector) == detectors.end()) {
            detectors.push_back(row.detector);
        }
    }
    std::sort(detectors.begin(), detectors.end());
    for (const auto& detector : detectors) {
        std::vector<std::string> datasets;
        for (const auto& row : sorted.rows) {
            if (row.detector == detector &&
                std::find(datasets.begin(), datasets.end(), row.dataset) == datasets.end()) {
                datasets.push_back(row.dataset);
            }
        }
        Mean auc_orig, auc_def, auc_best, f1_orig, f1_def, f1_best;
        for (const auto& dataset : datasets) {
            const ReportRow* original = nullptr;
            const ReportRow* by_default = nullptr;
            const ReportRow* best = nullptr;
            for (const auto& row : sorted.rows) {
                if (row.detector != detector || row.dataset != dataset || row.failed()) continue;
                if (row.na_iterations == 0 && (!original || row.na_k < original->na_k)) original = &row;
                if (row.na_iterations == 1 && row.na_k == default_k) by_default = &row;
                if (!best || row.auc > best->auc) best = &row;
            }
            if (original) {
                auc_orig.add(original->auc);
                f1_orig.add(original->f1_paper);
            }
            if (by_default) {
                auc_def.add(by_default->auc);
                f1_def.add(by_default->f1_paper);
            }
            if (best) {
                auc_best.add(best->auc);
                f1_best.add(best->f1_paper);
            }
        }
        DetectorTriplet t;
        t.detector = detector;
        t.datasets = datasets.size();
        t.auc_original = auc_orig.value();
        t.auc_na_default = auc_def.value();
        t.auc_na_best = auc_best.value();
        t.f1_original = f1_orig.value();
        t.f1_na_default = f1_def.value();
        t.f1_na_best = f1_best.value();
        t.auc_diff_default = t.auc_na_default - t.auc_original;
        t.auc_diff_best = t.auc_na_best - t.auc_original;
        summary.triplets.push_back(std::move(t));
    }
    return summary;
}

std::string format_summary(const Summary& s) {
    std::vector<std::string> header;
    for (const auto axis : s.group_by) header.emplace_back(to_string(axis));
    for (const char* name : {"n", "failed", "auc", "precision", "recall", "f1_harm", "f1_avg",
                             "det_s", "na_s"}) {
        header.emplace_back(name);
    }
    std::vector<std::vector<std::string>> body;
    for (const auto& g : s.groups) {
        std::vector<std::string> row = g.key;
        row.push_back(std::to_string(g.count));
        row.push_back(std::to_string(g.failed));
        row.push_back(fixed(g.auc));
        row.push_back(fixed(g.precision));
        row.push_back(fixed(g.recall));
        row.push_back(fixed(g.f1_harmonic));
        row.push_back(fixed(g.f1_paper));
        row.push_back(fixed(g.detector_time_s, 5));
        row.push_back(fixed(g.na_time_s, 5));
        body.push_back(std::move(row));
    }
    if (s.group_by.empty() && !body.empty()) body.front().insert(body.front().begin(), {});
    if (s.group_by.empty()) header.insert(header.begin(), "all");
    return render_table(header, body);
}

std::string format_triplets(const Summary& s) {
    const std::vector<std::string> header = {"detector", "datasets",   "auc_orig", "auc_na_def",
                                             "auc_na_best", "f1_orig", "f1_na_def", "f1_na_best",
                                             "diff_def",   "diff_best"};
    std::vector<std::vector<std::string>> body;
    for (const auto& t : s.triplets) {
        body.push_back({t.detector, std::to_string(t.datasets), fixed(t.auc_original, 2),
                        fixed(t.auc_na_default, 2), fixed(t.auc_na_best, 2), fixed(t.f1_original, 2),
                        fixed(t.f1_na_default, 2), fixed(t.f1_na_best, 2),
                        fixed(t.auc_diff_default, 2), fixed(t.auc_diff_best, 2)});
    }
    return render_table(header, body);
}

std::vector<std::filesystem::path> emit_reports(const ExperimentReport& report,
                                                std::span<const Summary> summaries,
                                                const std::filesystem::path& output_dir,
                                                std::string_view config_hash) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create '{}': {}", output_dir.string(), ec.message()));
    }

    std::vector<fs::path> artifacts;
    write_report_csv(report, output_dir / "report.csv");
    artifacts.emplace_back("report.csv");

    if (report.has_errors()) {
        std::string text = "dataset,detector,na_k,na_iterations,error\n";
        for (const auto& r : report.rows) {
            if (!r.failed()) continue;
            text += fmt::format("{},{},{},{},{}\n", csv_field(r.dataset), csv_field(r.detector),
                                r.na_k, r.na_iterations, csv_field(r.error));
        }
        write_text(output_dir / "errors.csv", text);
        artifacts.emplace_back("errors.csv");
    }

    for (const auto& s : summaries) {
        const std::string stem = summary_stem(s);
        write_text(output_dir / (stem + ".csv"), summary_csv(s));
        write_text(output_dir / (stem + ".txt"), format_summary(s));
        artifacts.emplace_back(stem + ".csv");
        artifacts.emplace_back(stem + ".txt");
    }
    if (!summaries.empty()) {
        write_text(output_dir / "detectors.csv", triplets_csv(summaries.front()));
        write_text(output_dir / "detectors.txt", format_triplets(summaries.front()));
        artifacts.emplace_back("detectors.csv");
        artifacts.emplace_back("detectors.txt");
    }

    bool roc_dir = false;
    for (const auto& r : report.rows) {
        if (r.roc.empty()) continue;
        if (!roc_dir) {
            fs::create_directories(output_dir / "roc", ec);
            if (ec) throw IoError(fmt::format("cannot create roc directory: {}", ec.message()));
            roc_dir = true;
        }
        const fs::path rel = fs::path("roc") / fmt::format("{}__{}__k{}__it{}.csv", sanitize(r.dataset),
                                                            sanitize(r.detector), r.na_k,
                                                            r.na_iterations);
        write_roc_csv(r.roc, output_dir / rel);
        artifacts.push_back(rel);
    }

    std::sort(artifacts.begin(), artifacts.end());
    std::string manifest = fmt::format("# nbavg manifest\nconfig_hash\t{}\n", config_hash);
    for (const auto& a : artifacts) manifest += fmt::format("{}\t{}\n", a.generic_string(), config_hash);
    write_text(output_dir / "manifest.txt", manifest);
    artifacts.emplace_back("manifest.txt");
    return artifacts;
}

}  // namespace nbavg
