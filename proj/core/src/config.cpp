#include "nbavg/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "nbavg/error.hpp"

namespace nbavg {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_as(std::string_view text) {
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

struct Line {
    std::size_t number;
    std::string_view key;
    std::string_view value;
};

std::size_t to_count(const Line& line) {
    const auto v = parse_as<std::size_t>(line.value);
    if (!v) {
        throw ParseError(fmt::format("line {}: '{}' expects a non-negative integer, got '{}'",
                                     line.number, line.key, line.value),
                         line.number);
    }
    return *v;
}

std::uint64_t to_u64(const Line& line) {
    const auto v = parse_as<std::uint64_t>(line.value);
    if (!v) {
        throw ParseError(fmt::format("line {}: '{}' expects an unsigned integer, got '{}'",
                                     line.number, line.key, line.value),
                         line.number);
    }
    return *v;
}

double to_real(const Line& line) {
    const auto v = parse_as<double>(line.value);
    if (!v) {
        throw ParseError(fmt::format("line {}: '{}' expects a number, got '{}'", line.number,
                                     line.key, line.value),
                         line.number);
    }
    return *v;
}

bool to_bool(const Line& line) {
    if (line.value == "true" || line.value == "yes" || line.value == "1") return true;
    if (line.value == "false" || line.value == "no" || line.value == "0") return false;
    throw ParseError(
        fmt::format("line {}: '{}' expects true/false, got '{}'", line.number, line.key, line.value),
        line.number);
}

[[noreturn]] void unknown_key(std::string_view section, const Line& line) {
    throw ParseError(
        fmt::format("line {}: unknown key '{}' in [{}]", line.number, line.key, section),
        line.number);
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        const auto item = trim(text.substr(start, comma - start));
        if (!item.empty()) items.emplace_back(item);
        start = comma + 1;
    }
    return items;
}

SyntheticSpec parse_synthetic(const Line& line) {
    try {
        return parse_synthetic_spec(line.value);
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("line {}: {}", line.number, e.what()), line.number);
    }
}

std::string synthetic_name(const SyntheticSpec& s) {
    return fmt::format("clusters-{}-{}-{}-s{}", s.n_inliers, s.n_outliers, s.dim, s.seed);
}

}  // namespace

SyntheticSpec parse_synthetic_spec(std::string_view text) {
    const auto parts = split_list(text);
    const auto n_in = parts.size() == 5 ? parse_as<std::size_t>(parts[0]) : std::nullopt;
    const auto n_out = parts.size() == 5 ? parse_as<std::size_t>(parts[1]) : std::nullopt;
    const auto dim = parts.size() == 5 ? parse_as<std::size_t>(parts[2]) : std::nullopt;
    const auto spread = parts.size() == 5 ? parse_as<double>(parts[3]) : std::nullopt;
    const auto seed = parts.size() == 5 ? parse_as<std::uint64_t>(parts[4]) : std::nullopt;
    if (!n_in || !n_out || !dim || !spread || !seed) {
        throw ParseError(fmt::format(
            "synthetic expects 'n_inliers,n_outliers,dim,spread,seed', got '{}'", text));
    }
    return {*n_in, *n_out, *dim, *spread, *seed};
}

std::vector<std::size_t> Range::values() const {
    std::vector<std::size_t> out;
    for (std::size_t v = first; v <= last; ++v) out.push_back(v);
    return out;
}

Range parse_range(std::string_view text) {
    text = trim(text);
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        const auto v = parse_as<std::size_t>(text);
        if (!v) throw ParseError(fmt::format("'{}' is not a range", text));
        return {*v, *v};
    }
    const auto first = parse_as<std::size_t>(text.substr(0, dots));
    const auto last = parse_as<std::size_t>(text.substr(dots + 2));
    if (!first || !last) throw ParseError(fmt::format("'{}' is not a range", text));
    if (*first > *last) throw ParseError(fmt::format("range '{}' is empty", text));
    return {*first, *last};
}

std::string DatasetSource::default_name() const {
    if (synthetic) return synthetic_name(*synthetic);
    if (path) return path->stem().string();
    return {};
}

Dataset DatasetSource::load() const {
    if (synthetic) {
        const auto& s = *synthetic;
        Dataset d = synth_clusters_with_outliers(s.n_inliers, s.n_outliers, s.dim, s.spread, s.seed);
        return name.empty() ? d : d.with_name(name);
    }
    if (!path) throw InvalidArgument(fmt::format("dataset '{}' has neither path nor synthetic", name));
    Dataset d = load_csv(*path, label_column);
    return name.empty() ? d : d.with_name(name);
}

void ExperimentConfig::validate() const {
    if (datasets.empty()) throw InvalidArgument("config declares no datasets");
    if (detectors.empty()) throw InvalidArgument("config declares no detectors");

    std::set<std::string> names;
    for (const auto& ds : datasets) {
        if (!ds.synthetic && !ds.path) {
            throw InvalidArgument(fmt::format("dataset '{}' has neither path nor synthetic", ds.name));
        }
        if (ds.synthetic && !(ds.synthetic->spread > 0.0)) {
            throw InvalidArgument(fmt::format("dataset '{}' needs spread > 0", ds.name));
        }
        if (!names.insert(ds.name).second) {
            throw InvalidArgument(fmt::format("duplicate dataset name '{}'", ds.name));
        }
    }
    std::set<std::string> labels;
    for (const auto& det : detectors) {
        det.validate();
        if (!labels.insert(det.label()).second) {
            throw InvalidArgument(fmt::format("duplicate detector '{}'", det.label()));
        }
    }
    for (const auto& na_setting : na) {
        if (!na_setting.off() && na_setting.k < 1) throw InvalidArgument("na k must be >= 1");
    }
    if (k_sweep && (k_sweep->first < 1 || k_sweep->first > k_sweep->last)) {
        throw InvalidArgument("k sweep must be a non-empty range starting at 1 or more");
    }
    if (iteration_sweep && iteration_sweep->first > iteration_sweep->last) {
        throw InvalidArgument("iteration sweep must be a non-empty range");
    }
    if (iteration_sweep && iteration_sweep_k < 1) throw InvalidArgument("iterations_k must be >= 1");
    for (const auto& group : ensemble_groups) {
        if (group.members.empty()) throw InvalidArgument("ensemble group has no members");
        for (const auto& member : group.members) {
            const bool found = std::any_of(detectors.begin(), detectors.end(), [&](const auto& d) {
                return d.label() == member || to_string(d.kind) == member;
            });
            if (!found) {
                throw InvalidArgument(
                    fmt::format("ensemble member '{}' matches no declared detector", member));
            }
        }
    }
}

std::vector<NASetting> ExperimentConfig::na_grid() const {
    std::vector<NASetting> grid;
    auto add = [&](NASetting s) {
        if (s.off()) s.reuse_graph = true;
        if (std::find(grid.begin(), grid.end(), s) == grid.end()) grid.push_back(s);
    };
    for (const auto& s : na) add(s);
    if (k_sweep) {
        for (const auto k : k_sweep->values()) add({k, k == 1 ? std::size_t{0} : std::size_t{1}, true});
    }
    if (iteration_sweep) {
        for (const auto it : iteration_sweep->values()) add({iteration_sweep_k, it, true});
    }
    if (grid.empty()) {
        add({0, 0, true});
        add({100, 1, true});
    }
    return grid;
}

std::string ExperimentConfig::canonical() const {
    std::string out = fmt::format("seed={}\n", seed);
    for (const auto& ds : datasets) {
        out += fmt::format("dataset name={}", ds.name);
        if (ds.path) out += fmt::format(" path={}", ds.path->generic_string());
        if (const auto* index = std::get_if<std::size_t>(&ds.label_column)) {
            out += fmt::format(" label_index={}", *index);
        } else if (const auto* column = std::get_if<std::string>(&ds.label_column)) {
            out += fmt::format(" label_name={}", *column);
        }
        if (ds.synthetic) {
            const auto& s = *ds.synthetic;
            out += fmt::format(" synthetic={},{},{},{:.17g},{}", s.n_inliers, s.n_outliers, s.dim,
                               s.spread, s.seed);
        }
        out += '\n';
    }
    for (const auto& det : detectors) {
        out += fmt::format("detector {} k={} trees={} subsample={} vf={:.17g} mod_it={} seed={}\n",
                           to_string(det.kind), det.k, det.n_trees, det.subsample,
                           det.variance_fraction, det.mod_iterations, det.seed);
    }
    for (const auto& s : na) {
        out += fmt::format("na k={} iterations={} reuse={}\n", s.k, s.iterations, s.reuse_graph);
    }
    if (k_sweep) out += fmt::format("k_sweep={}..{}\n", k_sweep->first, k_sweep->last);
    if (iteration_sweep) {
        out += fmt::format("iteration_sweep={}..{} k={}\n", iteration_sweep->first,
                           iteration_sweep->last, iteration_sweep_k);
    }
    for (const auto& group : ensemble_groups) {
        out += "ensemble";
        for (const auto& m : group.members) out += " " + m;
        out += '\n';
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string ExperimentConfig::hash() const { return fmt::format("{:016x}", fnv1a64(canonical())); }

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        raw = trim(raw);
        if (raw.empty()) continue;

        if (raw.front() == '[') {
            if (raw.back() != ']') {
                throw ParseError(fmt::format("line {}: unterminated section header", line_no), line_no);
            }
            section = std::string(trim(raw.substr(1, raw.size() - 2)));
            if (section == "dataset") {
                cfg.datasets.emplace_back();
            } else if (section == "detector") {
                cfg.detectors.emplace_back();
            } else if (section == "na") {
                cfg.na.emplace_back();
            } else if (section == "ensemble") {
                cfg.ensemble_groups.emplace_back();
            } else if (section != "experiment" && section != "sweep") {
                throw ParseError(fmt::format("line {}: unknown section [{}]", line_no, section),
                                 line_no);
            }
            continue;
        }

        const auto eq = raw.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(fmt::format("line {}: expected 'key = value'", line_no), line_no);
        }
        const Line line{line_no, trim(raw.substr(0, eq)), trim(raw.substr(eq + 1))};
        if (section.empty()) {
            throw ParseError(fmt::format("line {}: '{}' appears before any section", line_no, line.key),
                             line_no);
        }

        if (section == "experiment") {
            if (line.key == "seed") {
                cfg.seed = to_u64(line);
            } else if (line.key == "output_dir") {
                cfg.output_dir = std::string(line.value);
            } else {
                unknown_key(section, line);
            }
        } else if (section == "dataset") {
            auto& ds = cfg.datasets.back();
            if (line.key == "name") {
                ds.name = std::string(line.value);
            } else if (line.key == "path") {
                ds.path = std::string(line.value);
            } else if (line.key == "label_column") {
                if (const auto index = parse_as<std::size_t>(line.value)) {
                    ds.label_column = *index;
                } else {
                    ds.label_column = std::string(line.value);
                }
            } else if (line.key == "synthetic") {
                ds.synthetic = parse_synthetic(line);
            } else {
                unknown_key(section, line);
            }
        } else if (section == "detector") {
            auto& det = cfg.detectors.back();
            if (line.key == "name") {
                try {
                    det.kind = parse_detector_kind(line.value);
                } catch (const InvalidArgument& e) {
                    throw ParseError(fmt::format("line {}: {}", line_no, e.what()), line_no);
                }
            } else if (line.key == "k") {
                det.k = to_count(line);
            } else if (line.key == "n_trees") {
                det.n_trees = to_count(line);
            } else if (line.key == "subsample") {
                det.subsample = to_count(line);
            } else if (line.key == "variance_fraction") {
                det.variance_fraction = to_real(line);
            } else if (line.key == "mod_iterations") {
                det.mod_iterations = to_count(line);
            } else if (line.key == "seed") {
                det.seed = to_u64(line);
            } else {
                unknown_key(section, line);
            }
        } else if (section == "na") {
            auto& s = cfg.na.back();
            if (line.key == "k") {
                s.k = to_count(line);
            } else if (line.key == "iterations") {
                s.iterations = to_count(line);
            } else if (line.key == "reuse_graph") {
                s.reuse_graph = to_bool(line);
            } else if (line.key == "off") {
                if (to_bool(line)) s = NASetting{0, 0, true};
            } else {
                unknown_key(section, line);
            }
        } else if (section == "sweep") {
            try {
                if (line.key == "k") {
                    cfg.k_sweep = line.value == "default" ? Range{1, 100} : parse_range(line.value);
                } else if (line.key == "iterations") {
                    cfg.iteration_sweep =
                        line.value == "default" ? Range{0, 10} : parse_range(line.value);
                } else if (line.key == "iterations_k") {
                    cfg.iteration_sweep_k = to_count(line);
                } else {
                    unknown_key(section, line);
                }
            } catch (const ParseError& e) {
                if (e.row() != 0) throw;
                throw ParseError(fmt::format("line {}: {}", line_no, e.what()), line_no);
            }
        } else if (section == "ensemble") {
            if (line.key == "members") {
                cfg.ensemble_groups.back().members = split_list(line.value);
            } else {
                unknown_key(section, line);
            }
        }
    }

    for (auto& ds : cfg.datasets) {
        if (ds.name.empty()) ds.name = ds.default_name();
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    ExperimentConfig cfg = parse_config(buffer.str());
    const auto base = path.parent_path();
    for (auto& ds : cfg.datasets) {
        if (ds.path && ds.path->is_relative()) ds.path = base / *ds.path;
    }
    return cfg;
}

}  // namespace nbavg
