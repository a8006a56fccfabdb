#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nbavg/dataset.hpp"
#include "nbavg/detectors.hpp"

namespace nbavg {

/// Inclusive integer range, written "first..last" in config files.
struct Range {
    std::size_t first = 0;
    std::size_t last = 0;

    std::vector<std::size_t> values() const;
    bool operator==(const Range&) const = default;
};

/// Parses "a..b" or a single integer "a". Throws ParseError.
Range parse_range(std::string_view text);

struct SyntheticSpec {
    std::size_t n_inliers = 1000;
    std::size_t n_outliers = 50;
    std::size_t dim = 2;
    double spread = 1.0;
    std::uint64_t seed = 7;

    bool operator==(const SyntheticSpec&) const = default;
};

/// Either a CSV file or a synthetic fixture.
struct DatasetSource {
    std::string name;
    std::optional<std::filesystem::path> path;
    LabelColumn label_column;
    std::optional<SyntheticSpec> synthetic;

    Dataset load() const;
    /// "clusters-..." for synthetic sources, the file stem otherwise.
    std::string default_name() const;
};

/// "n_inliers,n_outliers,dim,spread,seed". Throws ParseError.
SyntheticSpec parse_synthetic_spec(std::string_view text);

/// A single NA setting. iterations == 0 means the detector output is used as is.
struct NASetting {
    std::size_t k = 100;
    std::size_t iterations = 1;
    bool reuse_graph = true;

    bool off() const noexcept { return iterations == 0; }
    bool operator==(const NASetting&) const = default;
};

struct EnsembleGroup {
    /// Detector labels or kind names, resolved against ExperimentConfig::detectors.
    std::vector<std::string> members;
};

struct ExperimentConfig {
    std::vector<DatasetSource> datasets;
    std::vector<DetectorConfig> detectors;
    std::vector<NASetting> na;
    std::optional<Range> k_sweep;
    std::optional<Range> iteration_sweep;
    std::size_t iteration_sweep_k = 100;
    std::vector<EnsembleGroup> ensemble_groups;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "results";

    void validate() const;

    /// Every NA setting evaluated per (dataset, detector): the explicit list,
    /// then the k sweep (k = 1 rendered as off), then the iteration sweep.
    /// Exact duplicates are dropped. Defaults to {off, k=100 x 1} when nothing
    /// is declared.
    std::vector<NASetting> na_grid() const;

    /// Normalized text form; equal configs give equal text.
    std::string canonical() const;
    /// FNV-1a 64 of canonical(), as 16 hex digits.
    std::string hash() const;
};

/// INI-style text: sections [experiment], [dataset], [detector], [na], [sweep],
/// [ensemble]; "key = value" lines; '#' starts a comment. Throws ParseError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace nbavg
