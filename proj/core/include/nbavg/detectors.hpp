#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nbavg/dataset.hpp"
#include "nbavg/neighbors.hpp"

namespace nbavg {

enum class DetectorKind { knn, avg_knn, odin, lof, mod, abod, iforest, pcad, copod };

std::string_view to_string(DetectorKind kind) noexcept;
/// Accepts the enum spellings ("knn", "avg_knn", ...). Throws InvalidArgument.
DetectorKind parse_detector_kind(std::string_view name);
/// True for detectors whose scoring is built on the k-NN graph of the data.
bool uses_knn_graph(DetectorKind kind) noexcept;

struct DetectorConfig {
    DetectorKind kind = DetectorKind::knn;
    std::size_t k = 10;
    std::size_t n_trees = 100;
    std::size_t subsample = 256;
    double variance_fraction = 0.9;
    std::size_t mod_iterations = 3;
    std::uint64_t seed = 0;

    void validate() const;
    /// Stable, file-name safe identifier carrying the relevant parameters,
    /// e.g. "lof-k40", "iforest-t100-s256", "copod".
    std::string label() const;

    bool operator==(const DetectorConfig&) const = default;
};

/// One score per object; larger means more outlying for every detector here.
struct ScoreVector {
    std::vector<double> scores;
    std::string detector_id;
    DetectorConfig params;

    std::size_t size() const noexcept { return scores.size(); }
};

ScoreVector knn_score(const Dataset& d, const NeighborGraph& g);
ScoreVector avg_knn_score(const Dataset& d, const NeighborGraph& g);
/// 1 / (1 + in-degree).
ScoreVector odin_score(const Dataset& d, const NeighborGraph& g);
ScoreVector lof_score(const Dataset& d, const NeighborGraph& g);
/// Negated variance of the weighted cosine statistic over neighbor pairs. Needs k >= 2.
ScoreVector abod_score(const Dataset& d, const NeighborGraph& g);

/// Mean-shift displacement after `iterations` rounds of moving every object to
/// the mean of its k nearest neighbors (graph rebuilt each round).
ScoreVector mod_score(const Dataset& d, std::size_t k, std::size_t iterations = 3);
/// As above, with the first round using `initial` (a graph already built on `d`).
ScoreVector mod_score(const Dataset& d, const NeighborGraph& initial, std::size_t iterations);

ScoreVector iforest_score(const Dataset& d, const DetectorConfig& cfg);
ScoreVector pcad_score(const Dataset& d, const DetectorConfig& cfg);
ScoreVector copod_score(const Dataset& d);

/// Scores plus the k-NN graph the detector built, when it built one.
struct Detection {
    ScoreVector scores;
    std::optional<NeighborGraph> graph;
};

/// Dispatches on cfg.kind. Graph-based detectors get a graph from knn_indexed
/// with k = cfg.k, which is returned for reuse.
Detection run_detector(const Dataset& d, const DetectorConfig& cfg);

}  // namespace nbavg
