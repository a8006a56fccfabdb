#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nbavg/dataset.hpp"
#include "nbavg/detectors.hpp"
#include "nbavg/neighbors.hpp"

namespace nbavg {

struct NAConfig {
    std::size_t k = 100;
    std::size_t iterations = 1;
    bool reuse_graph = true;
};

/// One synchronous averaging pass: out[i] = (s[i] + sum of s over row i of g) / (k + 1).
std::vector<double> neighborhood_average(const NeighborGraph& g, std::span<const double> s);
ScoreVector neighborhood_average(const NeighborGraph& g, const ScoreVector& s);

/// `iterations` passes of neighborhood_average; zero returns the input.
std::vector<double> na_iterate(const NeighborGraph& g, std::span<const double> s,
                               std::size_t iterations);
ScoreVector na_iterate(const NeighborGraph& g, const ScoreVector& s, std::size_t iterations);

struct NAResult {
    ScoreVector scores;
    std::size_t k = 0;  // after clamping to N-1
    bool graph_reused = false;
};

/// Neighborhood averaging of a detector's output. An existing graph with at
/// least the (clamped) k columns is reused when cfg.reuse_graph is set;
/// otherwise a graph is built with knn_indexed.
NAResult apply_na(const Dataset& d, const ScoreVector& s, const NAConfig& cfg,
                  const NeighborGraph* existing_graph = nullptr);

}  // namespace nbavg
