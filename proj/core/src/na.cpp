#include "nbavg/na.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "nbavg/error.hpp"
#include "parallel.hpp"

namespace nbavg {

std::vector<double> neighborhood_average(const NeighborGraph& g, std::span<const double> s) {
    if (g.size() != s.size()) {
        throw InvalidArgument(
            fmt::format("{} scores for a neighbor graph over {} objects", s.size(), g.size()));
    }
    const double weight = 1.0 / static_cast<double>(g.k() + 1);
    std::vector<double> out(s.size());
    detail::parallel_for(s.size(), [&](std::size_t i) {
        double sum = s[i];
        double lo = s[i];
        double hi = s[i];
        for (const std::size_t j : g.neighbors(i)) {
            sum += s[j];
            lo = std::min(lo, s[j]);
            hi = std::max(hi, s[j]);
        }
        // Rounding can push the mean a few ulps past the values it averages;
        // clamping keeps constants exact and the output inside the input range.
        out[i] = std::clamp(sum * weight, lo, hi);
    }, 1024);
    return out;
}

ScoreVector neighborhood_average(const NeighborGraph& g, const ScoreVector& s) {
    return na_iterate(g, s, 1);
}

std::vector<double> na_iterate(const NeighborGraph& g, std::span<const double> s,
                               std::size_t iterations) {
    if (g.size() != s.size()) {
        throw InvalidArgument(
            fmt::format("{} scores for a neighbor graph over {} objects", s.size(), g.size()));
    }
    std::vector<double> current(s.begin(), s.end());
    for (std::size_t t = 0; t < iterations; ++t) current = neighborhood_average(g, current);
    return current;
}

ScoreVector na_iterate(const NeighborGraph& g, const ScoreVector& s, std::size_t iterations) {
    ScoreVector out{na_iterate(g, s.scores, iterations), s.detector_id, s.params};
    if (iterations > 0) out.detector_id += fmt::format("+na-k{}-i{}", g.k(), iterations);
    return out;
}

NAResult apply_na(const Dataset& d, const ScoreVector& s, const NAConfig& cfg,
                  const NeighborGraph* existing_graph) {
    if (s.size() != d.size()) {
        throw InvalidArgument(fmt::format("{} scores for dataset '{}' with {} objects", s.size(),
                                          d.name(), d.size()));
    }
    if (d.size() < 2) throw InvalidArgument("neighborhood averaging needs at least two objects");

    NAResult result;
    result.k = std::clamp<std::size_t>(cfg.k, 1, d.size() - 1);
    if (cfg.reuse_graph && existing_graph != nullptr && existing_graph->size() == d.size() &&
        existing_graph->k() >= result.k) {
        result.graph_reused = true;
        if (existing_graph->k() == result.k) {
            result.scores = na_iterate(*existing_graph, s, cfg.iterations);
        } else {
            result.scores = na_iterate(existing_graph->prefix(result.k), s, cfg.iterations);
        }
    } else {
        result.scores = na_iterate(knn_indexed(d, result.k), s, cfg.iterations);
    }
    return result;
}

}  // namespace nbavg
