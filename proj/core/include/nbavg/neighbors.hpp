#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "nbavg/dataset.hpp"

namespace nbavg {

/// Directed k-NN graph. Row i lists the k nearest other objects of i ordered by
/// (distance, index) ascending; self never appears.
class NeighborGraph {
public:
    NeighborGraph() = default;
    NeighborGraph(std::size_t n, std::size_t k, std::vector<std::size_t> indices,
                  std::vector<double> distances);

    std::size_t size() const noexcept { return n_; }
    std::size_t k() const noexcept { return k_; }

    std::span<const std::size_t> neighbors(std::size_t i) const noexcept {
        return {indices_.data() + i * k_, k_};
    }
    std::span<const double> distances(std::size_t i) const noexcept {
        return {distances_.data() + i * k_, k_};
    }
    /// Distance from i to its k-th neighbor.
    double kth_distance(std::size_t i) const noexcept { return distances_[i * k_ + k_ - 1]; }

    /// Graph restricted to the first `k` neighbors of every row.
    NeighborGraph prefix(std::size_t k) const;

    bool operator==(const NeighborGraph&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t k_ = 0;
    std::vector<std::size_t> indices_;
    std::vector<double> distances_;
};

enum class IndexKind { kd_tree, ball_tree };

/// KD-tree below 20 dimensions, Ball-tree from 20 upward.
IndexKind select_index(std::size_t dim) noexcept;

/// Exact k-NN by full scan. Requires 1 <= k <= N-1.
NeighborGraph knn_brute(const Dataset& d, std::size_t k);

/// Exact k-NN through a spatial index chosen by select_index(). Output is
/// identical to knn_brute, including tie order.
NeighborGraph knn_indexed(const Dataset& d, std::size_t k);
NeighborGraph knn_indexed(const Dataset& d, std::size_t k, IndexKind kind);

/// Entry i counts the rows of `g` that contain i.
std::vector<std::size_t> in_degree(const NeighborGraph& g);

/// Debug dump: header "i,rank,neighbor,distance" then one line per edge.
void write_graph_csv(const NeighborGraph& g, const std::filesystem::path& path);

}  // namespace nbavg
