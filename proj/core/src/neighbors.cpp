#include "nbavg/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "knn_heap.hpp"
#include "nbavg/error.hpp"
#include "parallel.hpp"
#include "spatial_index.hpp"

namespace nbavg {

NeighborGraph::NeighborGraph(std::size_t n, std::size_t k, std::vector<std::size_t> indices,
                             std::vector<double> distances)
    : n_(n), k_(k), indices_(std::move(indices)), distances_(std::move(distances)) {
    if (indices_.size() != n_ * k_ || distances_.size() != n_ * k_) {
        throw InvalidArgument(fmt::format("neighbor graph storage does not match {} x {}", n_, k_));
    }
}

NeighborGraph NeighborGraph::prefix(std::size_t k) const {
    if (k == 0 || k > k_) {
        throw InvalidArgument(fmt::format("cannot take a {}-column prefix of a k={} graph", k, k_));
    }
    if (k == k_) return *this;
    std::vector<std::size_t> indices(n_ * k);
    std::vector<double> distances(n_ * k);
    for (std::size_t i = 0; i < n_; ++i) {
        std::copy_n(indices_.begin() + static_cast<std::ptrdiff_t>(i * k_), k,
                    indices.begin() + static_cast<std::ptrdiff_t>(i * k));
        std::copy_n(distances_.begin() + static_cast<std::ptrdiff_t>(i * k_), k,
                    distances.begin() + static_cast<std::ptrdiff_t>(i * k));
    }
    return NeighborGraph(n_, k, std::move(indices), std::move(distances));
}

IndexKind select_index(std::size_t dim) noexcept {
    return dim < 20 ? IndexKind::kd_tree : IndexKind::ball_tree;
}

namespace {

void check_k(const Dataset& d, std::size_t k) {
    if (k < 1 || k + 1 > d.size()) {
        throw InvalidArgument(fmt::format("k = {} out of range [1, {}] for dataset '{}'", k,
                                          d.size() - 1, d.name()));
    }
}

template <typename QueryFn>
NeighborGraph build_graph(const Dataset& d, std::size_t k, QueryFn&& query) {
    const std::size_t n = d.size();
    std::vector<std::size_t> indices(n * k);
    std::vector<double> distances(n * k);
    detail::parallel_for(n, [&](std::size_t i) {
        const auto row = query(i);
        for (std::size_t r = 0; r < k; ++r) {
            indices[i * k + r] = row[r].index;
            distances[i * k + r] = std::sqrt(row[r].squared);
        }
    });
    return NeighborGraph(n, k, std::move(indices), std::move(distances));
}

}  // namespace

NeighborGraph knn_brute(const Dataset& d, std::size_t k) {
    check_k(d, k);
    const std::size_t n = d.size();
    return build_graph(d, k, [&](std::size_t i) {
        std::vector<detail::Candidate> all;
        all.reserve(n - 1);
        const auto q = d.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) all.push_back({detail::squared_distance(q, d.row(j)), j});
        }
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
        all.resize(k);
        return all;
    });
}

NeighborGraph knn_indexed(const Dataset& d, std::size_t k) {
    return knn_indexed(d, k, select_index(d.dim()));
}

NeighborGraph knn_indexed(const Dataset& d, std::size_t k, IndexKind kind) {
    check_k(d, k);
    auto search = [&](const auto& index) {
        return build_graph(d, k, [&](std::size_t i) {
            detail::KnnHeap heap(k);
            index.query(i, heap);
            return heap.take_sorted();
        });
    };
    if (kind == IndexKind::kd_tree) return search(detail::KdTree(d));
    return search(detail::BallTree(d));
}

std::vector<std::size_t> in_degree(const NeighborGraph& g) {
    std::vector<std::size_t> degree(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (const std::size_t j : g.neighbors(i)) ++degree[j];
    }
    return degree;
}

void write_graph_csv(const NeighborGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << "i,rank,neighbor,distance\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto nb = g.neighbors(i);
        const auto dist = g.distances(i);
        for (std::size_t r = 0; r < g.k(); ++r) {
            out << fmt::format("{},{},{},{:.17g}\n", i, r + 1, nb[r], dist[r]);
        }
    }
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace nbavg
