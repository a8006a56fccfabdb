#include <algorithm>
#include <cmath>
#include <numeric>

#include "spatial_index.hpp"

namespace nbavg::detail {

namespace {
// Relative slack on the triangle-inequality bound; covers rounding in the
// centroid distance and radius so no candidate at the k-th distance is pruned.
constexpr double kBoundSlack = 1e-9;
}  // namespace

BallTree::BallTree(const Dataset& d, std::size_t leaf_size)
    : data_(d), leaf_size_(std::max<std::size_t>(leaf_size, 1)), order_(d.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * d.size() / leaf_size_ + 1);
    build(0, d.size());
}

std::size_t BallTree::build(std::size_t begin, std::size_t end) {
    const std::size_t dim = data_.dim();
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    centroids_.resize(centroids_.size() + dim, 0.0);

    double* center = centroids_.data() + id * dim;
    for (std::size_t p = begin; p < end; ++p) {
        const auto row = data_.row(order_[p]);
        for (std::size_t j = 0; j < dim; ++j) center[j] += row[j];
    }
    for (std::size_t j = 0; j < dim; ++j) center[j] /= static_cast<double>(end - begin);
    double radius = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
        radius = std::max(radius, squared_distance(centroid(id), data_.row(order_[p])));
    }
    nodes_[id].radius = std::sqrt(radius);

    if (end - begin <= leaf_size_) return id;
    if (!median_split(data_, order_, begin, end)) return id;

    const std::size_t mid = begin + (end - begin) / 2;
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double BallTree::lower_bound(std::size_t id, std::span<const double> q) const noexcept {
    const double to_center = std::sqrt(squared_distance(q, centroid(id)));
    const double radius = nodes_[id].radius;
    return to_center - radius - kBoundSlack * (to_center + radius);
}

void BallTree::query(std::size_t self, KnnHeap& heap) const {
    search(0, data_.row(self), self, heap);
}

void BallTree::search(std::size_t id, std::span<const double> q, std::size_t self,
                      KnnHeap& heap) const {
    const Node& node = nodes_[id];
    if (node.left == 0) {
        for (std::size_t p = node.begin; p < node.end; ++p) {
            const std::size_t j = order_[p];
            if (j != self) heap.offer(squared_distance(q, data_.row(j)), j);
        }
        return;
    }

    double bound_left = lower_bound(node.left, q);
    double bound_right = lower_bound(node.right, q);
    std::size_t first = node.left;
    std::size_t second = node.right;
    if (bound_right < bound_left) {
        std::swap(first, second);
        std::swap(bound_left, bound_right);
    }
    for (const auto& [child, bound] : {std::pair{first, bound_left}, std::pair{second, bound_right}}) {
        if (bound > 0.0 && heap.full() && bound * bound > heap.worst_squared()) continue;
        search(child, q, self, heap);
    }
}

}  // namespace nbavg::detail
