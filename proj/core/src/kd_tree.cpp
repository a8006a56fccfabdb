#include <algorithm>
#include <numeric>

#include "spatial_index.hpp"

namespace nbavg::detail {

std::optional<std::size_t> median_split(const Dataset& d, std::vector<std::size_t>& order,
                                        std::size_t begin, std::size_t end) {
    std::size_t best_dim = 0;
    double best_spread = 0.0;
    for (std::size_t j = 0; j < d.dim(); ++j) {
        double lo = d.at(order[begin], j);
        double hi = lo;
        for (std::size_t p = begin + 1; p < end; ++p) {
            const double x = d.at(order[p], j);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = j;
        }
    }
    if (best_spread == 0.0) return std::nullopt;

    const auto mid = order.begin() + static_cast<std::ptrdiff_t>(begin + (end - begin) / 2);
    std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(begin), mid,
                     order.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                         const double xa = d.at(a, best_dim);
                         const double xb = d.at(b, best_dim);
                         return xa < xb || (xa == xb && a < b);
                     });
    return best_dim;
}

KdTree::KdTree(const Dataset& d, std::size_t leaf_size)
    : data_(d), leaf_size_(std::max<std::size_t>(leaf_size, 1)), order_(d.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * d.size() / leaf_size_ + 1);
    build(0, d.size());
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    if (end - begin <= leaf_size_) return id;

    const auto dim = median_split(data_, order_, begin, end);
    if (!dim) return id;

    const std::size_t mid = begin + (end - begin) / 2;
    const double split_value = data_.at(order_[mid], *dim);
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    Node& node = nodes_[id];
    node.split_dim = *dim;
    node.split_value = split_value;
    node.left = left;
    node.right = right;
    return id;
}

void KdTree::query(std::size_t self, KnnHeap& heap) const {
    search(0, data_.row(self), self, heap);
}

void KdTree::search(std::size_t id, std::span<const double> q, std::size_t self,
                    KnnHeap& heap) const {
    const Node& node = nodes_[id];
    if (node.left == 0) {
        for (std::size_t p = node.begin; p < node.end; ++p) {
            const std::size_t j = order_[p];
            if (j != self) heap.offer(squared_distance(q, data_.row(j)), j);
        }
        return;
    }

    // Left holds coordinates <= split, right holds >= split, so the gap to the
    // plane never exceeds the true per-axis gap even after rounding.
    const double diff = q[node.split_dim] - node.split_value;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, self, heap);
    if (diff * diff <= heap.worst_squared()) search(far, q, self, heap);
}

}  // namespace nbavg::detail
