#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "knn_heap.hpp"
#include "nbavg/dataset.hpp"

namespace nbavg::detail {

// Exact k-NN index over the rows of a dataset. query() offers every row
// except `self` that could belong to the k nearest of row `self`; pruning is
// conservative so ties at the k-th distance are always examined.
class KdTree {
public:
    explicit KdTree(const Dataset& d, std::size_t leaf_size = 16);
    void query(std::size_t self, KnnHeap& heap) const;

private:
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;
        std::size_t split_dim = 0;
        double split_value = 0.0;
        std::size_t left = 0;  // 0 marks a leaf; the root is never a child
        std::size_t right = 0;
    };

    std::size_t build(std::size_t begin, std::size_t end);
    void search(std::size_t node, std::span<const double> q, std::size_t self, KnnHeap& heap) const;

    const Dataset& data_;
    std::size_t leaf_size_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

class BallTree {
public:
    explicit BallTree(const Dataset& d, std::size_t leaf_size = 16);
    void query(std::size_t self, KnnHeap& heap) const;

private:
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;
        double radius = 0.0;
        std::size_t left = 0;  // 0 marks a leaf
        std::size_t right = 0;
    };

    std::size_t build(std::size_t begin, std::size_t end);
    std::span<const double> centroid(std::size_t node) const noexcept {
        return {centroids_.data() + node * data_.dim(), data_.dim()};
    }
    double lower_bound(std::size_t node, std::span<const double> q) const noexcept;
    void search(std::size_t node, std::span<const double> q, std::size_t self, KnnHeap& heap) const;

    const Dataset& data_;
    std::size_t leaf_size_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::vector<double> centroids_;
};

// Splits order[begin, end) at the median of the widest dimension, ordering by
// (coordinate, index). Returns the split dimension, or nullopt when every point
// in the range coincides.
std::optional<std::size_t> median_split(const Dataset& d, std::vector<std::size_t>& order,
                                        std::size_t begin, std::size_t end);

}  // namespace nbavg::detail
