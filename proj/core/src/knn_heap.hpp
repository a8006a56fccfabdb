#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace nbavg::detail {

// Every k-NN path in the library computes distances through this function so
// the brute-force and indexed searches agree bit for bit.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        sum += diff * diff;
    }
    return sum;
}

struct Candidate {
    double squared = 0.0;
    std::size_t index = 0;

    auto operator<=>(const Candidate&) const = default;
};

// Bounded max-heap keeping the k lexicographically smallest (squared, index).
class KnnHeap {
public:
    explicit KnnHeap(std::size_t k) : k_(k) { items_.reserve(k); }

    void offer(double squared, std::size_t index) {
        const Candidate c{squared, index};
        if (items_.size() < k_) {
            items_.push_back(c);
            std::push_heap(items_.begin(), items_.end());
        } else if (c < items_.front()) {
            std::pop_heap(items_.begin(), items_.end());
            items_.back() = c;
            std::push_heap(items_.begin(), items_.end());
        }
    }

    bool full() const noexcept { return items_.size() == k_; }

    double worst_squared() const noexcept {
        return full() ? items_.front().squared : std::numeric_limits<double>::infinity();
    }

    std::vector<Candidate> take_sorted() {
        std::sort_heap(items_.begin(), items_.end());
        return std::move(items_);
    }

private:
    std::size_t k_;
    std::vector<Candidate> items_;
};

}  // namespace nbavg::detail
