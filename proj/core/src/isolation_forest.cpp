#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "nbavg/detectors.hpp"
#include "nbavg/error.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace nbavg {

namespace {

constexpr double kEulerGamma = 0.5772156649015329;

double harmonic(std::size_t n) {
    if (n < 256) {
        double sum = 0.0;
        for (std::size_t i = n; i >= 1; --i) sum += 1.0 / static_cast<double>(i);
        return sum;
    }
    const double x = static_cast<double>(n);
    return std::log(x) + kEulerGamma + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x);
}

// Average unsuccessful-search path length in a binary search tree of m items.
double average_path_length(std::size_t m) {
    if (m <= 1) return 0.0;
    const double md = static_cast<double>(m);
    return 2.0 * harmonic(m - 1) - 2.0 * (md - 1.0) / md;
}

class IsolationTree {
public:
    IsolationTree(const Dataset& d, std::vector<std::size_t> sample, std::size_t height_limit,
                  detail::Random& rng)
        : data_(d), height_limit_(height_limit) {
        build(sample, 0, sample.size(), 0, rng);
    }

    double path_length(std::span<const double> x) const {
        std::size_t id = 0;
        double depth = 0.0;
        while (!nodes_[id].leaf) {
            const Node& node = nodes_[id];
            id = x[node.feature] < node.threshold ? node.left : node.right;
            depth += 1.0;
        }
        return depth + average_path_length(nodes_[id].size);
    }

private:
    struct Node {
        bool leaf = true;
        std::size_t size = 0;
        std::size_t feature = 0;
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
    };

    std::size_t build(std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
                      std::size_t depth, detail::Random& rng) {
        const std::size_t id = nodes_.size();
        nodes_.push_back({true, end - begin});
        if (depth >= height_limit_ || end - begin <= 1) return id;

        // Only features that vary inside the node can split it; a node whose
        // rows all coincide stays a leaf.
        std::vector<std::size_t> features;
        std::vector<std::pair<double, double>> bounds;
        for (std::size_t j = 0; j < data_.dim(); ++j) {
            double lo = data_.at(rows[begin], j);
            double hi = lo;
            for (std::size_t p = begin + 1; p < end; ++p) {
                lo = std::min(lo, data_.at(rows[p], j));
                hi = std::max(hi, data_.at(rows[p], j));
            }
            if (lo < hi) {
                features.push_back(j);
                bounds.emplace_back(lo, hi);
            }
        }
        if (features.empty()) return id;

        const std::size_t pick = rng.below(features.size());
        const std::size_t feature = features[pick];
        const auto [lo, hi] = bounds[pick];
        double cut = rng.uniform(lo, hi);
        while (cut <= lo) cut = rng.uniform(lo, hi);

        const auto middle = std::partition(
            rows.begin() + static_cast<std::ptrdiff_t>(begin),
            rows.begin() + static_cast<std::ptrdiff_t>(end),
            [&](std::size_t r) { return data_.at(r, feature) < cut; });
        const auto mid = static_cast<std::size_t>(middle - rows.begin());

        const std::size_t left = build(rows, begin, mid, depth + 1, rng);
        const std::size_t right = build(rows, mid, end, depth + 1, rng);
        Node& node = nodes_[id];
        node.leaf = false;
        node.feature = feature;
        node.threshold = cut;
        node.left = left;
        node.right = right;
        return id;
    }

    const Dataset& data_;
    std::size_t height_limit_;
    std::vector<Node> nodes_;
};

}  // namespace

ScoreVector iforest_score(const Dataset& d, const DetectorConfig& cfg) {
    if (cfg.n_trees < 1) throw InvalidArgument("iforest needs n_trees >= 1");
    if (cfg.subsample < 2) throw InvalidArgument("iforest needs subsample >= 2");

    const std::size_t n = d.size();
    const std::size_t psi = std::min(cfg.subsample, n);
    const auto height_limit =
        static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(psi, 1)))));

    std::vector<IsolationTree> trees;
    trees.reserve(cfg.n_trees);
    {
        std::vector<std::optional<IsolationTree>> built(cfg.n_trees);
        detail::parallel_for(
            cfg.n_trees,
            [&](std::size_t t) {
                detail::Random rng(detail::mix_seed(cfg.seed, t));
                std::vector<std::size_t> rows(n);
                std::iota(rows.begin(), rows.end(), std::size_t{0});
                for (std::size_t p = 0; p < psi; ++p) {
                    std::swap(rows[p], rows[p + rng.below(n - p)]);
                }
                rows.resize(psi);
                built[t].emplace(d, std::move(rows), height_limit, rng);
            },
            1);
        for (auto& tree : built) trees.push_back(std::move(*tree));
    }

    const double normalizer = average_path_length(psi);
    std::vector<double> scores(n, 0.5);
    if (normalizer > 0.0) {
        detail::parallel_for(n, [&](std::size_t i) {
            double total = 0.0;
            for (const auto& tree : trees) total += tree.path_length(d.row(i));
            const double mean = total / static_cast<double>(trees.size());
            scores[i] = std::exp2(-mean / normalizer);
        });
    }

    DetectorConfig params = cfg;
    params.kind = DetectorKind::iforest;
    return ScoreVector{std::move(scores), params.label(), params};
}

}  // namespace nbavg
