#include "nbavg/detectors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "nbavg/error.hpp"
#include "parallel.hpp"

namespace nbavg {

namespace {

constexpr std::array kKindNames = {
    std::pair{DetectorKind::knn, std::string_view{"knn"}},
    std::pair{DetectorKind::avg_knn, std::string_view{"avg_knn"}},
    std::pair{DetectorKind::odin, std::string_view{"odin"}},
    std::pair{DetectorKind::lof, std::string_view{"lof"}},
    std::pair{DetectorKind::mod, std::string_view{"mod"}},
    std::pair{DetectorKind::abod, std::string_view{"abod"}},
    std::pair{DetectorKind::iforest, std::string_view{"iforest"}},
    std::pair{DetectorKind::pcad, std::string_view{"pcad"}},
    std::pair{DetectorKind::copod, std::string_view{"copod"}},
};

// lrd used when every reachability distance in a neighborhood is zero.
constexpr double kLrdCap = 1e12;

void check_graph(const Dataset& d, const NeighborGraph& g) {
    if (g.size() != d.size()) {
        throw InvalidArgument(fmt::format("graph has {} rows but dataset '{}' has {}", g.size(),
                                          d.name(), d.size()));
    }
}

ScoreVector make_scores(std::vector<double> scores, DetectorKind kind, std::size_t k) {
    DetectorConfig cfg;
    cfg.kind = kind;
    cfg.k = k;
    return ScoreVector{std::move(scores), cfg.label(), cfg};
}

}  // namespace

std::string_view to_string(DetectorKind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

DetectorKind parse_detector_kind(std::string_view name) {
    for (const auto& [kind, spelling] : kKindNames) {
        if (spelling == name) return kind;
    }
    throw InvalidArgument(fmt::format("unknown detector '{}'", name));
}

bool uses_knn_graph(DetectorKind kind) noexcept {
    switch (kind) {
        case DetectorKind::knn:
        case DetectorKind::avg_knn:
        case DetectorKind::odin:
        case DetectorKind::lof:
        case DetectorKind::mod:
        case DetectorKind::abod:
            return true;
        default:
            return false;
    }
}

void DetectorConfig::validate() const {
    if (uses_knn_graph(kind) && k < 1) throw InvalidArgument("detector k must be >= 1");
    if (kind == DetectorKind::abod && k < 2) throw InvalidArgument("abod needs k >= 2");
    if (kind == DetectorKind::iforest) {
        if (n_trees < 1) throw InvalidArgument("iforest needs n_trees >= 1");
        if (subsample < 2) throw InvalidArgument("iforest needs subsample >= 2");
    }
    if (kind == DetectorKind::pcad && !(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
        throw InvalidArgument(
            fmt::format("pcad variance_fraction {} outside (0, 1]", variance_fraction));
    }
}

std::string DetectorConfig::label() const {
    const auto name = to_string(kind);
    switch (kind) {
        case DetectorKind::mod:
            return fmt::format("{}-k{}-i{}", name, k, mod_iterations);
        case DetectorKind::iforest:
            return fmt::format("{}-t{}-s{}", name, n_trees, subsample);
        case DetectorKind::pcad:
            return fmt::format("{}-v{}", name, variance_fraction);
        case DetectorKind::copod:
            return std::string(name);
        default:
            return fmt::format("{}-k{}", name, k);
    }
}

ScoreVector knn_score(const Dataset& d, const NeighborGraph& g) {
    check_graph(d, g);
    std::vector<double> scores(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) scores[i] = g.kth_distance(i);
    return make_scores(std::move(scores), DetectorKind::knn, g.k());
}

ScoreVector avg_knn_score(const Dataset& d, const NeighborGraph& g) {
    check_graph(d, g);
    std::vector<double> scores(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto dist = g.distances(i);
        scores[i] = std::accumulate(dist.begin(), dist.end(), 0.0) / static_cast<double>(g.k());
    }
    return make_scores(std::move(scores), DetectorKind::avg_knn, g.k());
}

ScoreVector odin_score(const Dataset& d, const NeighborGraph& g) {
    check_graph(d, g);
    const auto degree = in_degree(g);
    std::vector<double> scores(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        scores[i] = 1.0 / (1.0 + static_cast<double>(degree[i]));
    }
    return make_scores(std::move(scores), DetectorKind::odin, g.k());
}

ScoreVector lof_score(const Dataset& d, const NeighborGraph& g) {
    check_graph(d, g);
    const std::size_t n = g.size();
    const double k = static_cast<double>(g.k());

    std::vector<double> lrd(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto nb = g.neighbors(i);
        const auto dist = g.distances(i);
        double reach = 0.0;
        for (std::size_t r = 0; r < g.k(); ++r) reach += std::max(g.kth_distance(nb[r]), dist[r]);
        lrd[i] = reach > 0.0 ? k / reach : kLrdCap;
    }

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const std::size_t j : g.neighbors(i)) sum += lrd[j];
        scores[i] = sum / lrd[i] / k;
    }
    return make_scores(std::move(scores), DetectorKind::lof, g.k());
}

ScoreVector abod_score(const Dataset& d, const NeighborGraph& g) {
    check_graph(d, g);
    if (g.k() < 2) throw InvalidArgument("abod needs k >= 2");
    const std::size_t dim = d.dim();
    std::vector<double> scores(g.size());
    detail::parallel_for(g.size(), [&](std::size_t i) {
        const auto x = d.row(i);
        const auto nb = g.neighbors(i);
        std::vector<double> diffs(g.k() * dim);
        std::vector<double> norms(g.k());
        for (std::size_t r = 0; r < g.k(); ++r) {
            const auto y = d.row(nb[r]);
            double sq = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                diffs[r * dim + j] = y[j] - x[j];
                sq += diffs[r * dim + j] * diffs[r * dim + j];
            }
            norms[r] = sq;
        }

        std::vector<double> stats;
        stats.reserve(g.k() * (g.k() - 1) / 2);
        for (std::size_t a = 0; a < g.k(); ++a) {
            if (norms[a] == 0.0) continue;
            for (std::size_t b = a + 1; b < g.k(); ++b) {
                if (norms[b] == 0.0) continue;
                double dot = 0.0;
                for (std::size_t j = 0; j < dim; ++j) dot += diffs[a * dim + j] * diffs[b * dim + j];
                stats.push_back(dot / (norms[a] * norms[b]));
            }
        }
        if (stats.size() < 2) {
            scores[i] = 0.0;
            return;
        }
        const double m = static_cast<double>(stats.size());
        const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / m;
        double var = 0.0;
        for (const double s : stats) var += (s - mean) * (s - mean);
        scores[i] = -(var / m);
    });
    return make_scores(std::move(scores), DetectorKind::abod, g.k());
}

ScoreVector mod_score(const Dataset& d, std::size_t k, std::size_t iterations) {
    if (k < 1 || k + 1 > d.size()) {
        throw InvalidArgument(fmt::format("mod k = {} out of range [1, {}]", k, d.size() - 1));
    }
    if (iterations == 0) {
        auto out = make_scores(std::vector<double>(d.size(), 0.0), DetectorKind::mod, k);
        out.params.mod_iterations = 0;
        out.detector_id = out.params.label();
        return out;
    }
    return mod_score(d, knn_indexed(d, k), iterations);
}

ScoreVector mod_score(const Dataset& d, const NeighborGraph& initial, std::size_t iterations) {
    check_graph(d, initial);
    const std::size_t n = d.size();
    const std::size_t dim = d.dim();
    const std::size_t k = initial.k();

    Dataset current = d;
    for (std::size_t t = 0; t < iterations; ++t) {
        const NeighborGraph g = t == 0 ? initial : knn_indexed(current, k);
        std::vector<double> shifted(n * dim, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double* out = shifted.data() + i * dim;
            for (const std::size_t j : g.neighbors(i)) {
                const auto y = current.row(j);
                for (std::size_t c = 0; c < dim; ++c) out[c] += y[c];
            }
            for (std::size_t c = 0; c < dim; ++c) out[c] /= static_cast<double>(k);
        }
        current = Dataset(d.name(), n, dim, std::move(shifted));
    }

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = current.row(i);
        const auto b = d.row(i);
        double sq = 0.0;
        for (std::size_t c = 0; c < dim; ++c) sq += (a[c] - b[c]) * (a[c] - b[c]);
        scores[i] = std::sqrt(sq);
    }
    auto out = make_scores(std::move(scores), DetectorKind::mod, k);
    out.params.mod_iterations = iterations;
    out.detector_id = out.params.label();
    return out;
}

ScoreVector pcad_score(const Dataset& d, const DetectorConfig& cfg) {
    if (d.size() < 2) throw InvalidArgument("pcad needs at least two objects");
    if (!(cfg.variance_fraction > 0.0 && cfg.variance_fraction <= 1.0)) {
        throw InvalidArgument(
            fmt::format("pcad variance_fraction {} outside (0, 1]", cfg.variance_fraction));
    }
    const auto n = static_cast<Eigen::Index>(d.size());
    const auto dim = static_cast<Eigen::Index>(d.dim());

    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMatrix x = Eigen::Map<const RowMatrix>(d.values().data(), n, dim);
    x.rowwise() -= x.colwise().mean();
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    // Descending order; eigenvalues at round-off level count as zero.
    Eigen::VectorXd values = solver.eigenvalues().reverse();
    const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
    const double top = std::max(values(0), 0.0);
    for (Eigen::Index c = 0; c < dim; ++c) {
        if (values(c) <= 1e-12 * top) values(c) = 0.0;
    }

    DetectorConfig params = cfg;
    params.kind = DetectorKind::pcad;
    ScoreVector out{std::vector<double>(d.size(), 0.0), params.label(), params};

    double total = 0.0;
    for (Eigen::Index c = 0; c < dim; ++c) total += values(c);
    if (total <= 0.0) return out;
    Eigen::Index kept = 0;
    double explained = 0.0;
    while (kept < dim && explained < cfg.variance_fraction * total) explained += values(kept++);
    double discarded = 0.0;
    for (Eigen::Index c = kept; c < dim; ++c) discarded += values(c);
    if (kept == dim || discarded <= 0.0) return out;

    const Eigen::MatrixXd basis = vectors.leftCols(kept);
    const RowMatrix residual = x - (x * basis) * basis.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        out.scores[static_cast<std::size_t>(i)] = residual.row(i).squaredNorm() / discarded;
    }
    return out;
}

ScoreVector copod_score(const Dataset& d) {
    if (d.size() < 2) throw InvalidArgument("copod needs at least two objects");
    const std::size_t n = d.size();
    const double nd = static_cast<double>(n);

    std::vector<double> left(n, 0.0);
    std::vector<double> right(n, 0.0);
    std::vector<double> skewed(n, 0.0);
    std::vector<double> column(n);
    for (std::size_t j = 0; j < d.dim(); ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = d.at(i, j);

        const double mean = std::accumulate(column.begin(), column.end(), 0.0) / nd;
        double m2 = 0.0;
        double m3 = 0.0;
        for (const double x : column) {
            const double dev = x - mean;
            m2 += dev * dev;
            m3 += dev * dev * dev;
        }
        m2 /= nd;
        m3 /= nd;
        const double skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;

        std::vector<double> sorted = column;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < n; ++i) {
            const double x = column[i];
            const auto at_most = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
            const auto at_least = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), x);
            const double tail_left = -std::log(static_cast<double>(at_most) / nd);
            const double tail_right = -std::log(static_cast<double>(at_least) / nd);
            left[i] += tail_left;
            right[i] += tail_right;
            skewed[i] += skewness < 0.0 ? tail_left : tail_right;
        }
    }

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = std::max({left[i], right[i], skewed[i]});
    DetectorConfig params;
    params.kind = DetectorKind::copod;
    return ScoreVector{std::move(scores), params.label(), params};
}

Detection run_detector(const Dataset& d, const DetectorConfig& cfg) {
    cfg.validate();
    Detection out;
    if (uses_knn_graph(cfg.kind)) out.graph = knn_indexed(d, cfg.k);

    switch (cfg.kind) {
        case DetectorKind::knn:
            out.scores = knn_score(d, *out.graph);
            break;
        case DetectorKind::avg_knn:
            out.scores = avg_knn_score(d, *out.graph);
            break;
        case DetectorKind::odin:
            out.scores = odin_score(d, *out.graph);
            break;
        case DetectorKind::lof:
            out.scores = lof_score(d, *out.graph);
            break;
        case DetectorKind::abod:
            out.scores = abod_score(d, *out.graph);
            break;
        case DetectorKind::mod:
            out.scores = cfg.mod_iterations == 0 ? mod_score(d, cfg.k, 0)
                                                 : mod_score(d, *out.graph, cfg.mod_iterations);
            break;
        case DetectorKind::iforest:
            out.scores = iforest_score(d, cfg);
            break;
        case DetectorKind::pcad:
            out.scores = pcad_score(d, cfg);
            break;
        case DetectorKind::copod:
            out.scores = copod_score(d);
            break;
    }
    out.scores.params = cfg;
    out.scores.detector_id = cfg.label();
    return out;
}

}  // namespace nbavg
