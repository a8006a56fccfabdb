#include "nbavg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "nbavg/error.hpp"
#include "random.hpp"

namespace nbavg {

Dataset::Dataset(std::string name, std::size_t rows, std::size_t cols, std::vector<double> values,
                 std::optional<Labels> labels)
    : name_(std::move(name)),
      rows_(rows),
      cols_(cols),
      values_(std::move(values)),
      labels_(std::move(labels)) {
    if (rows_ == 0 || cols_ == 0) {
        throw InvalidArgument(fmt::format("dataset '{}' must have at least one row and one column "
                                          "(got {} x {})",
                                          name_, rows_, cols_));
    }
    if (values_.size() != rows_ * cols_) {
        throw InvalidArgument(fmt::format("dataset '{}': {} values for a {} x {} matrix", name_,
                                          values_.size(), rows_, cols_));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidArgument(fmt::format("dataset '{}': non-finite value at row {}, column {}",
                                              name_, i / cols_, i % cols_));
        }
    }
    if (labels_) {
        if (labels_->size() != rows_) {
            throw InvalidArgument(fmt::format("dataset '{}': {} labels for {} rows", name_,
                                              labels_->size(), rows_));
        }
        for (std::size_t i = 0; i < rows_; ++i) {
            const int label = (*labels_)[i];
            if (label != 0 && label != 1) {
                throw InvalidArgument(
                    fmt::format("dataset '{}': label {} at row {} is not 0 or 1", name_, label, i));
            }
        }
    }
}

std::size_t Dataset::outlier_count() const noexcept {
    if (!labels_) return 0;
    return static_cast<std::size_t>(std::count(labels_->begin(), labels_->end(), 1));
}

Dataset Dataset::with_name(std::string name) const {
    Dataset copy = *this;
    copy.name_ = std::move(name);
    return copy;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
    return value;
}

std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

Dataset parse_csv(std::string_view text, const LabelColumn& label_column, std::string name) {
    // (1-based line number, cells)
    std::vector<std::pair<std::size_t, std::vector<std::string_view>>> lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        const auto line = trim(text.substr(pos, end - pos));
        if (!line.empty()) lines.emplace_back(line_no, split_cells(line));
        pos = end + 1;
    }
    if (lines.empty()) throw ParseError(fmt::format("{}: no rows", name));

    std::vector<std::string> header;
    const auto& first = lines.front().second;
    const bool has_header = std::none_of(first.begin(), first.end(),
                                         [](std::string_view c) { return parse_number(c).has_value(); });
    if (has_header) {
        for (auto cell : first) header.emplace_back(trim(cell));
        lines.erase(lines.begin());
        if (lines.empty()) throw ParseError(fmt::format("{}: header but no data rows", name));
    }

    const std::size_t width = lines.front().second.size();
    if (has_header && header.size() != width) {
        throw ParseError(fmt::format("{}: header has {} columns but data has {}", name,
                                     header.size(), width),
                         lines.front().first);
    }

    std::optional<std::size_t> label_index;
    if (const auto* index = std::get_if<std::size_t>(&label_column)) {
        if (*index >= width) {
            throw ParseError(fmt::format("{}: label column {} out of range ({} columns)", name,
                                         *index, width));
        }
        label_index = *index;
    } else if (const auto* column = std::get_if<std::string>(&label_column)) {
        const auto it = std::find(header.begin(), header.end(), *column);
        if (it == header.end()) {
            throw ParseError(fmt::format("{}: no column named '{}'", name, *column));
        }
        label_index = static_cast<std::size_t>(it - header.begin());
    }

    const std::size_t cols = width - (label_index ? 1 : 0);
    if (cols == 0) throw ParseError(fmt::format("{}: no feature columns", name));

    std::vector<double> values;
    values.reserve(lines.size() * cols);
    Labels labels;
    for (const auto& [row, cells] : lines) {
        if (cells.size() != width) {
            throw ParseError(fmt::format("{}: line {} has {} cells, expected {}", name, row,
                                         cells.size(), width),
                             row);
        }
        for (std::size_t c = 0; c < width; ++c) {
            const auto value = parse_number(cells[c]);
            if (!value || !std::isfinite(*value)) {
                throw ParseError(fmt::format("{}: line {}, column {}: '{}' is not a finite number",
                                             name, row, c + 1, trim(cells[c])),
                                 row, c + 1);
            }
            if (label_index && c == *label_index) {
                if (*value != 0.0 && *value != 1.0) {
                    throw ParseError(fmt::format("{}: line {}, column {}: label '{}' is not 0 or 1",
                                                 name, row, c + 1, trim(cells[c])),
                                     row, c + 1);
                }
                labels.push_back(static_cast<int>(*value));
            } else {
                values.push_back(*value);
            }
        }
    }

    std::optional<Labels> maybe_labels;
    if (label_index) maybe_labels = std::move(labels);
    return Dataset(std::move(name), lines.size(), cols, std::move(values), std::move(maybe_labels));
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), label_column, path.stem().string());
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    for (std::size_t j = 0; j < d.dim(); ++j) out << (j ? "," : "") << 'x' << j;
    if (d.has_labels()) out << ",label";
    out << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.dim(); ++j) {
            out << (j ? "," : "") << fmt::format("{:.17g}", d.at(i, j));
        }
        if (d.has_labels()) out << ',' << (*d.labels())[i];
        out << '\n';
    }
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

Dataset standardize(const Dataset& d) {
    const std::size_t n = d.size();
    const std::size_t dim = d.dim();
    std::vector<double> out(n * dim);
    for (std::size_t j = 0; j < dim; ++j) {
        double lo = d.at(0, j);
        double hi = lo;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = d.at(i, j);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            sum += x;
        }
        if (lo == hi) {
            for (std::size_t i = 0; i < n; ++i) out[i * dim + j] = 0.0;
            continue;
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = d.at(i, j) - mean;
            ss += dev * dev;
        }
        const double sigma = std::sqrt(ss / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) out[i * dim + j] = (d.at(i, j) - mean) / sigma;
    }
    return Dataset(d.name(), n, dim, std::move(out), d.labels());
}

Dataset synth_clusters_with_outliers(std::size_t n_inliers, std::size_t n_outliers,
                                     std::size_t dim, double spread, std::uint64_t seed) {
    const std::size_t n = n_inliers + n_outliers;
    if (n == 0) throw InvalidArgument("synthetic dataset needs at least one object");
    if (dim == 0) throw InvalidArgument("synthetic dataset needs dim >= 1");
    if (!(spread > 0.0) || !std::isfinite(spread)) {
        throw InvalidArgument("synthetic dataset needs a positive finite spread");
    }

    // Cluster centers live in [0, side]^dim; background noise covers the centers'
    // box widened by `margin` on every side. Each cluster gets its own spread,
    // log-uniform within a factor exp(kLogSpreadRange) of `spread`.
    constexpr std::size_t kMaxClusters = 8;
    constexpr double kSidePerSpread = 5.0;
    constexpr double kMarginPerSpread = 4.0;
    constexpr double kLogSpreadRange = 1.5;
    const std::size_t n_clusters = std::clamp<std::size_t>(n_inliers / 100, 1, kMaxClusters);
    const double side = kSidePerSpread * spread;
    const double margin = kMarginPerSpread * spread;

    detail::Random rng(seed);
    std::vector<double> centers(n_clusters * dim);
    for (auto& c : centers) c = rng.uniform(0.0, side);
    std::vector<double> spreads(n_clusters);
    for (auto& s : spreads) s = spread * std::exp(rng.uniform(-kLogSpreadRange, kLogSpreadRange));

    std::vector<double> values;
    values.reserve(n * dim);
    Labels labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n_inliers; ++i) {
        const std::size_t c = i % n_clusters;
        for (std::size_t j = 0; j < dim; ++j) {
            values.push_back(centers[c * dim + j] + spreads[c] * rng.normal());
        }
        labels.push_back(0);
    }
    for (std::size_t i = 0; i < n_outliers; ++i) {
        for (std::size_t j = 0; j < dim; ++j) values.push_back(rng.uniform(-margin, side + margin));
        labels.push_back(1);
    }
    return Dataset(fmt::format("clusters-{}-{}-{}-s{}", n_inliers, n_outliers, dim, seed), n, dim,
                   std::move(values), std::move(labels));
}

}  // namespace nbavg
