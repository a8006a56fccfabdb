#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nbavg {

/// Ground-truth labels: 0 = inlier, 1 = outlier.
using Labels = std::vector<int>;

/// N x D matrix of finite reals stored row-major, with optional 0/1 labels.
///
/// Construction validates every invariant, so a Dataset that exists is always
/// well formed: N >= 1, D >= 1, all entries finite, labels (if any) of length N
/// with values in {0, 1}. Instances are immutable.
class Dataset {
public:
    Dataset(std::string name, std::size_t rows, std::size_t cols, std::vector<double> values,
            std::optional<Labels> labels = std::nullopt);

    const std::string& name() const noexcept { return name_; }
    std::size_t size() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return cols_; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * cols_, cols_};
    }
    double at(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool has_labels() const noexcept { return labels_.has_value(); }
    const std::optional<Labels>& labels() const noexcept { return labels_; }
    /// Number of rows labelled 1; zero when unlabelled.
    std::size_t outlier_count() const noexcept;

    Dataset with_name(std::string name) const;

private:
    std::string name_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
    std::optional<Labels> labels_;
};

/// Which CSV column holds labels: none, a zero-based index, or a header name.
using LabelColumn = std::variant<std::monostate, std::size_t, std::string>;

/// Reads a comma-separated file. The first row is treated as a header when none
/// of its cells parse as a number. Throws IoError / ParseError.
Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column = {});

/// Same as load_csv but from in-memory text; `name` becomes the dataset name.
Dataset parse_csv(std::string_view text, const LabelColumn& label_column = {},
                  std::string name = "csv");

/// Writes a header row then one row per object with 17 significant digits.
/// Labels, when present, go in a trailing column named "label".
void write_csv(const Dataset& d, const std::filesystem::path& path);

/// Per-column z-scoring with the population standard deviation. Constant columns
/// become all-zero. Labels pass through.
Dataset standardize(const Dataset& d);

/// Deterministic fixture: Gaussian clusters of inliers plus uniform background
/// outliers over a box enclosing the clusters. Labels mark the background points.
Dataset synth_clusters_with_outliers(std::size_t n_inliers, std::size_t n_outliers,
                                     std::size_t dim, double spread, std::uint64_t seed);

}  // namespace nbavg
