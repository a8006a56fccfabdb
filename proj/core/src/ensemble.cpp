#include "nbavg/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "nbavg/error.hpp"

namespace nbavg {

ScoreVector normalize_scores(const ScoreVector& s) {
    if (s.size() == 0) throw InvalidArgument("cannot normalize an empty score vector");
    const double n = static_cast<double>(s.size());
    const double mean = std::accumulate(s.scores.begin(), s.scores.end(), 0.0) / n;
    double ss = 0.0;
    for (const double x : s.scores) ss += (x - mean) * (x - mean);
    const double sigma = std::sqrt(ss / n);

    ScoreVector out{std::vector<double>(s.size(), 0.0), s.detector_id, s.params};
    const bool constant = std::all_of(s.scores.begin(), s.scores.end(),
                                      [&](double x) { return x == s.scores.front(); });
    if (constant || sigma == 0.0) return out;
    for (std::size_t i = 0; i < s.size(); ++i) out.scores[i] = (s.scores[i] - mean) / sigma;
    return out;
}

ScoreVector average_ensemble(const EnsembleInput& e) {
    if (e.members.empty()) throw InvalidArgument("ensemble needs at least one member");
    const std::size_t n = e.members.front().size();
    std::string id = "ensemble(";
    for (std::size_t m = 0; m < e.members.size(); ++m) {
        if (e.members[m].size() != n) {
            throw InvalidArgument(fmt::format("ensemble member '{}' has {} scores, expected {}",
                                              e.members[m].detector_id, e.members[m].size(), n));
        }
        id += (m ? "+" : "") + e.members[m].detector_id;
    }
    id += ")";

    if (e.members.size() == 1 && e.normalization == Normalization::none) return e.members.front();

    std::vector<double> sum(n, 0.0);
    for (const auto& member : e.members) {
        const ScoreVector normalized =
            e.normalization == Normalization::zscore ? normalize_scores(member) : member;
        for (std::size_t i = 0; i < n; ++i) sum[i] += normalized.scores[i];
    }
    const double count = static_cast<double>(e.members.size());
    for (auto& x : sum) x /= count;
    return ScoreVector{std::move(sum), std::move(id), e.members.front().params};
}

}  // namespace nbavg
