#pragma once

#include <vector>

#include "nbavg/detectors.hpp"

namespace nbavg {

enum class Normalization { zscore, none };

struct EnsembleInput {
    std::vector<ScoreVector> members;
    Normalization normalization = Normalization::zscore;
};

/// z-score with population sigma; constant vectors map to zeros.
ScoreVector normalize_scores(const ScoreVector& s);

/// Per-object mean of the (optionally normalized) member scores.
ScoreVector average_ensemble(const EnsembleInput& e);

}  // namespace nbavg
