#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "../oracles.hpp"
#include "nbavg/detectors.hpp"
#include "nbavg/ensemble.hpp"
#include "nbavg/eval.hpp"
#include "nbavg/na.hpp"

using namespace nbavg;

namespace {

std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n, bool ties) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> s(n);
    for (auto& x : s) x = ties ? std::round(u(rng) * 2.0) / 2.0 : u(rng);
    return s;
}

std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n) {
    std::vector<int> l(n);
    std::bernoulli_distribution b(0.3);
    for (auto& x : l) x = b(rng) ? 1 : 0;
    l[0] = 1;
    l[1] = 0;
    return l;
}

}  // namespace

TEST_CASE("property: standardize is idempotent") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dataset d = synth_clusters_with_outliers(30 + seed, 3, 1 + seed % 4, 0.5 + seed, seed);
        const Dataset once = standardize(d);
        const Dataset twice = standardize(once);
        for (std::size_t i = 0; i < once.values().size(); ++i) {
            CHECK(std::abs(once.values()[i] - twice.values()[i]) <= 1e-9);
        }
    }
}

TEST_CASE("property: knn_indexed equals knn_brute") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t dim = 1 + rng() % 40;
        const std::size_t n = 30 + rng() % 120;
        const std::size_t k = 1 + rng() % 25;
        const Dataset d = oracle::random_dataset(n, dim, rng(), trial % 3 == 0 ? 0.3 : 0.0);
        CHECK(knn_indexed(d, k) == knn_brute(d, k));
    }
}

TEST_CASE("property: distance detectors are invariant to rigid motions") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset d = oracle::random_dataset(80, 2, rng());
        const double a = angle(rng), tx = shift(rng), ty = shift(rng);
        std::vector<double> moved(d.values().size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double x = d.at(i, 0), y = d.at(i, 1);
            moved[2 * i] = std::cos(a) * x - std::sin(a) * y + tx;
            moved[2 * i + 1] = std::sin(a) * x + std::cos(a) * y + ty;
        }
        const Dataset m("moved", d.size(), 2, moved);
        const auto k1 = knn_score(d, knn_brute(d, 6)).scores;
        const auto k2 = knn_score(m, knn_brute(m, 6)).scores;
        const auto a1 = avg_knn_score(d, knn_brute(d, 6)).scores;
        const auto a2 = avg_knn_score(m, knn_brute(m, 6)).scores;
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(std::abs(k1[i] - k2[i]) <= 1e-9);
            CHECK(std::abs(a1[i] - a2[i]) <= 1e-9);
        }
    }
}

TEST_CASE("property: LOF is flat on regular polytopes") {
    for (int sides = 3; sides <= 12; ++sides) {
        std::vector<double> v;
        for (int s = 0; s < sides; ++s) {
            v.push_back(std::cos(2.0 * std::numbers::pi * s / sides));
            v.push_back(std::sin(2.0 * std::numbers::pi * s / sides));
        }
        const Dataset d("polygon", static_cast<std::size_t>(sides), 2, v);
        for (std::size_t k = 1; k < d.size(); ++k) {
            const auto s = lof_score(d, knn_brute(d, k)).scores;
            const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
            CHECK(*hi - *lo <= 1e-9);
        }
    }
    // Cube vertices in 3-D.
    std::vector<double> cube;
    for (int c = 0; c < 8; ++c) {
        for (int b = 0; b < 3; ++b) cube.push_back((c >> b) & 1);
    }
    const Dataset d("cube", 8, 3, cube);
    for (std::size_t k = 1; k < 8; ++k) {
        const auto s = lof_score(d, knn_brute(d, k)).scores;
        const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
        CHECK(*hi - *lo <= 1e-9);
    }
}

TEST_CASE("property: detector outputs are finite, sized and in range") {
    const Dataset d = standardize(synth_clusters_with_outliers(150, 10, 3, 1.0, 33));
    for (const auto kind : {DetectorKind::knn, DetectorKind::avg_knn, DetectorKind::odin,
                            DetectorKind::lof, DetectorKind::mod, DetectorKind::abod,
                            DetectorKind::iforest, DetectorKind::pcad, DetectorKind::copod}) {
        DetectorConfig cfg;
        cfg.kind = kind;
        cfg.n_trees = 30;
        cfg.seed = 5;
        const auto a = run_detector(d, cfg).scores.scores;
        const auto b = run_detector(d, cfg).scores.scores;
        CAPTURE(to_string(kind));
        CHECK(a == b);
        REQUIRE(a.size() == d.size());
        for (const double x : a) {
            REQUIRE(std::isfinite(x));
            switch (kind) {
                case DetectorKind::odin:
                    CHECK((x > 0.0 && x <= 1.0));
                    break;
                case DetectorKind::iforest:
                    CHECK((x > 0.0 && x < 1.0));
                    break;
                case DetectorKind::abod:
                    CHECK(x <= 0.0);
                    break;
                case DetectorKind::lof:
                    CHECK(x > 0.0);
                    break;
                default:
                    CHECK(x >= 0.0);
            }
        }
    }
}

TEST_CASE("property: NA bounds, fixed points and affine equivariance") {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 5 + rng() % 60;
        const Dataset d = oracle::random_dataset(n, 1 + rng() % 4, rng(), 0.1);
        const std::size_t k = 1 + rng() % (n - 1);
        const NeighborGraph g = knn_indexed(d, k);
        const auto s = random_scores(rng, n, trial % 2 == 0);
        const auto out = neighborhood_average(g, s);
        const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
        for (const double x : out) {
            CHECK(x >= *lo);
            CHECK(x <= *hi);
        }
        const std::vector<double> c(n, -1.25);
        CHECK(neighborhood_average(g, c) == c);

        const double a = 0.1 + 3.0 * static_cast<double>(rng() % 100) / 100.0;
        const double b = -4.0 + static_cast<double>(rng() % 80) / 10.0;
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = a * s[i] + b;
        const auto its = 1 + rng() % 3;
        const auto lhs = na_iterate(g, t, its);
        const auto rhs = na_iterate(g, s, its);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(lhs[i] - (a * rhs[i] + b)) <= 1e-9);
    }
}

TEST_CASE("property: ensemble permutation and scale invariance") {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 10 + rng() % 50;
        const ScoreVector a{random_scores(rng, n, false), "a", {}};
        const ScoreVector b{random_scores(rng, n, false), "b", {}};
        const ScoreVector c{random_scores(rng, n, true), "c", {}};
        const auto abc = average_ensemble({{a, b, c}}).scores;
        const auto cab = average_ensemble({{c, a, b}}).scores;
        ScoreVector scaled = b;
        for (auto& x : scaled.scores) x *= 7.5;
        const auto scaled_out = average_ensemble({{a, scaled, c}}).scores;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(abc[i] - cab[i]) <= 1e-12);
            CHECK(std::abs(abc[i] - scaled_out[i]) <= 1e-9);
        }
    }
}

TEST_CASE("property: AUC under monotone maps, negation and top-k") {
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + rng() % 100;
        const bool ties = trial % 2 == 0;
        const auto s = random_scores(rng, n, ties);
        const auto l = random_labels(rng, n);
        std::vector<double> m(n), neg(n);
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = std::exp(s[i]) * 3.0 + std::pow(s[i], 3);
            neg[i] = -s[i];
        }
        CHECK(roc_auc(m, l) == roc_auc(s, l));
        if (!ties) CHECK(roc_auc(s, l) + roc_auc(neg, l) == doctest::Approx(1.0).epsilon(1e-15));
        const auto r = evaluate(s, l);
        CHECK(r.precision == r.recall);
        CHECK(r.f1_harmonic == doctest::Approx(r.f1_paper).epsilon(1e-15));
        CHECK((r.auc >= 0.0 && r.auc <= 1.0));

        std::vector<int> pred(n);
        for (auto& x : pred) x = static_cast<int>(rng() % 2);
        const auto pr = precision_recall_f1(pred, l);
        CHECK(pr.f1_harmonic <= pr.f1_paper + 1e-15);
    }
}
