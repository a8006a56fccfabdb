#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "../oracles.hpp"
#include "nbavg/error.hpp"
#include "nbavg/eval.hpp"

using namespace nbavg;

TEST_CASE("roc_auc basics") {
    const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
    CHECK(roc_auc(s, std::vector<int>{1, 1, 0, 0}) == 1.0);
    CHECK(roc_auc(s, std::vector<int>{0, 0, 1, 1}) == 0.0);
    CHECK(roc_auc(std::vector<double>(4, 3.0), std::vector<int>{1, 0, 1, 0}) == 0.5);
    CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1, 1, 1, 1}), InvalidArgument);
    CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1, 0}), InvalidArgument);
    CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1, 0, 2, 0}), InvalidArgument);
}

TEST_CASE("roc_auc equals the pairwise oracle on a tied instance") {
    const std::vector<double> s{1, 2, 2, 3, 3, 3, 4, 0};
    const std::vector<int> l{0, 1, 0, 1, 0, 1, 1, 0};
    CHECK(roc_auc(s, l) == oracle::pairwise_auc(s, l));
}

TEST_CASE("roc_curve") {
    const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
    const std::vector<int> l{1, 1, 0, 0};
    const std::vector<RocPoint> expected{{0, 0}, {0, 0.5}, {0, 1}, {0.5, 1}, {1, 1}};
    CHECK(roc_curve(s, l) == expected);
    const std::vector<RocPoint> ties{{0, 0}, {1, 1}};
    CHECK(roc_curve(std::vector<double>(4, 1.0), l) == ties);
    CHECK(trapezoid_area(roc_curve(std::vector<double>(4, 1.0), l)) == 0.5);
}

TEST_CASE("top_k_threshold") {
    const std::vector<double> s{5, 5, 1};
    CHECK(top_k_threshold(s, 0) == std::vector<int>{0, 0, 0});
    CHECK(top_k_threshold(s, 3) == std::vector<int>{1, 1, 1});
    CHECK(top_k_threshold(s, 1) == std::vector<int>{1, 0, 0});
    CHECK_THROWS_AS(top_k_threshold(s, 4), InvalidArgument);
}

TEST_CASE("precision_recall_f1") {
    const std::vector<int> truth{1, 0, 1, 0};
    auto r = precision_recall_f1(truth, truth);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1_harmonic == 1.0);
    CHECK(r.f1_paper == 1.0);

    r = precision_recall_f1(std::vector<int>{0, 0, 0, 0}, truth);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1_harmonic == 0.0);
    CHECK(r.f1_paper == 0.0);

    // TP = 1, FP = 1, FN = 1.
    r = precision_recall_f1(std::vector<int>{1, 1, 0, 0}, truth);
    CHECK(r.precision == 0.5);
    CHECK(r.recall == 0.5);
    CHECK(r.f1_harmonic == 0.5);
    CHECK(r.f1_paper == 0.5);

    // P = 1/3, R = 1: the two F1 variants part ways.
    r = precision_recall_f1(std::vector<int>{1, 1, 1, 0}, std::vector<int>{1, 0, 0, 0});
    CHECK(r.f1_harmonic == doctest::Approx(0.5));
    CHECK(r.f1_paper == doctest::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(precision_recall_f1(std::vector<int>{1}, truth), InvalidArgument);
}

TEST_CASE("evaluate uses the true outlier count") {
    const std::vector<double> s{0.9, 0.1, 0.8, 0.7, 0.2};
    const std::vector<int> l{1, 0, 0, 1, 0};
    const auto r = evaluate(s, l);
    CHECK(r.threshold_rank == 2);
    CHECK(r.precision == 0.5);
    CHECK(r.recall == 0.5);
    CHECK(r.auc == oracle::pairwise_auc(s, l));
}

TEST_CASE("roc csv export") {
    const auto path = std::filesystem::temp_directory_path() / "nbavg_test_roc.csv";
    write_roc_csv(roc_curve(std::vector<double>{2, 1}, std::vector<int>{1, 0}), path);
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str() == "fpr,tpr\n0,0\n0,1\n1,1\n");
}
