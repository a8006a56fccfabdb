#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "../oracles.hpp"
#include "nbavg/error.hpp"
#include "nbavg/neighbors.hpp"

using namespace nbavg;

namespace {

void check_matches_oracle(const NeighborGraph& g, const oracle::Graph& o) {
    REQUIRE(g.size() == o.neighbors.size());
    REQUIRE(g.k() == o.k);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto nb = g.neighbors(i);
        const auto dist = g.distances(i);
        for (std::size_t r = 0; r < g.k(); ++r) {
            REQUIRE(nb[r] == o.neighbors[i][r]);
            REQUIRE(dist[r] == o.distances[i][r]);
        }
    }
}

}  // namespace

TEST_CASE("knn_brute on the 1-D fixture") {
    const Dataset d("line", 3, 1, {0.0, 1.0, 3.0});
    const NeighborGraph g = knn_brute(d, 1);
    CHECK(g.neighbors(0)[0] == 1);
    CHECK(g.neighbors(1)[0] == 0);
    CHECK(g.neighbors(2)[0] == 1);
    CHECK(g.distances(0)[0] == 1.0);
    CHECK(g.distances(1)[0] == 1.0);
    CHECK(g.distances(2)[0] == 2.0);
    CHECK(in_degree(g) == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("knn ties go to the lower index") {
    const Dataset d("dup", 3, 1, {0.0, 0.0, 5.0});
    for (const auto& g : {knn_brute(d, 1), knn_indexed(d, 1)}) {
        CHECK(g.neighbors(0)[0] == 1);
        CHECK(g.distances(0)[0] == 0.0);
        CHECK(g.neighbors(1)[0] == 0);
        // 0 and 1 are equally far from 5.
        CHECK(g.neighbors(2)[0] == 0);
    }
}

TEST_CASE("k outside [1, N-1] is rejected") {
    const Dataset d("line", 3, 1, {0.0, 1.0, 3.0});
    CHECK_THROWS_AS(knn_brute(d, 0), InvalidArgument);
    CHECK_THROWS_AS(knn_brute(d, 3), InvalidArgument);
    CHECK_THROWS_AS(knn_indexed(d, 3), InvalidArgument);
    CHECK_NOTHROW(knn_indexed(d, 2));
}

TEST_CASE("knn_brute equals a second quadratic scan") {
    const Dataset d = oracle::random_dataset(200, 5, 1);
    check_matches_oracle(knn_brute(d, 10), oracle::knn(d, 10));
}

TEST_CASE("knn_indexed equals knn_brute through both index kinds") {
    CHECK(select_index(19) == IndexKind::kd_tree);
    CHECK(select_index(20) == IndexKind::ball_tree);
    CHECK(select_index(1) == IndexKind::kd_tree);

    const Dataset low = oracle::random_dataset(500, 3, 2);
    CHECK(knn_indexed(low, 20) == knn_brute(low, 20));
    const Dataset high = oracle::random_dataset(300, 30, 3);
    CHECK(knn_indexed(high, 15) == knn_brute(high, 15));
    // Either index kind on either dimensionality.
    CHECK(knn_indexed(low, 7, IndexKind::ball_tree) == knn_brute(low, 7));
    CHECK(knn_indexed(high, 7, IndexKind::kd_tree) == knn_brute(high, 7));
}

TEST_CASE("knn_indexed handles all-identical points") {
    const Dataset d("same", 40, 2, std::vector<double>(80, 1.5));
    for (const auto kind : {IndexKind::kd_tree, IndexKind::ball_tree}) {
        const NeighborGraph g = knn_indexed(d, 5, kind);
        CHECK(g == knn_brute(d, 5));
        CHECK(g.neighbors(0)[0] == 1);
        CHECK(g.neighbors(39)[4] == 4);
    }
}

TEST_CASE("graph for k is a prefix of the graph for k + 1") {
    const Dataset d = oracle::random_dataset(120, 4, 4, 0.2);
    const NeighborGraph g8 = knn_indexed(d, 8);
    const NeighborGraph g9 = knn_indexed(d, 9);
    CHECK(g9.prefix(8) == g8);
    CHECK_THROWS_AS(g8.prefix(9), InvalidArgument);
}

TEST_CASE("in_degree matches a direct count and conserves N*k") {
    const Dataset d = oracle::random_dataset(100, 3, 5);
    const NeighborGraph g = knn_brute(d, 5);
    const auto deg = in_degree(g);
    const auto expected = oracle::in_degree(oracle::knn(d, 5));
    CHECK(deg == expected);
    CHECK(std::accumulate(deg.begin(), deg.end(), std::size_t{0}) == 100 * 5);
}

TEST_CASE("graph csv dump") {
    const Dataset d("line", 3, 1, {0.0, 1.0, 3.0});
    const auto path = std::filesystem::temp_directory_path() / "nbavg_test_graph.csv";
    write_graph_csv(knn_brute(d, 2), path);
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str().rfind("i,rank,neighbor,distance\n0,1,1,1\n0,2,2,3\n", 0) == 0);
}
