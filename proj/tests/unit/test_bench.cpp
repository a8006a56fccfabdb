#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nbavg/config.hpp"
#include "nbavg/error.hpp"
#include "nbavg/experiment.hpp"

using namespace nbavg;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSmall = R"(
[experiment]
seed = 3

[dataset]
synthetic = 200,10,2,1.0,5

[detector]
name = knn
k = 10

[na]
off = true
)";

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("nbavg_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ReportRow row(std::string dataset, std::string detector, std::size_t k, std::size_t it, double auc) {
    ReportRow r;
    r.dataset = std::move(dataset);
    r.detector = std::move(detector);
    r.na_k = k;
    r.na_iterations = it;
    r.auc = auc;
    r.precision = r.recall = r.f1_harmonic = r.f1_paper = auc / 2.0;
    return r;
}

}  // namespace

TEST_CASE("parse_config reads every section") {
    const auto cfg = parse_config(R"(
# comment
[experiment]
seed = 9
output_dir = out

[dataset]
name = local
path = data/x.csv
label_column = label

[dataset]
synthetic = 100, 5, 3, 0.5, 2

[detector]
name = lof
k = 40

[detector]
name = iforest
n_trees = 50
subsample = 128
seed = 4

[na]
k = 20
iterations = 2
reuse_graph = false

[sweep]
k = 1..5
iterations = default
iterations_k = 30

[ensemble]
members = lof-k40, iforest
)");
    REQUIRE(cfg.datasets.size() == 2);
    CHECK(cfg.seed == 9);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.datasets[0].name == "local");
    CHECK(std::get<std::string>(cfg.datasets[0].label_column) == "label");
    CHECK(cfg.datasets[1].name == "clusters-100-5-3-s2");
    CHECK(cfg.datasets[1].synthetic == SyntheticSpec{100, 5, 3, 0.5, 2});
    CHECK(cfg.detectors[0].label() == "lof-k40");
    CHECK(cfg.detectors[1].label() == "iforest-t50-s128");
    CHECK(cfg.detectors[1].seed == 4);
    CHECK(cfg.na[0] == NASetting{20, 2, false});
    CHECK(cfg.k_sweep == Range{1, 5});
    CHECK(cfg.iteration_sweep == Range{0, 10});
    CHECK(cfg.iteration_sweep_k == 30);
    CHECK(cfg.ensemble_groups[0].members == std::vector<std::string>{"lof-k40", "iforest"});
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("parse_config errors carry the line number") {
    try {
        parse_config("[experiment]\nseed = 1\n[detector]\nname = knn\nkk = 3\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 5);
    }
    CHECK_THROWS_AS(parse_config("[bogus]\n"), ParseError);
    CHECK_THROWS_AS(parse_config("seed = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[detector]\nname = ocsvm\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[sweep]\nk = 5..2\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[dataset]\nsynthetic = 1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_range("x..3"), ParseError);
}

TEST_CASE("validate rejects inconsistent configs") {
    CHECK_THROWS_AS(parse_config("[detector]\nname = knn\n").validate(), InvalidArgument);
    CHECK_THROWS_AS(parse_config("[dataset]\nsynthetic = 10,1,2,1,1\n").validate(), InvalidArgument);
    CHECK_THROWS_AS(parse_config("[dataset]\nsynthetic = 10,1,2,1,1\n[detector]\nname = knn\n"
                                 "[detector]\nname = knn\n")
                        .validate(),
                    InvalidArgument);
    CHECK_THROWS_AS(parse_config("[dataset]\nsynthetic = 10,1,2,1,1\n[detector]\nname = knn\n"
                                 "[ensemble]\nmembers = lof\n")
                        .validate(),
                    InvalidArgument);
}

TEST_CASE("na_grid renders sweeps") {
    ExperimentConfig cfg;
    CHECK(cfg.na_grid() == std::vector<NASetting>{{0, 0, true}, {100, 1, true}});
    cfg.k_sweep = Range{1, 3};
    CHECK(cfg.na_grid() == std::vector<NASetting>{{1, 0, true}, {2, 1, true}, {3, 1, true}});
    cfg.k_sweep.reset();
    cfg.iteration_sweep = Range{0, 2};
    cfg.iteration_sweep_k = 50;
    CHECK(cfg.na_grid() == std::vector<NASetting>{{50, 0, true}, {50, 1, true}, {50, 2, true}});
    cfg.na = {{50, 1, true}, {0, 0, false}};
    CHECK(cfg.na_grid() == std::vector<NASetting>{{50, 1, true}, {0, 0, true}, {50, 0, true}, {50, 2, true}});
}

TEST_CASE("config hash follows content, not the output directory") {
    auto a = parse_config(kSmall);
    auto b = parse_config(kSmall);
    b.output_dir = "elsewhere";
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    b.seed = 4;
    CHECK(a.hash() != b.hash());
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("load_config resolves dataset paths against the config directory") {
    const auto dir = fresh_dir("cfgdir");
    fs::create_directories(dir / "data");
    std::ofstream(dir / "data" / "tiny.csv") << "x,label\n0,0\n1,0\n2,0\n9,1\n";
    std::ofstream(dir / "exp.ini") << "[dataset]\npath = data/tiny.csv\nlabel_column = label\n"
                                      "[detector]\nname = knn\nk = 1\n";
    const auto cfg = load_config(dir / "exp.ini");
    CHECK(cfg.datasets[0].name == "tiny");
    CHECK(cfg.datasets[0].load().size() == 4);
}

TEST_CASE("run_experiment: a single cell") {
    const auto report = run_experiment(parse_config(kSmall));
    REQUIRE(report.rows.size() == 1);
    const auto& r = report.rows[0];
    CHECK(r.dataset == "clusters-200-10-2-s5");
    CHECK(r.detector == "knn-k10");
    CHECK(r.na_iterations == 0);
    CHECK(r.na_time_s == 0.0);
    CHECK(r.detector_time_s >= 0.0);
    CHECK_FALSE(r.failed());
    CHECK(r.precision == r.recall);
    CHECK(r.f1_harmonic == r.f1_paper);
}

TEST_CASE("run_experiment is deterministic and job-count independent") {
    const auto cfg = parse_config(std::string(kSmall) + R"(
[detector]
name = iforest
n_trees = 20

[detector]
name = lof
k = 15

[na]
k = 30

[ensemble]
members = knn, lof
)");
    const auto a = run_experiment(cfg, {1, true, 0.0});
    const auto b = run_experiment(cfg, {4, true, 0.0});
    REQUIRE(a.rows.size() == 3 * 2 + 2);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].dataset == b.rows[i].dataset);
        CHECK(a.rows[i].detector == b.rows[i].detector);
        CHECK(a.rows[i].auc == b.rows[i].auc);
        CHECK(a.rows[i].f1_paper == b.rows[i].f1_paper);
        CHECK(a.rows[i].graph_reused == b.rows[i].graph_reused);
        CHECK(a.rows[i].roc == b.rows[i].roc);
    }
    // Canonical order.
    CHECK(a.rows[0].detector == "ensemble-knn-k10+lof-k15");
    CHECK(a.rows.back().detector == "lof-k15");
    // LOF at k = 15 cannot lend its graph to NA at k = 30; knn at 10 neither.
    for (const auto& r : a.rows) CHECK_FALSE(r.graph_reused);
}

TEST_CASE("failed cells stay in the grid") {
    const auto cfg = parse_config(R"(
[dataset]
name = missing
path = /nonexistent/file.csv

[dataset]
synthetic = 50,5,2,1.0,1

[detector]
name = knn
k = 10
)");
    const auto report = run_experiment(cfg);
    CHECK(report.rows.size() == 4);
    CHECK(report.has_errors());
    std::size_t failed = 0;
    for (const auto& r : report.rows) {
        if (!r.failed()) continue;
        ++failed;
        CHECK(r.dataset == "missing");
        CHECK(std::isnan(r.auc));
        CHECK(r.error.find("nonexistent") != std::string::npos);
    }
    CHECK(failed == 2);
}

TEST_CASE("unlabelled datasets fail their cells") {
    const auto dir = fresh_dir("unlabelled");
    fs::create_directories(dir);
    std::ofstream(dir / "u.csv") << "0,0\n1,1\n2,2\n3,3\n";
    ExperimentConfig cfg;
    cfg.datasets.push_back({"u", dir / "u.csv", {}, std::nullopt});
    cfg.detectors.push_back({});
    cfg.detectors[0].k = 2;
    const auto report = run_experiment(cfg);
    for (const auto& r : report.rows) CHECK(r.error.find("labels") != std::string::npos);
}

TEST_CASE("axes") {
    CHECK(parse_axis("na_k") == Axis::na_k);
    CHECK_THROWS_AS(parse_axis("colour"), InvalidArgument);
    CHECK(parse_axes("dataset,detector") == std::vector<Axis>{Axis::dataset, Axis::detector});
    CHECK(parse_axes("").empty());
}

TEST_CASE("summarize") {
    ExperimentReport single;
    single.rows.push_back(row("d", "knn", 0, 0, 0.8));
    const std::vector<Axis> by_detector{Axis::detector};
    const auto s1 = summarize(single, by_detector);
    REQUIRE(s1.groups.size() == 1);
    CHECK(s1.groups[0].auc == 0.8);
    CHECK(s1.groups[0].f1_paper == 0.4);
    CHECK(s1.groups[0].count == 1);

    ExperimentReport two;
    two.rows = {row("a", "knn", 0, 0, 0.6), row("b", "knn", 0, 0, 0.8)};
    CHECK(summarize(two, by_detector).groups[0].auc == doctest::Approx(0.7));

    ExperimentReport many;
    for (const char* ds : {"a", "b", "c"}) {
        for (const char* det : {"knn", "lof"}) {
            many.rows.push_back(row(ds, det, 0, 0, 0.6));
            many.rows.push_back(row(ds, det, 100, 1, 0.7));
            many.rows.push_back(row(ds, det, 20, 1, ds[0] == 'a' ? 0.9 : 0.65));
        }
    }
    many.rows.push_back(row("a", "knn", 5, 1, std::nan("")));
    many.rows.back().error = "boom";
    const std::vector<Axis> by_ds{Axis::dataset};
    std::size_t total = 0;
    for (const auto& g : summarize(many, by_ds).groups) total += g.count;
    CHECK(total == many.rows.size());
    CHECK(summarize(many, std::vector<Axis>{}).groups.size() == 1);

    const auto s = summarize(many, by_detector);
    REQUIRE(s.triplets.size() == 2);
    const auto& t = s.triplets[0];
    CHECK(t.detector == "knn");
    CHECK(t.datasets == 3);
    CHECK(t.auc_original == doctest::Approx(0.6));
    CHECK(t.auc_na_default == doctest::Approx(0.7));
    CHECK(t.auc_na_best == doctest::Approx((0.9 + 0.7 + 0.7) / 3.0));
    CHECK(t.auc_diff_default == doctest::Approx(0.1));
    CHECK(s.groups[0].failed == 1);
    CHECK(s.groups[0].count == 10);
    CHECK(s.groups[0].auc == doctest::Approx((0.6 * 3 + 0.7 * 3 + 0.9 + 0.65 * 2) / 9.0));

    CHECK_THROWS_AS(summarize(ExperimentReport{}, by_detector), InvalidArgument);
    CHECK(format_summary(s).find("knn") != std::string::npos);
    CHECK(format_triplets(s).find("lof") != std::string::npos);
}

TEST_CASE("report csv round trip") {
    auto report = run_experiment(parse_config(std::string(kSmall) + "[na]\nk = 20\n"));
    report.rows.push_back(row("x,y", "knn \"q\"", 1, 1, std::nan("")));
    report.rows.back().error = "bad";
    const auto dir = fresh_dir("csv");
    fs::create_directories(dir);
    write_report_csv(report, dir / "r.csv");
    CHECK(slurp(dir / "r.csv").rfind("dataset,detector,na_k,na_iterations,auc,precision,recall,"
                                     "f1_harmonic,f1_paper,detector_time_s,na_time_s,graph_reused\n",
                                     0) == 0);
    const auto back = read_report_csv(dir / "r.csv");
    REQUIRE(back.rows.size() == report.rows.size());
    for (std::size_t i = 0; i + 1 < back.rows.size(); ++i) {
        CHECK(back.rows[i].auc == report.rows[i].auc);
        CHECK(back.rows[i].detector_time_s == report.rows[i].detector_time_s);
        CHECK(back.rows[i].graph_reused == report.rows[i].graph_reused);
    }
    CHECK(back.rows.back().dataset == "x,y");
    CHECK(back.rows.back().detector == "knn \"q\"");
    CHECK(back.rows.back().failed());
    std::ofstream(dir / "bad.csv") << "nope\n";
    CHECK_THROWS_AS(read_report_csv(dir / "bad.csv"), ParseError);
}

TEST_CASE("emit_reports") {
    const auto cfg = parse_config(std::string(kSmall) + "[na]\nk = 20\n");
    const auto report = run_experiment(cfg);

    SUBCASE("no summaries: manifest and raw csv only") {
        const auto dir = fresh_dir("emit_plain");
        ExperimentReport bare = report;
        for (auto& r : bare.rows) r.roc.clear();
        const auto files = emit_reports(bare, {}, dir, cfg.hash());
        CHECK(files == std::vector<fs::path>{"report.csv", "manifest.txt"});
        std::set<fs::path> on_disk;
        for (const auto& e : fs::recursive_directory_iterator(dir)) on_disk.insert(fs::relative(e.path(), dir));
        CHECK(on_disk == std::set<fs::path>{"report.csv", "manifest.txt"});
    }
    SUBCASE("manifest lists every artifact and is stable across reruns") {
        const auto dir = fresh_dir("emit_full");
        const std::vector<Summary> summaries{summarize(report, std::vector<Axis>{Axis::detector})};
        const auto first = emit_reports(report, summaries, dir, cfg.hash());
        const auto manifest = slurp(dir / "manifest.txt");
        const auto again = emit_reports(run_experiment(cfg), summaries, dir, cfg.hash());
        CHECK(first == again);
        CHECK(slurp(dir / "manifest.txt") == manifest);
        CHECK(manifest.find(cfg.hash()) != std::string::npos);
        for (const auto& f : first) CHECK(fs::exists(dir / f));
        std::istringstream lines(manifest);
        std::string line;
        std::size_t listed = 0;
        while (std::getline(lines, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("config_hash", 0) == 0) continue;
            const auto tab = line.find('\t');
            CHECK(fs::exists(dir / line.substr(0, tab)));
            ++listed;
        }
        CHECK(listed + 1 == first.size());
        CHECK(fs::exists(dir / "roc" / "clusters-200-10-2-s5__knn-k10__k20__it1.csv"));
    }
}
