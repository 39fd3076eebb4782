#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "afc/report.hpp"
#include "afc/run_config.hpp"
#include "afc/error.hpp"
#include "oracles.hpp"

using namespace afc;

namespace {

ExperimentReport small_report() {
    std::mt19937_64 rng(1);
    LabeledDataset ds;
    ds.classes = {"a", "b"};
    for (int i = 0; i < 10; ++i) {
        ds.sequences.push_back({"g" + std::to_string(i), oracle::random_dna(rng, 200)});
        ds.labels.push_back(i % 2);
    }
    GridConfig grid;
    grid.models = {ModelConfig::parse("MB_a1"), ModelConfig::parse("LSVM_L2")};
    grid.k_min = 3;
    grid.k_max = 4;
    grid.fragment_lengths = {0, 50};
    grid.max_per_class = 5;
    grid.seed = 9;
    return run_grid(ds, grid);
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("fold and aggregate CSV layout") {
    const auto report = small_report();
    std::ostringstream folds, agg;
    write_fold_csv(folds, report);
    write_aggregate_csv(agg, report);
    const auto f = lines(folds.str());
    const auto a = lines(agg.str());
    CHECK(f[0] == "model,loss,penalty,alpha,C,lambda,k,fragment_length,fold,weighted_precision,"
                  "weighted_recall,weighted_f,seed,error");
    CHECK(a[0] == "model,loss,penalty,alpha,C,lambda,k,fragment_length,f_mean,f_std,n_folds");
    CHECK(f.size() == 1 + 2 * 2 * 2 * 5);
    CHECK(a.size() == 1 + 2 * 2 * 2);
    CHECK(f[1].rfind("MB_a1,,,1,,,3,0,0,", 0) == 0);
    bool saw_svm = false;
    for (const auto& line : a) {
        if (line.rfind("LSVM_L2,", 0) == 0) {
            saw_svm = true;
            CHECK(line.rfind("LSVM_L2,squared_hinge,L2,,1,1,", 0) == 0);
        }
    }
    CHECK(saw_svm);
}

TEST_CASE("JSON mirror") {
    const auto report = small_report();
    const auto doc = nlohmann::json::parse(report_json(report));
    CHECK(doc["metadata"]["seed"] == 9);
    CHECK(doc["metadata"]["dataset_digest"] == report.dataset_digest);
    CHECK(doc["aggregates"].size() == report.aggregates.size());
    CHECK(doc["cells"].size() == report.cells.size());
    CHECK(doc["metadata"]["std_convention"].get<std::string>().find("n-1") != std::string::npos);
    CHECK(doc["metadata"]["models"][1]["loss"] == "squared_hinge");
}

TEST_CASE("SVG chart") {
    const auto report = small_report();
    std::ostringstream out;
    write_svg(out, report, 50);
    const std::string svg = out.str();
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    std::size_t polylines = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) {
        ++polylines;
    }
    CHECK(polylines == 2);
    CHECK(svg.find("50 bp fragments") != std::string::npos);
}

TEST_CASE("k ranges and best/worst table") {
    CHECK(format_k_ranges({9, 10, 11, 12, 13, 14, 15}) == "9-15");
    CHECK(format_k_ranges({4, 6, 7, 8}) == "4,6-8");
    CHECK(format_k_ranges({5}) == "5");

    ExperimentReport report;
    report.models = {ModelConfig::parse("MB_a1")};
    report.fragment_lengths = {0};
    for (int k = 4; k <= 8; ++k) {
        AggregateRecord agg;
        agg.model = report.models[0];
        agg.k = k;
        agg.n_folds = 5;
        agg.f_mean = k >= 6 ? 0.9996 : 0.5 + 0.01 * k;
        agg.f_std = 0.01;
        report.aggregates.push_back(agg);
    }
    const auto rows = best_and_worst(report);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].best_k == std::vector<int>{6, 7, 8});
    CHECK(rows[0].worst_k == std::vector<int>{4});
    std::ostringstream out;
    write_best_table(out, rows);
    CHECK(out.str().find("1.000 +/- 0.010") != std::string::npos);
    CHECK(out.str().find("6-8") != std::string::npos);
}

TEST_CASE("run config parsing") {
    const auto dir = std::filesystem::temp_directory_path() / "afc_report_cfg";
    std::filesystem::create_directories(dir);
    { std::ofstream(dir / "d.fa") << ">a\nACGT\n"; }
    { std::ofstream(dir / "d.tsv") << "a\tx\n"; }
    const auto cfg = parse_run_config(R"({
        "fasta": "d.fa", "labels": "d.tsv", "k_min": 4, "k_max": 5,
        "models": ["MB_MLE", {"model": "LR", "penalty": "L1", "C": 2, "lambda": 0.5, "solver": "proximal"}],
        "n_folds": 4, "fragment_lengths": [0, 100], "seed": 7
    })", dir);
    CHECK(cfg.fasta == dir / "d.fa");
    REQUIRE(cfg.models.size() == 2);
    CHECK(cfg.models[1].id() == "LR_L1");
    CHECK(cfg.models[1].penalty.cost == 2.0);
    CHECK(cfg.models[1].penalty.lambda == 0.5);
    CHECK(cfg.models[1].solver.method == SolverMethod::ProximalGradient);
    CHECK(cfg.canonical_json().find("\"solver\":\"proximal\"") != std::string::npos);
    CHECK(cfg.grid().n_folds == 4);
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.digest() == parse_run_config(cfg.canonical_json(), dir).digest());

    CHECK_THROWS_AS(parse_run_config(R"({"fasta": "d.fa", "labels": "d.tsv", "models": ["XX"]})", dir),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config("{", dir), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"models": [{"model": "LR", "solver": "sgd"}]})", dir), ConfigError);
    auto bad = cfg;
    bad.k_min = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.fasta = dir / "missing.fa";
    CHECK_THROWS(bad.validate());
    std::filesystem::remove_all(dir);
}
