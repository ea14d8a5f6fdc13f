#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "spur/commands.hpp"
#include "spur/embedding.hpp"
#include "spur/sakg.hpp"
#include "spur/samb.hpp"

using namespace spur;
namespace fs = std::filesystem;

namespace {

std::string scenario(const std::string& name) {
    return std::string(SPUR_SCENARIO_DIR) + "/" + name;
}

/// Scratch directory wiped on construction and destruction.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / ("spur_cmd_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& rel) const { return (path / rel).string(); }
};

/// Swallows the "error: ..." lines the command layer prints for
/// expected failures, and keeps them inspectable.
struct CaptureCerr {
    std::ostringstream out;
    std::streambuf* old;
    CaptureCerr() : old(std::cerr.rdbuf(out.rdbuf())) {}
    ~CaptureCerr() { std::cerr.rdbuf(old); }
};

std::string slurp(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    REQUIRE(file.good());
    std::ostringstream out;
    out << file.rdbuf();
    return out.str();
}

RunConfig base_config(const TempDir& dir) {
    RunConfig cfg;
    cfg.scenarios = {scenario("clean.json")};
    cfg.workers = 1;
    cfg.output_dir = dir.str("out");
    return cfg;
}

}  // namespace

TEST_CASE("sweep settings pin the trigger knobs and carry W and tau_ell") {
    ThresholdConfig base;
    base.W = 9;
    base.tau_ell = 7;

    ThresholdConfig strategic = sweep_setting("more_strategic", base);
    CHECK_EQ(strategic.T, 3);
    CHECK_EQ(strategic.tau_v, doctest::Approx(0.30));
    CHECK_EQ(strategic.tau_z, 3);
    CHECK_EQ(strategic.tau_r, 4);
    CHECK_EQ(strategic.tau_rz, 2);
    CHECK_EQ(strategic.W, 9);
    CHECK_EQ(strategic.tau_ell, 7);

    ThresholdConfig middle = sweep_setting("default", base);
    CHECK_EQ(middle.T, 4);
    CHECK_EQ(middle.tau_v, doctest::Approx(0.35));
    CHECK_EQ(middle.tau_z, 4);
    CHECK_EQ(middle.tau_r, 5);
    CHECK_EQ(middle.tau_rz, 2);

    ThresholdConfig reactive = sweep_setting("more_reactive", base);
    CHECK_EQ(reactive.T, 6);
    CHECK_EQ(reactive.tau_v, doctest::Approx(0.40));
    CHECK_EQ(reactive.tau_z, 5);
    CHECK_EQ(reactive.tau_r, 5);
    CHECK_EQ(reactive.tau_rz, 3);

    ThresholdConfig unclocked = sweep_setting("no_periodic_refresh", base);
    CHECK_EQ(unclocked.T, ThresholdConfig::kUnboundedRefresh);
    CHECK_EQ(unclocked.tau_v, doctest::Approx(0.35));
    CHECK_EQ(unclocked.W, 9);

    CHECK_THROWS_AS(sweep_setting("warp", base), std::invalid_argument);

    const std::vector<std::string> want{"more_strategic", "default", "more_reactive",
                                        "no_periodic_refresh"};
    CHECK_EQ(kSweepSettingNames, want);
}

TEST_CASE("cmd_run rejects misconfiguration with exit 2") {
    TempDir dir("badcfg");
    CaptureCerr quiet;

    RunConfig cfg = base_config(dir);
    cfg.scenarios = {"/nonexistent/foo.json"};
    CHECK_EQ(cmd_run(cfg), kExitConfigError);
    CHECK(quiet.out.str().find("scenario file not found") != std::string::npos);

    cfg.scenarios.clear();
    CHECK_EQ(cmd_run(cfg), kExitConfigError);
}

TEST_CASE("cmd_run writes logs and summaries for a clean episode") {
    TempDir dir("clean");
    RunConfig cfg = base_config(dir);

    RunOutcome outcome;
    CHECK_EQ(cmd_run(cfg, &outcome), kExitSuccess);
    REQUIRE_EQ(outcome.logs.size(), 1);
    CHECK(outcome.logs[0].success);
    CHECK_EQ(outcome.logs[0].scenario_name, "clean");
    CHECK_EQ(outcome.logs[0].seed, 42u);
    CHECK_EQ(outcome.logs[0].config_hash, config_hash(cfg));

    REQUIRE_EQ(outcome.log_paths.size(), 1);
    CHECK_EQ(fs::path(outcome.log_paths[0]).filename().string(), "clean_run0.jsonl");
    CHECK(fs::exists(outcome.log_paths[0]));
    CHECK(fs::exists(dir.str("out") + "/summary.csv"));

    nlohmann::json summary = nlohmann::json::parse(slurp(dir.str("out") + "/summary.json"));
    REQUIRE_EQ(summary["reports"].size(), 2);
    CHECK_EQ(summary["reports"][0]["label"], "clean");
    CHECK_EQ(summary["reports"][1]["label"], "all");
    CHECK_EQ(summary["reports"][1]["sr"].get<double>(), doctest::Approx(1.0));
    CHECK_EQ(summary["aggregate_across_runs"]["sr"]["mean"].get<double>(),
             doctest::Approx(1.0));
    // A single run has no spread to report.
    CHECK_FALSE(summary["aggregate_across_runs"]["sr"].contains("std"));
}

TEST_CASE("cmd_run repeats with distinct seeds per run index") {
    TempDir dir("repeat");
    RunConfig cfg = base_config(dir);
    cfg.repeat = 3;

    RunOutcome outcome;
    CHECK_EQ(cmd_run(cfg, &outcome), kExitSuccess);
    REQUIRE_EQ(outcome.logs.size(), 3);
    for (int run = 0; run < 3; ++run) {
        CHECK_EQ(outcome.logs[run].seed, 42u + static_cast<unsigned>(run));
        CHECK_EQ(fs::path(outcome.log_paths[run]).filename().string(),
                 "clean_run" + std::to_string(run) + ".jsonl");
    }

    nlohmann::json summary = nlohmann::json::parse(slurp(dir.str("out") + "/summary.json"));
    CHECK(summary["aggregate_across_runs"]["sr"].contains("std"));
}

TEST_CASE("a path longer than the step cap fails capped and passes budgeted") {
    TempDir dir("longpath");
    CaptureCerr quiet;
    RunConfig cfg = base_config(dir);
    cfg.scenarios = {scenario("long_path.json")};

    RunOutcome capped;
    CHECK_EQ(cmd_run(cfg, &capped), kExitEpisodeFailures);
    REQUIRE_EQ(capped.logs.size(), 1);
    CHECK_FALSE(capped.logs[0].success);
    CHECK_EQ(capped.logs[0].status, EpisodeStatus::step_cap);

    cfg.mode = RunMode::call_budgeted;
    cfg.output_dir = dir.str("out_budgeted");
    RunOutcome budgeted;
    CHECK_EQ(cmd_run(cfg, &budgeted), kExitSuccess);
    REQUIRE_EQ(budgeted.logs.size(), 1);
    CHECK(budgeted.logs[0].success);
    CHECK_GT(static_cast<int>(budgeted.logs[0].steps.size()), cfg.caps.easy);
}

TEST_CASE("worker count does not change a single byte of output") {
    TempDir dir("workers");
    RunConfig cfg = base_config(dir);
    cfg.scenarios = {scenario("clean.json"), scenario("scene_change.json")};
    cfg.repeat = 2;

    cfg.workers = 4;
    cfg.output_dir = dir.str("wide");
    RunOutcome wide;
    CHECK_EQ(cmd_run(cfg, &wide), kExitSuccess);

    cfg.workers = 1;
    cfg.output_dir = dir.str("serial");
    RunOutcome serial;
    CHECK_EQ(cmd_run(cfg, &serial), kExitSuccess);

    REQUIRE_EQ(wide.log_paths.size(), serial.log_paths.size());
    for (std::size_t i = 0; i < wide.log_paths.size(); ++i) {
        CHECK_EQ(slurp(wide.log_paths[i]), slurp(serial.log_paths[i]));
    }
    CHECK_EQ(slurp(dir.str("wide") + "/summary.csv"),
             slurp(dir.str("serial") + "/summary.csv"));
    CHECK_EQ(slurp(dir.str("wide") + "/summary.json"),
             slurp(dir.str("serial") + "/summary.json"));
}

TEST_CASE("cmd_report recomputes the run summary from logs alone") {
    TempDir dir("report");
    RunConfig cfg = base_config(dir);
    cfg.scenarios = {scenario("clean.json"), scenario("scene_change.json")};
    cfg.repeat = 2;
    cfg.workers = 2;
    CHECK_EQ(cmd_run(cfg), kExitSuccess);

    CHECK_EQ(cmd_report(dir.str("out"), dir.str("rep")), kExitSuccess);
    nlohmann::json summary = nlohmann::json::parse(slurp(dir.str("out") + "/summary.json"));
    nlohmann::json report = nlohmann::json::parse(slurp(dir.str("rep") + "/report.json"));
    CHECK_EQ(summary["reports"], report["reports"]);
    CHECK_EQ(summary["aggregate_across_runs"], report["aggregate_across_runs"]);

    // Idempotent: a second pass over the same logs changes nothing.
    CHECK_EQ(cmd_report(dir.str("out"), dir.str("rep")), kExitSuccess);
    nlohmann::json again = nlohmann::json::parse(slurp(dir.str("rep") + "/report.json"));
    CHECK_EQ(report, again);
    CHECK(fs::exists(dir.str("rep") + "/report.csv"));
}

TEST_CASE("cmd_report rejects missing, empty, and corrupt inputs") {
    TempDir dir("badreport");
    CaptureCerr quiet;

    CHECK_EQ(cmd_report(dir.str("missing"), dir.str("rep")), kExitConfigError);

    fs::create_directories(dir.str("empty"));
    CHECK_EQ(cmd_report(dir.str("empty"), dir.str("rep")), kExitConfigError);

    fs::create_directories(dir.str("corrupt"));
    std::ofstream bad(dir.str("corrupt") + "/x.jsonl", std::ios::binary);
    bad << "not json\n";
    bad.close();
    CHECK_EQ(cmd_report(dir.str("corrupt"), dir.str("rep")), kExitConfigError);
}

TEST_CASE("memory endpoints persist and reload across runs") {
    TempDir dir("persist");
    RunConfig cfg = base_config(dir);
    cfg.samb_out = dir.str("bank.jsonl");
    cfg.kg_nodes_out = dir.str("nodes.jsonl");
    cfg.kg_edges_out = dir.str("edges.jsonl");
    CHECK_EQ(cmd_run(cfg), kExitSuccess);

    MemoryBank bank = MemoryBank::load_jsonl(cfg.samb_out, cfg.samb);
    CHECK(bank.size() > 0);
    KnowledgeGraph graph = KnowledgeGraph::load_jsonl(cfg.kg_nodes_out, cfg.kg_edges_out, cfg.kg);
    CHECK(graph.node_count() > 0);
    CHECK(graph.edge_count() > 0);

    RunConfig warm = base_config(dir);
    warm.output_dir = dir.str("warm_out");
    warm.samb_in = cfg.samb_out;
    warm.kg_nodes_in = cfg.kg_nodes_out;
    warm.kg_edges_in = cfg.kg_edges_out;
    warm.samb_out = dir.str("bank2.jsonl");
    CHECK_EQ(cmd_run(warm), kExitSuccess);
    MemoryBank warmed = MemoryBank::load_jsonl(warm.samb_out, warm.samb);
    CHECK(warmed.size() >= bank.size());
}

TEST_CASE("cmd_sweep writes one row per requested setting") {
    TempDir dir("sweep");
    RunConfig cfg = base_config(dir);

    std::vector<RunReport> rows;
    CHECK_EQ(cmd_sweep(cfg, {"default"}, &rows), kExitSuccess);
    REQUIRE_EQ(rows.size(), 1);
    CHECK_EQ(rows[0].label, "default");
    CHECK(fs::exists(dir.str("out") + "/sweep.csv"));
    CHECK(fs::exists(dir.str("out") + "/sweep.json"));
    CHECK(fs::exists(dir.str("out") + "/default/summary.csv"));

    CaptureCerr quiet;
    CHECK_EQ(cmd_sweep(cfg, {"warp"}, nullptr), kExitConfigError);
}

TEST_CASE("cmd_import_embeddings replaces matching node vectors") {
    TempDir dir("import");
    KnowledgeGraph seed_graph;
    seed_graph.upsert_transition("torch room", "use torch", "lit room", true, 1.0, 1.0);
    seed_graph.save_jsonl(dir.str("nodes.jsonl"), dir.str("edges.jsonl"));

    RunConfig cfg;
    cfg.kg_nodes_in = dir.str("nodes.jsonl");
    cfg.kg_edges_in = dir.str("edges.jsonl");
    cfg.kg_nodes_out = dir.str("nodes_out.jsonl");
    cfg.kg_edges_out = dir.str("edges_out.jsonl");

    {
        std::ofstream vectors(dir.str("vectors.jsonl"), std::ios::binary);
        std::vector<double> axis(default_embedder()->dim(), 0.0);
        axis[0] = 2.0;  // not unit length; import renormalizes
        nlohmann::json match;
        match["state_text"] = "torch room";
        match["embedding"] = axis;
        vectors << match.dump() << '\n';
        nlohmann::json miss;
        miss["state_text"] = "nowhere";
        miss["embedding"] = axis;
        vectors << miss.dump() << '\n';
    }
    CHECK_EQ(cmd_import_embeddings(cfg, dir.str("vectors.jsonl")), kExitSuccess);

    KnowledgeGraph loaded =
        KnowledgeGraph::load_jsonl(cfg.kg_nodes_out, cfg.kg_edges_out, cfg.kg);
    const StateNode* node = loaded.find_node("torch room");
    REQUIRE(node != nullptr);
    CHECK_EQ(node->embedding(0), doctest::Approx(1.0));
    CHECK_EQ(node->embedding.norm(), doctest::Approx(1.0));
    // The unmatched line is skipped, never turned into a node.
    CHECK_EQ(loaded.node_count(), 2);

    CaptureCerr quiet;
    RunConfig bare;
    CHECK_EQ(cmd_import_embeddings(bare, dir.str("vectors.jsonl")), kExitConfigError);
    CHECK_EQ(cmd_import_embeddings(cfg, dir.str("missing.jsonl")), kExitConfigError);

    std::ofstream bad(dir.str("bad.jsonl"), std::ios::binary);
    bad << "not json\n";
    bad.close();
    CHECK_EQ(cmd_import_embeddings(cfg, dir.str("bad.jsonl")), kExitConfigError);

    std::ofstream short_vec(dir.str("short.jsonl"), std::ios::binary);
    nlohmann::json j;
    j["state_text"] = "torch room";
    j["embedding"] = std::vector<double>{1.0, 2.0};
    short_vec << j.dump() << '\n';
    short_vec.close();
    CHECK_EQ(cmd_import_embeddings(cfg, dir.str("short.jsonl")), kExitConfigError);
}
