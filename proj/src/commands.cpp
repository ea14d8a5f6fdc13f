#include "spur/commands.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "spur/controllers.hpp"
#include "spur/gridworld.hpp"

namespace spur {

namespace fs = std::filesystem;

namespace {

struct Job {
    int run_index = 0;
    std::string scenario_path;
};

struct JobResult {
    EpisodeLog log;
    std::vector<MemoryWriteOp> write_ops;
};

std::string scenario_label(const Scenario& scenario, const std::string& path) {
    if (!scenario.name.empty()) return scenario.name;
    return fs::path(path).stem().string();
}

JobResult run_job(const RunConfig& cfg, const Job& job, const MemoryBank& base_bank,
                  const KnowledgeGraph& base_graph, std::uint64_t hash) {
    Scenario scenario = load_scenario(job.scenario_path);
    GridWorld env = GridWorld::from_scenario(scenario);
    ScriptedStrategic strategic(&env, cfg.thresholds);
    ScriptedReactive reactive(&env);
    MemoryBank bank = base_bank;
    KnowledgeGraph graph = base_graph;
    BudgetLedger ledger;

    EpisodeParams params;
    params.thresholds = cfg.thresholds;
    params.mode = cfg.mode;
    params.caps = cfg.caps;
    params.fusion = cfg.fusion;
    params.seed = cfg.seed + static_cast<unsigned>(job.run_index);
    params.config_hash = hash;
    params.scenario_name = scenario_label(scenario, job.scenario_path);
    params.task_text = cfg.task_text;
    params.hint_k = cfg.hint_k;

    JobResult result;
    result.log = run_episode(env, strategic, reactive, bank, graph, ledger, params,
                             &result.write_ops);
    return result;
}

/// Run all jobs with a bounded worker pool. Results land in job order
/// regardless of scheduling, so outputs stay deterministic.
std::vector<JobResult> run_all_jobs(const RunConfig& cfg, const std::vector<Job>& jobs,
                                    const MemoryBank& base_bank,
                                    const KnowledgeGraph& base_graph,
                                    std::uint64_t hash) {
    std::vector<JobResult> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) break;
            try {
                results[j] = run_job(cfg, jobs[j], base_bank, base_graph, hash);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    std::size_t pool_size = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(1, cfg.workers)), std::max<std::size_t>(1, jobs.size()));
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
    for (const auto& error : errors) {
        if (error) std::rethrow_exception(error);
    }
    return results;
}

std::vector<RunReport> build_reports(const std::vector<EpisodeLog>& logs) {
    std::vector<RunReport> reports;
    std::vector<std::string> order;
    std::map<std::string, std::vector<EpisodeLog>> by_scenario;
    for (const EpisodeLog& log : logs) {
        const std::string& label = log.scenario_name;
        if (by_scenario.find(label) == by_scenario.end()) order.push_back(label);
        by_scenario[label].push_back(log);
    }
    for (const std::string& label : order) {
        reports.push_back(compute_run_report(label, by_scenario[label]));
    }
    reports.push_back(compute_run_report("all", logs));
    return reports;
}

nlohmann::json aggregate_json(const std::map<std::string, std::vector<double>>& per_metric) {
    nlohmann::json out;
    for (const auto& [name, values] : per_metric) {
        Aggregate agg = aggregate_runs(values);
        nlohmann::json j;
        j["mean"] = agg.mean;
        if (agg.std_dev) j["std"] = *agg.std_dev;
        out[name] = std::move(j);
    }
    return out;
}

nlohmann::json report_json(const RunReport& r) {
    nlohmann::json j;
    j["label"] = r.label;
    j["episodes"] = r.episodes;
    j["sr"] = r.sr;
    j["tokens_per_task"] = r.tokens;
    j["strategic_calls_per_step"] = r.strategic_cps;
    j["recovery"] = {{"n_step", r.recovery.n_step},
                     {"n_stuck", r.recovery.n_stuck},
                     {"n_recovered", r.recovery.n_recovered},
                     {"stuck_rate", r.recovery.stuck_rate},
                     {"recovery_rate", r.recovery.recovery_rate},
                     {"ratio", ratio_display(r.recovery)}};
    return j;
}

/// mean/std across run repeats for the headline metrics; one value per
/// run index, each covering that run's full scenario sweep.
std::map<std::string, std::vector<double>> per_run_metrics(
    const std::vector<Job>& jobs, const std::vector<EpisodeLog>& logs, int repeat) {
    std::map<std::string, std::vector<double>> metrics;
    for (int run = 0; run < repeat; ++run) {
        std::vector<EpisodeLog> run_logs;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            if (jobs[j].run_index == run) run_logs.push_back(logs[j]);
        }
        if (run_logs.empty()) continue;
        metrics["sr"].push_back(budgeted_sr(run_logs));
        metrics["tokens_per_task"].push_back(tokens_per_task(run_logs));
        metrics["strategic_calls_per_step"].push_back(strategic_calls_per_step(run_logs));
    }
    return metrics;
}

MemoryBank load_base_bank(const RunConfig& cfg) {
    if (!cfg.samb_in.empty()) return MemoryBank::load_jsonl(cfg.samb_in, cfg.samb);
    return MemoryBank(cfg.samb);
}

KnowledgeGraph load_base_graph(const RunConfig& cfg) {
    if (!cfg.kg_nodes_in.empty() && !cfg.kg_edges_in.empty()) {
        return KnowledgeGraph::load_jsonl(cfg.kg_nodes_in, cfg.kg_edges_in, cfg.kg);
    }
    return KnowledgeGraph(cfg.kg);
}

int run_scenarios(const RunConfig& cfg, const fs::path& out_dir, RunOutcome* outcome,
                  std::vector<RunReport>* reports_out) {
    if (cfg.scenarios.empty()) {
        throw std::invalid_argument("no scenarios configured");
    }
    for (const std::string& path : cfg.scenarios) {
        if (!fs::exists(path)) {
            throw std::invalid_argument("scenario file not found: " + path);
        }
    }

    MemoryBank base_bank = load_base_bank(cfg);
    KnowledgeGraph base_graph = load_base_graph(cfg);
    std::uint64_t hash = config_hash(cfg);

    std::vector<Job> jobs;
    for (int run = 0; run < cfg.repeat; ++run) {
        for (const std::string& path : cfg.scenarios) {
            jobs.push_back({run, path});
        }
    }

    std::vector<JobResult> results = run_all_jobs(cfg, jobs, base_bank, base_graph, hash);

    // Fold the per-episode write deltas back into the shared stores in
    // job order, so the persisted memories do not depend on worker
    // scheduling.
    for (const JobResult& result : results) {
        for (const MemoryWriteOp& op : result.write_ops) {
            apply_write_op(op, base_bank, base_graph);
        }
    }

    fs::create_directories(out_dir);
    std::vector<EpisodeLog> logs;
    logs.reserve(results.size());
    std::vector<std::string> log_paths;
    for (std::size_t j = 0; j < results.size(); ++j) {
        const EpisodeLog& log = results[j].log;
        std::ostringstream name;
        name << fs::path(jobs[j].scenario_path).stem().string() << "_run"
             << jobs[j].run_index << ".jsonl";
        fs::path path = out_dir / name.str();
        save_episode_jsonl(log, path.string());
        log_paths.push_back(path.string());
        logs.push_back(log);
    }

    std::vector<RunReport> reports = build_reports(logs);
    write_reports_csv(reports, (out_dir / "summary.csv").string());
    nlohmann::json summary;
    summary["reports"] = nlohmann::json::array();
    for (const RunReport& r : reports) summary["reports"].push_back(report_json(r));
    summary["aggregate_across_runs"] = aggregate_json(per_run_metrics(jobs, logs, cfg.repeat));
    std::ofstream summary_file(out_dir / "summary.json", std::ios::binary);
    summary_file << summary.dump(2) << '\n';

    if (!cfg.samb_out.empty()) base_bank.save_jsonl(cfg.samb_out);
    if (!cfg.kg_nodes_out.empty() && !cfg.kg_edges_out.empty()) {
        base_graph.save_jsonl(cfg.kg_nodes_out, cfg.kg_edges_out);
    }

    if (outcome) {
        outcome->logs = logs;
        outcome->log_paths = log_paths;
    }
    if (reports_out) *reports_out = reports;

    bool all_success = std::all_of(logs.begin(), logs.end(),
                                   [](const EpisodeLog& log) { return log.success; });
    return all_success ? kExitSuccess : kExitEpisodeFailures;
}

}  // namespace

const std::vector<std::string> kSweepSettingNames = {
    "more_strategic",
    "default",
    "more_reactive",
    "no_periodic_refresh",
};

ThresholdConfig sweep_setting(const std::string& name, const ThresholdConfig& base) {
    ThresholdConfig th = base;
    if (name == "more_strategic") {
        th.T = 3;
        th.tau_v = 0.30;
        th.tau_z = 3;
        th.tau_r = 4;
        th.tau_rz = 2;
    } else if (name == "default") {
        th.T = 4;
        th.tau_v = 0.35;
        th.tau_z = 4;
        th.tau_r = 5;
        th.tau_rz = 2;
    } else if (name == "more_reactive") {
        th.T = 6;
        th.tau_v = 0.40;
        th.tau_z = 5;
        th.tau_r = 5;
        th.tau_rz = 3;
    } else if (name == "no_periodic_refresh") {
        th.T = ThresholdConfig::kUnboundedRefresh;
        th.tau_v = 0.35;
        th.tau_z = 4;
        th.tau_r = 5;
        th.tau_rz = 2;
    } else {
        throw std::invalid_argument("unknown sweep setting '" + name + "'");
    }
    return th;
}

int cmd_run(const RunConfig& cfg, RunOutcome* outcome) {
    try {
        return run_scenarios(cfg, fs::path(cfg.output_dir), outcome, nullptr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cmd_sweep(const RunConfig& cfg, std::vector<std::string> settings,
              std::vector<RunReport>* reports_out) {
    try {
        if (settings.empty()) settings = kSweepSettingNames;
        std::vector<RunReport> rows;
        int worst = kExitSuccess;
        for (const std::string& name : settings) {
            RunConfig setting_cfg = cfg;
            setting_cfg.thresholds = sweep_setting(name, cfg.thresholds);
            setting_cfg.output_dir = (fs::path(cfg.output_dir) / name).string();
            std::vector<RunReport> reports;
            int status = run_scenarios(setting_cfg, fs::path(setting_cfg.output_dir),
                                       nullptr, &reports);
            worst = std::max(worst, status);
            RunReport row = reports.back();  // the "all" row
            row.label = name;
            rows.push_back(std::move(row));
        }

        fs::create_directories(cfg.output_dir);
        write_reports_csv(rows, (fs::path(cfg.output_dir) / "sweep.csv").string());
        nlohmann::json out = nlohmann::json::array();
        for (const RunReport& row : rows) out.push_back(report_json(row));
        std::ofstream json_file(fs::path(cfg.output_dir) / "sweep.json", std::ios::binary);
        json_file << out.dump(2) << '\n';

        if (reports_out) *reports_out = rows;
        return worst;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cmd_report(const std::string& log_dir, const std::string& output_dir) {
    try {
        std::vector<std::string> paths;
        if (!fs::is_directory(log_dir)) {
            throw std::invalid_argument("not a directory: " + log_dir);
        }
        for (const auto& entry : fs::directory_iterator(log_dir)) {
            if (entry.path().extension() == ".jsonl") {
                paths.push_back(entry.path().string());
            }
        }
        std::sort(paths.begin(), paths.end());
        if (paths.empty()) {
            throw std::invalid_argument("no .jsonl logs in " + log_dir);
        }

        std::vector<EpisodeLog> logs;
        std::map<int, std::vector<EpisodeLog>> by_run;
        std::regex run_pattern("_run([0-9]+)\\.jsonl$");
        for (const std::string& path : paths) {
            EpisodeLog log = load_episode_jsonl(path);
            std::smatch match;
            int run = 0;
            if (std::regex_search(path, match, run_pattern)) {
                run = std::stoi(match[1].str());
            }
            by_run[run].push_back(log);
            logs.push_back(std::move(log));
        }

        std::vector<std::string> order;
        std::map<std::string, std::vector<EpisodeLog>> by_scenario;
        for (const EpisodeLog& log : logs) {
            if (by_scenario.find(log.scenario_name) == by_scenario.end()) {
                order.push_back(log.scenario_name);
            }
            by_scenario[log.scenario_name].push_back(log);
        }
        std::vector<RunReport> reports;
        for (const std::string& label : order) {
            reports.push_back(compute_run_report(label, by_scenario[label]));
        }
        reports.push_back(compute_run_report("all", logs));

        std::map<std::string, std::vector<double>> per_run;
        for (const auto& [run, run_logs] : by_run) {
            per_run["sr"].push_back(budgeted_sr(run_logs));
            per_run["tokens_per_task"].push_back(tokens_per_task(run_logs));
            per_run["strategic_calls_per_step"].push_back(
                strategic_calls_per_step(run_logs));
        }

        fs::create_directories(output_dir);
        write_reports_csv(reports, (fs::path(output_dir) / "report.csv").string());
        nlohmann::json summary;
        summary["reports"] = nlohmann::json::array();
        for (const RunReport& r : reports) summary["reports"].push_back(report_json(r));
        summary["aggregate_across_runs"] = aggregate_json(per_run);
        std::ofstream json_file(fs::path(output_dir) / "report.json", std::ios::binary);
        json_file << summary.dump(2) << '\n';
        return kExitSuccess;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cmd_import_embeddings(const RunConfig& cfg, const std::string& vectors_path) {
    try {
        if (cfg.kg_nodes_in.empty() || cfg.kg_edges_in.empty()) {
            throw std::invalid_argument(
                "import requires kg_nodes_in and kg_edges_in in [memory]");
        }
        KnowledgeGraph graph =
            KnowledgeGraph::load_jsonl(cfg.kg_nodes_in, cfg.kg_edges_in, cfg.kg);

        std::ifstream file(vectors_path);
        if (!file) {
            throw std::invalid_argument("cannot open " + vectors_path);
        }
        std::string line;
        int line_no = 0;
        long long imported = 0;
        long long skipped = 0;
        while (std::getline(file, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                throw std::invalid_argument(vectors_path + ":" + std::to_string(line_no) +
                                            ": bad JSON");
            }
            auto text = j.at("state_text").get<std::string>();
            auto values = j.at("embedding").get<std::vector<double>>();
            Eigen::VectorXd vec = Eigen::Map<const Eigen::VectorXd>(
                values.data(), static_cast<Eigen::Index>(values.size()));
            if (graph.import_embedding(text, vec)) {
                imported += 1;
            } else {
                skipped += 1;
            }
        }

        std::string nodes_out = cfg.kg_nodes_out.empty() ? cfg.kg_nodes_in : cfg.kg_nodes_out;
        std::string edges_out = cfg.kg_edges_out.empty() ? cfg.kg_edges_in : cfg.kg_edges_out;
        graph.save_jsonl(nodes_out, edges_out);
        std::cout << "imported " << imported << " embeddings, skipped " << skipped
                  << " unmatched\n";
        return kExitSuccess;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

}  // namespace spur
