#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "spur/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered dual-controller runtime"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> scenarios;
    std::vector<std::string> settings;
    std::string mode;
    std::string output_dir;
    unsigned seed = 42;
    int workers = 8;
    int repeat = 1;
    bool print_config = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Config file (INI-style sections)");
        cmd->add_option("--scenario", scenarios,
                        "Scenario JSON path, repeatable; overrides the config list");
        cmd->add_option("--seed", seed, "Base seed (per-run seeds are seed + run index)");
        cmd->add_option("--workers", workers, "Parallel episode workers");
        cmd->add_option("--repeat", repeat, "Runs per scenario");
        cmd->add_option("--mode", mode, "step_capped or call_budgeted");
        cmd->add_option("--output-dir", output_dir, "Directory for logs and summaries");
        cmd->add_flag("--print-config", print_config,
                      "Print the effective config and exit");
    };

    CLI::App* run = app.add_subcommand("run", "Run the configured scenarios");
    add_common(run);

    CLI::App* sweep = app.add_subcommand("sweep", "Threshold sensitivity sweep");
    add_common(sweep);
    sweep->add_option("--setting", settings,
                      "Named setting, repeatable (default: all four)");

    std::string log_dir;
    std::string report_out = "report";
    CLI::App* report = app.add_subcommand("report", "Recompute metrics from logs");
    report->add_option("--logs", log_dir, "Directory with .jsonl episode logs")
        ->required();
    report->add_option("--output-dir", report_out, "Where to write report files");

    std::string vectors_path;
    CLI::App* import_cmd =
        app.add_subcommand("import-embeddings", "Attach external node embeddings");
    import_cmd->add_option("--config", config_path, "Config with [memory] kg paths")
        ->required();
    import_cmd->add_option("--vectors", vectors_path, "JSONL of state_text + embedding")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) {
            return spur::cmd_report(log_dir, report_out);
        }
        if (import_cmd->parsed()) {
            spur::RunConfig cfg = spur::load_config(config_path);
            spur::apply_env_overrides(cfg);
            return spur::cmd_import_embeddings(cfg, vectors_path);
        }

        CLI::App* active = run->parsed() ? run : sweep;
        spur::RunConfig cfg;
        if (!config_path.empty()) cfg = spur::load_config(config_path);
        spur::apply_env_overrides(cfg);
        if (!scenarios.empty()) cfg.scenarios = scenarios;
        if (active->count("--seed")) cfg.seed = seed;
        if (active->count("--workers")) cfg.workers = workers;
        if (active->count("--repeat")) cfg.repeat = repeat;
        if (active->count("--mode")) cfg.mode = spur::parse_run_mode(mode);
        if (active->count("--output-dir")) cfg.output_dir = output_dir;

        if (print_config) {
            std::cout << spur::serialize_config(cfg);
            return spur::kExitSuccess;
        }
        if (run->parsed()) {
            return spur::cmd_run(cfg);
        }
        return spur::cmd_sweep(cfg, settings);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return spur::kExitConfigError;
    }
}
