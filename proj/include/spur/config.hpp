#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spur/fusion.hpp"
#include "spur/ledger.hpp"
#include "spur/runtime.hpp"
#include "spur/sakg.hpp"
#include "spur/samb.hpp"
#include "spur/trigger.hpp"

namespace spur {

/// Everything a run needs, with defaults matching the shipped
/// hyperparameter set. Parsed from an INI-style file with [sections].
struct RunConfig {
    std::vector<std::string> scenarios;
    ThresholdConfig thresholds;
    SambWeights samb;
    KgConfig kg;
    FusionConfig fusion;
    StepCaps caps;
    RunMode mode = RunMode::step_capped;
    unsigned seed = 42;
    int repeat = 1;
    int workers = 8;
    int hint_k = 5;
    std::string output_dir = "out";
    std::string task_text = "navigate to the target and finish the task";

    // Optional persistence endpoints; empty means off.
    std::string samb_in;
    std::string samb_out;
    std::string kg_nodes_in;
    std::string kg_edges_in;
    std::string kg_nodes_out;
    std::string kg_edges_out;
};

/// Strict parser: unknown sections or keys are rejected so typos fail
/// loudly. Throws std::invalid_argument with file/line context.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical form: fixed section and key order, every value written.
/// parse(serialize(cfg)) == cfg.
std::string serialize_config(const RunConfig& cfg);

/// Hash of the canonical form with the purely operational fields
/// (workers, output_dir, *_out endpoints) normalized away: two runs
/// with the same hash produce byte-identical logs.
std::uint64_t config_hash(const RunConfig& cfg);

/// SPUR_SEED and SPUR_OUTPUT_DIR override the parsed values.
void apply_env_overrides(RunConfig& cfg);

}  // namespace spur
