#pragma once

#include <map>
#include <string>
#include <vector>

#include "spur/config.hpp"
#include "spur/metrics.hpp"
#include "spur/runtime.hpp"

namespace spur {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitEpisodeFailures = 1;
inline constexpr int kExitConfigError = 2;

/// The four named threshold settings of the sensitivity sweep. W and
/// tau_ell are carried over from `base`; everything else is pinned by
/// the setting. Unknown names throw std::invalid_argument.
ThresholdConfig sweep_setting(const std::string& name, const ThresholdConfig& base);

extern const std::vector<std::string> kSweepSettingNames;

/// Episodes from one invocation, in job order (run-major, then
/// scenario), for in-process callers.
struct RunOutcome {
    std::vector<EpisodeLog> logs;
    std::vector<std::string> log_paths;
};

/// Run repeat x scenarios episodes, write JSONL logs plus summary
/// CSV/JSON into the output directory, persist memories when
/// configured. Exit 0 when every episode succeeded, 1 when any episode
/// ended short of success, 2 on configuration problems.
int cmd_run(const RunConfig& cfg, RunOutcome* outcome = nullptr);

/// Run the scenario list once per named setting and write the
/// per-setting metric table. Empty `settings` means all four names.
int cmd_sweep(const RunConfig& cfg, std::vector<std::string> settings,
              std::vector<RunReport>* reports_out = nullptr);

/// Recompute metrics over the JSONL logs in a directory. Idempotent.
int cmd_report(const std::string& log_dir, const std::string& output_dir);

/// Attach externally computed embeddings (JSONL: state_text +
/// embedding array) to matching graph nodes and save the graph back.
int cmd_import_embeddings(const RunConfig& cfg, const std::string& vectors_path);

}  // namespace spur
