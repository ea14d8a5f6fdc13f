#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spur/runtime.hpp"

namespace spur {

inline constexpr double kRatioEpsilon = 1e-9;

struct RecoveryStats {
    long long n_step = 0;
    long long n_stuck = 0;
    long long n_recovered = 0;
    double stuck_rate = 0.0;
    double recovery_rate = 0.0;
    double ratio = 0.0;
    bool no_stuck_events = false;
};

/// Formats the ratio, honoring the degenerate marker ("no stuck events"
/// is reported instead of a number, never 0).
std::string ratio_display(const RecoveryStats& stats);

/// Pure arithmetic over raw counts: StuckRate = N_stuck/N_step,
/// RecoveryRate = N_rec/max(1, N_stuck), ratio = RecoveryRate /
/// max(StuckRate, eps).
RecoveryStats recovery_stats_from_counts(long long n_step, long long n_stuck,
                                         long long n_recovered);

/// Scan logs for stuck events (invalid actions and empty/wait steps)
/// and recoveries (a level-0, non-stuck step within the next three
/// steps of the same episode). Throws std::invalid_argument on an empty
/// log set.
RecoveryStats stuck_recovery(const std::vector<EpisodeLog>& logs);

/// Fraction of successful episodes. All logs must share one run mode;
/// mixed modes or an empty set throw std::invalid_argument.
double budgeted_sr(const std::vector<EpisodeLog>& logs);

/// Strategic-kind calls (summarization, reflection, task reasoning,
/// action proposal, replanning) divided by total environment steps.
/// Throws std::invalid_argument when there are no steps.
double strategic_calls_per_step(const std::vector<EpisodeLog>& logs);

/// Mean total tokens (in + out) per episode.
double tokens_per_task(const std::vector<EpisodeLog>& logs);

struct Aggregate {
    double mean = 0.0;
    std::optional<double> std_dev;  ///< sample std (n-1); absent for a single run
};

Aggregate aggregate_runs(const std::vector<double>& values);

/// Per-metric aggregation across repeated runs, keyed by metric name.
using RunSummary = std::map<std::string, Aggregate>;

RunSummary summarize_runs(const std::map<std::string, std::vector<double>>& per_metric);

/// All evaluation quantities for one labeled set of episodes.
struct RunReport {
    std::string label;
    std::size_t episodes = 0;
    double sr = 0.0;
    double tokens = 0.0;
    double strategic_cps = 0.0;
    RecoveryStats recovery;
};

RunReport compute_run_report(const std::string& label, const std::vector<EpisodeLog>& logs);

void write_reports_csv(const std::vector<RunReport>& reports, const std::string& path);
void write_reports_json(const std::vector<RunReport>& reports, const std::string& path);

}  // namespace spur
