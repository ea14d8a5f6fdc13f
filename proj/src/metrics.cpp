#include "spur/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spur {

std::string ratio_display(const RecoveryStats& stats) {
    if (stats.no_stuck_events) return "no stuck events";
    std::ostringstream out;
    out << stats.ratio;
    return out.str();
}

RecoveryStats recovery_stats_from_counts(long long n_step, long long n_stuck,
                                         long long n_recovered) {
    if (n_step <= 0) {
        throw std::invalid_argument("recovery_stats_from_counts: no steps");
    }
    if (n_stuck > n_step || n_recovered > n_stuck || n_stuck < 0 || n_recovered < 0) {
        throw std::invalid_argument("recovery_stats_from_counts: inconsistent counts");
    }
    RecoveryStats stats;
    stats.n_step = n_step;
    stats.n_stuck = n_stuck;
    stats.n_recovered = n_recovered;
    stats.stuck_rate = static_cast<double>(n_stuck) / static_cast<double>(n_step);
    stats.recovery_rate = static_cast<double>(n_recovered) /
                          static_cast<double>(std::max<long long>(1, n_stuck));
    stats.no_stuck_events = n_stuck == 0;
    stats.ratio = stats.no_stuck_events
                      ? 0.0
                      : stats.recovery_rate / std::max(stats.stuck_rate, kRatioEpsilon);
    return stats;
}

RecoveryStats stuck_recovery(const std::vector<EpisodeLog>& logs) {
    if (logs.empty()) {
        throw std::invalid_argument("stuck_recovery: empty log set");
    }
    long long n_step = 0;
    long long n_stuck = 0;
    long long n_recovered = 0;
    for (const EpisodeLog& log : logs) {
        const auto& steps = log.steps;
        n_step += static_cast<long long>(steps.size());
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (!steps[i].stuck) continue;
            n_stuck += 1;
            std::size_t window_end = std::min(steps.size(), i + 4);
            for (std::size_t k = i + 1; k < window_end; ++k) {
                if (steps[k].level == 0 && !steps[k].stuck) {
                    n_recovered += 1;
                    break;
                }
            }
        }
    }
    return recovery_stats_from_counts(n_step, n_stuck, n_recovered);
}

double budgeted_sr(const std::vector<EpisodeLog>& logs) {
    if (logs.empty()) {
        throw std::invalid_argument("budgeted_sr: empty log set");
    }
    RunMode mode = logs.front().mode;
    long long successes = 0;
    for (const EpisodeLog& log : logs) {
        if (log.mode != mode) {
            throw std::invalid_argument("budgeted_sr: mixed run modes");
        }
        if (log.success) successes += 1;
    }
    return static_cast<double>(successes) / static_cast<double>(logs.size());
}

double strategic_calls_per_step(const std::vector<EpisodeLog>& logs) {
    static constexpr CallKind kStrategicKinds[] = {
        CallKind::summarization, CallKind::reflection, CallKind::task_reasoning,
        CallKind::action_proposal, CallKind::replanning,
    };
    long long steps = 0;
    long long calls = 0;
    for (const EpisodeLog& log : logs) {
        steps += static_cast<long long>(log.steps.size());
        for (CallKind kind : kStrategicKinds) calls += log.ledger.calls(kind);
    }
    if (steps == 0) {
        throw std::invalid_argument("strategic_calls_per_step: no steps");
    }
    return static_cast<double>(calls) / static_cast<double>(steps);
}

double tokens_per_task(const std::vector<EpisodeLog>& logs) {
    if (logs.empty()) {
        throw std::invalid_argument("tokens_per_task: empty log set");
    }
    long long tokens = 0;
    for (const EpisodeLog& log : logs) {
        tokens += log.ledger.tokens_in + log.ledger.tokens_out;
    }
    return static_cast<double>(tokens) / static_cast<double>(logs.size());
}

Aggregate aggregate_runs(const std::vector<double>& values) {
    if (values.empty()) {
        throw std::invalid_argument("aggregate_runs: no values");
    }
    Aggregate agg;
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
        agg.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return agg;
}

RunSummary summarize_runs(const std::map<std::string, std::vector<double>>& per_metric) {
    RunSummary summary;
    for (const auto& [name, values] : per_metric) {
        summary[name] = aggregate_runs(values);
    }
    return summary;
}

RunReport compute_run_report(const std::string& label,
                             const std::vector<EpisodeLog>& logs) {
    RunReport report;
    report.label = label;
    report.episodes = logs.size();
    report.sr = budgeted_sr(logs);
    report.tokens = tokens_per_task(logs);
    report.strategic_cps = strategic_calls_per_step(logs);
    report.recovery = stuck_recovery(logs);
    return report;
}

void write_reports_csv(const std::vector<RunReport>& reports, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::invalid_argument("write_reports_csv: cannot open " + path);
    }
    file << "label,episodes,sr,tokens_per_task,strategic_calls_per_step,"
            "n_step,n_stuck,n_recovered,stuck_rate,recovery_rate,recovery_ratio\n";
    for (const RunReport& r : reports) {
        file << r.label << ',' << r.episodes << ',' << r.sr << ',' << r.tokens << ','
             << r.strategic_cps << ',' << r.recovery.n_step << ',' << r.recovery.n_stuck
             << ',' << r.recovery.n_recovered << ',' << r.recovery.stuck_rate << ','
             << r.recovery.recovery_rate << ',' << ratio_display(r.recovery) << '\n';
    }
}

void write_reports_json(const std::vector<RunReport>& reports, const std::string& path) {
    nlohmann::json out = nlohmann::json::array();
    for (const RunReport& r : reports) {
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
        out.push_back(std::move(j));
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::invalid_argument("write_reports_json: cannot open " + path);
    }
    file << out.dump(2) << '\n';
}

}  // namespace spur
