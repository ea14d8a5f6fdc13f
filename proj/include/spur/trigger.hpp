#pragma once

#include <span>
#include <string>
#include <vector>

namespace spur {

/// Execution feedback exposed by the environment runner after each step.
/// The first six flags are the only evidence that advances the progress
/// counter; invalid actions and execution errors feed the stall and
/// failure signals instead.
struct RunnerFeedback {
    bool task_or_subgoal_completed = false;
    bool position_or_facing_changed = false;
    bool selected_item_changed = false;
    bool inventory_delta = false;
    bool menu_or_dialogue_transition = false;
    bool productive_execution_confirmed = false;
    bool invalid_action = false;
    bool execution_error = false;
    std::string structured_message;
};

/// Per-step bookkeeping consumed by the escalation predicate.
struct TriggerSignals {
    int c = 0;        ///< reactive steps since the last strategic call
    double d = 0.0;   ///< visual-change distance in [0, 2]
    int z = 0;        ///< zero-progress streak
    int r = 0;        ///< same-action tail length within the window
    int ell = 0;      ///< failure level in {0, 1, 2, 3}
    long long q = 0;  ///< cumulative progress counter
    int delta = 0;    ///< q_t - q_{t-1}
};

/// Fixed escalation thresholds. `T == kUnboundedRefresh` disables the
/// periodic-refresh clause; the event-driven clauses still fire.
struct ThresholdConfig {
    static constexpr int kUnboundedRefresh = 0;

    int T = 4;
    int W = 5;
    double tau_v = 0.35;
    int tau_z = 4;
    int tau_r = 5;
    int tau_rz = 2;
    int tau_ell = 2;

    bool periodic_refresh_enabled() const { return T > 0; }
};

/// Outcome of each disjunct of the escalation predicate, logged per step.
struct ClauseOutcomes {
    bool refresh = false;     ///< c >= T
    bool visual = false;      ///< d > tau_v
    bool stall = false;       ///< z >= tau_z
    bool repetition = false;  ///< r >= tau_r and z >= tau_rz
    bool failure = false;     ///< ell >= tau_ell

    bool any() const { return refresh || visual || stall || repetition || failure; }
};

/// 1 if any of the six progress feedback flags is set, else 0.
int derive_progress_increment(const RunnerFeedback& fb);

/// Advance the signals after executing `action` with feedback `fb`.
/// `recent_actions` is the pre-step window, oldest first, length <= W.
/// `d` is the visual change produced by this step.
TriggerSignals update_signals(const TriggerSignals& prev, double d,
                              const RunnerFeedback& fb, const std::string& action,
                              std::span<const std::string> recent_actions, int W);

/// Grade the step's failure level from feedback, current signals, and the
/// last-W failure levels (oldest first).
int classify_failure(const RunnerFeedback& fb, const TriggerSignals& signals,
                     std::span<const int> recent_failure_levels,
                     const ThresholdConfig& th);

ClauseOutcomes evaluate_clauses(const TriggerSignals& s, const ThresholdConfig& th);

/// The escalation predicate: disjunction of the five clauses.
bool should_escalate(const TriggerSignals& s, const ThresholdConfig& th);

/// c resets to 0 after a strategic call completes; everything else is
/// untouched.
TriggerSignals reset_after_strategic(TriggerSignals s);

/// Why a strategic invocation happened, recorded in the log and used to
/// gate the reflection phase. Listed in priority order: when several
/// causes coincide, the first applicable one is reported.
enum class TriggerReason {
    none,
    episode_start,
    recovery_flush,
    failure,
    scene_change,
    stall,
    repetition,
    periodic,
    exhausted_proposal,
};

std::string trigger_reason_name(TriggerReason reason);

}  // namespace spur
