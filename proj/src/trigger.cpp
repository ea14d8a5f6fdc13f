#include "spur/trigger.hpp"

#include <algorithm>
#include <stdexcept>

namespace spur {

int derive_progress_increment(const RunnerFeedback& fb) {
    if (fb.task_or_subgoal_completed || fb.position_or_facing_changed ||
        fb.selected_item_changed || fb.inventory_delta ||
        fb.menu_or_dialogue_transition || fb.productive_execution_confirmed) {
        return 1;
    }
    return 0;
}

TriggerSignals update_signals(const TriggerSignals& prev, double d,
                              const RunnerFeedback& fb, const std::string& action,
                              std::span<const std::string> recent_actions, int W) {
    TriggerSignals s = prev;
    const int inc = derive_progress_increment(fb);
    s.q = prev.q + inc;
    s.delta = inc;
    s.z = (inc > 0) ? 0 : prev.z + 1;
    s.d = d;
    s.c = prev.c + 1;

    // Same-action tail of (recent_actions ++ action), capped at W.
    int tail = 1;
    for (auto it = recent_actions.rbegin(); it != recent_actions.rend(); ++it) {
        if (*it == action) {
            ++tail;
        } else {
            break;
        }
    }
    s.r = std::min(tail, W);
    return s;
}

int classify_failure(const RunnerFeedback& fb, const TriggerSignals& signals,
                     std::span<const int> recent_failure_levels,
                     const ThresholdConfig& th) {
    bool prior_failure = false;
    bool prior_hard = false;
    for (int lvl : recent_failure_levels) {
        if (lvl >= 1) prior_failure = true;
        if (lvl >= 2) prior_hard = true;
    }

    const bool low_progress_loop = signals.z >= th.tau_z && signals.r >= 2;
    const bool hard = fb.execution_error ||
                      (fb.invalid_action && prior_failure) ||
                      low_progress_loop;
    if (hard) {
        return prior_hard ? 3 : 2;
    }
    if (fb.invalid_action) {
        // Isolated local issue: a single blocked/invalid action with a
        // clean recent window.
        return 1;
    }
    return 0;
}

ClauseOutcomes evaluate_clauses(const TriggerSignals& s, const ThresholdConfig& th) {
    ClauseOutcomes o;
    o.refresh = th.periodic_refresh_enabled() && s.c >= th.T;
    o.visual = s.d > th.tau_v;
    o.stall = s.z >= th.tau_z;
    o.repetition = s.r >= th.tau_r && s.z >= th.tau_rz;
    o.failure = s.ell >= th.tau_ell;
    return o;
}

bool should_escalate(const TriggerSignals& s, const ThresholdConfig& th) {
    return evaluate_clauses(s, th).any();
}

TriggerSignals reset_after_strategic(TriggerSignals s) {
    s.c = 0;
    return s;
}

std::string trigger_reason_name(TriggerReason reason) {
    switch (reason) {
        case TriggerReason::none: return "none";
        case TriggerReason::episode_start: return "episode_start";
        case TriggerReason::recovery_flush: return "recovery_flush";
        case TriggerReason::failure: return "failure";
        case TriggerReason::scene_change: return "scene_change";
        case TriggerReason::stall: return "stall";
        case TriggerReason::repetition: return "repetition";
        case TriggerReason::periodic: return "periodic";
        case TriggerReason::exhausted_proposal: return "exhausted_proposal";
    }
    throw std::invalid_argument("trigger_reason_name: bad enum value");
}

}  // namespace spur
