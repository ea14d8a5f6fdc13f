#pragma once

#include <array>
#include <string>

namespace spur {

enum class Difficulty { easy, medium, hard };

std::string difficulty_name(Difficulty d);
Difficulty parse_difficulty(const std::string& name);

struct StepCaps {
    int easy = 30;
    int medium = 50;
    int hard = 150;

    int cap_for(Difficulty d) const;
    /// Call budget is 4x the step cap at every difficulty.
    long long budget_for(Difficulty d) const { return 4LL * cap_for(d); }
};

/// Everything that counts as a large-model completion request. Visual
/// encoding, deterministic lookups, trigger rules, and env stepping are
/// never charged.
enum class CallKind {
    reflection,
    task_reasoning,
    action_proposal,
    reactive_selection,
    memory_query,
    summarization,
    retry,
    replanning,
    transport_retry,
    format_retry,
};

inline constexpr int kCallKindCount = 10;

std::string call_kind_name(CallKind kind);

/// Counts completion requests and tokens against the episode budget.
struct BudgetLedger {
    std::array<long long, kCallKindCount> calls_by_kind{};
    long long tokens_in = 0;
    long long tokens_out = 0;
    long long budget = 0;
    Difficulty difficulty = Difficulty::easy;
    bool enforce_budget = false;  ///< set by the loop in call_budgeted mode

    long long total_calls() const;
    long long calls(CallKind kind) const {
        return calls_by_kind[static_cast<int>(kind)];
    }
    bool exhausted() const { return enforce_budget && total_calls() >= budget; }

    /// Charge one call. Returns false without recording anything when
    /// the budget is already exhausted; a call that merely crosses the
    /// boundary still completes and is counted.
    bool account_call(CallKind kind, long long tokens_in_delta, long long tokens_out_delta);
};

}  // namespace spur
