#pragma once

#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spur/controllers.hpp"
#include "spur/fusion.hpp"
#include "spur/gridworld.hpp"
#include "spur/ledger.hpp"
#include "spur/sakg.hpp"
#include "spur/samb.hpp"
#include "spur/trigger.hpp"

namespace spur {

enum class EpisodeStatus { success, step_cap, budget_exhausted, env_failure };
enum class RunMode { step_capped, call_budgeted };

std::string episode_status_name(EpisodeStatus status);
EpisodeStatus parse_episode_status(const std::string& name);
std::string run_mode_name(RunMode mode);
RunMode parse_run_mode(const std::string& name);

/// Inputs to the promotion gate, derived from the executed step.
struct ExecResult {
    bool step_success = false;  ///< no invalid action, no execution error
    bool subgoal_completed = false;
    bool interpretable_recovery = false;
    bool planner_validated = false;
};

/// Deterministic stand-in for the reflection verdict on a step.
struct ReflectionVerdict {
    bool success = false;
    double confidence = 0.0;
};

struct GateOutcome {
    bool samb = false;
    bool sakg = false;
};

/// SA-MB writes on successful execution; SA-KG promotion additionally
/// needs completion, interpretable recovery, or planner validation, and
/// a successful reflection with confidence >= 0.7.
GateOutcome memory_write_gate(const ExecResult& exec, const ReflectionVerdict& reflection);

inline constexpr double kPromotionConfidence = 0.7;

/// What a graded failure level demands from the loop.
struct RecoveryDirective {
    int level = 0;
    bool local_retry = false;    ///< F1: retry the failed slot once
    bool escalate_next = false;  ///< F2/F3: force g=1 with the trace attached
    bool flush_window = false;   ///< F3: clear Global Memory first
};

RecoveryDirective apply_recovery_policy(int level);

/// Fixed-capacity ring of recent steps plus the active subgoal and
/// failure summaries used as negative evidence on escalation.
class GlobalMemory {
public:
    explicit GlobalMemory(std::size_t capacity = 5) : capacity_(capacity) {}

    void push(GlobalMemoryEntry entry);
    void push_failure(std::string summary);
    void set_subgoal(std::string subgoal) { subgoal_ = std::move(subgoal); }
    void flush();

    std::vector<GlobalMemoryEntry> window() const;
    std::vector<std::string> failures() const;
    const std::string& subgoal() const { return subgoal_; }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::deque<GlobalMemoryEntry> entries_;
    std::deque<std::string> failures_;
    std::string subgoal_;
};

/// One gated store mutation, recorded so episode deltas can be replayed
/// into a shared store in a deterministic order.
struct MemoryWriteOp {
    enum class Store { samb, sakg };
    Store store = Store::samb;
    std::string key;         // samb
    std::string state_text;  // samb summary / sakg from-state
    std::string action;
    std::string next_state_text;  // sakg
    double reward = 0.0;
    bool success = false;
    Timestamp at = 0.0;
};

void apply_write_op(const MemoryWriteOp& op, MemoryBank& bank, KnowledgeGraph& graph);

struct StepRecord {
    int t = 0;
    std::string digest;  ///< pre-action observation text
    TriggerSignals signals;  ///< pre-decision, before any strategic reset
    ClauseOutcomes clauses;
    bool g = false;
    TriggerReason reason = TriggerReason::none;
    std::string controller;  ///< "strategic+reactive" or "reactive"
    std::string decision;
    std::string action;
    std::optional<std::string> override_category;
    RunnerFeedback feedback;
    double visual_change = 0.0;
    int level = 0;
    GateOutcome gate;
    RecoveryDirective recovery;
    ReflectionVerdict reflection;
    long long calls_delta = 0;
    long long tokens_in_delta = 0;
    long long tokens_out_delta = 0;
    std::string to_digest;
    bool stuck = false;
    std::vector<FusedCandidate> fused;  ///< strategic steps only
};

struct EpisodeLog {
    std::string scenario_name;
    RunMode mode = RunMode::step_capped;
    Difficulty difficulty = Difficulty::easy;
    int step_cap = 0;
    long long budget = 0;
    unsigned seed = 42;
    std::uint64_t config_hash = 0;
    std::vector<StepRecord> steps;
    EpisodeStatus status = EpisodeStatus::step_cap;
    bool success = false;
    BudgetLedger ledger;
};

struct EpisodeParams {
    ThresholdConfig thresholds;
    RunMode mode = RunMode::step_capped;
    StepCaps caps;
    FusionConfig fusion;
    unsigned seed = 42;
    std::uint64_t config_hash = 0;
    std::string scenario_name;
    std::string task_text = "navigate to the target and finish the task";
    int hint_k = 5;
};

/// The trigger-act-update cycle. Mutates the passed stores; when
/// write_ops is given, every gated write is also recorded there.
EpisodeLog run_episode(GridWorld& env, StrategicController& strategic,
                       ReactiveController& reactive, MemoryBank& bank,
                       KnowledgeGraph& graph, BudgetLedger& ledger,
                       const EpisodeParams& params,
                       std::vector<MemoryWriteOp>* write_ops = nullptr);

/// JSONL round trip: one header record, one record per step, one end
/// record. Keys are emitted sorted and no wall-clock data is written,
/// so identical runs produce identical bytes.
void write_episode_jsonl(const EpisodeLog& log, std::ostream& out);
void save_episode_jsonl(const EpisodeLog& log, const std::string& path);
EpisodeLog load_episode_jsonl(const std::string& path);

}  // namespace spur
