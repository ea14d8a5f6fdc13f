#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spur/fusion.hpp"
#include "spur/gridworld.hpp"
#include "spur/ledger.hpp"
#include "spur/samb.hpp"
#include "spur/trigger.hpp"

namespace spur {

/// Short-horizon plan issued by the Strategic Controller. The Reactive
/// Controller may deviate locally but never rewrites the subgoal.
struct Proposal {
    std::string subgoal;
    std::vector<std::string> planned_actions;  // 1..T entries
    std::string stop_condition;
    int issued_at_step = 0;
    std::string rationale;
};

enum class DecisionKind { follow, override_plan, escalate };

enum class OverrideCategory {
    facing_adjustment,
    obstacle_avoidance,
    tool_reselection,
    one_step_repositioning,
};

std::string decision_kind_name(DecisionKind kind);
std::string override_category_name(OverrideCategory category);

struct ReactiveDecision {
    DecisionKind kind = DecisionKind::escalate;
    std::optional<std::string> action;
    std::optional<OverrideCategory> override_category;
    /// Never set by well-behaved controllers; validate_override flags it.
    std::optional<std::string> proposed_subgoal;
};

/// One entry of the Global Memory ring (last 5 steps).
struct GlobalMemoryEntry {
    int step = 0;
    std::string digest;
    std::string action;
    std::string feedback_summary;
};

/// Everything the Strategic Controller sees on escalation.
struct StrategicContext {
    std::string observation_summary;
    std::string task_text;
    std::string subtask_text;
    std::vector<std::string> failure_traces;
    std::vector<GlobalMemoryEntry> window;
    std::vector<FusedCandidate> fused_evidence;
    std::vector<std::string> valid_actions;
    TriggerReason reason = TriggerReason::none;
    int step = 0;
};

struct OverrideCheck {
    bool ok = false;
    std::string violation;
};

/// ok iff the decision is an override from the four allowed categories,
/// carries an action, and leaves the proposal's subgoal alone.
/// Violations are returned, never thrown.
OverrideCheck validate_override(const ReactiveDecision& decision, const Proposal& proposal);

class StrategicController {
public:
    virtual ~StrategicController() = default;
    /// Produce a fresh Proposal, charging every stage to the ledger.
    /// Throws std::invalid_argument when ctx.valid_actions is empty.
    virtual Proposal strategic_plan(const StrategicContext& ctx, BudgetLedger& ledger) = 0;
};

class ReactiveController {
public:
    virtual ~ReactiveController() = default;
    /// Decide what to do with the next planned action (at next_index).
    /// An exhausted proposal escalates.
    virtual ReactiveDecision reactive_act(const Proposal& proposal, std::size_t next_index,
                                          const EnvStep& obs, const std::vector<Hint>& hints,
                                          BudgetLedger& ledger) = 0;
};

/// Deterministic stand-in for the LLM planner: BFS toward the target
/// with tool selection first, truncated to the active horizon. Runs the
/// collect / reflect / reason / propose phases explicitly and charges
/// each one.
class ScriptedStrategic : public StrategicController {
public:
    ScriptedStrategic(const GridWorld* env, ThresholdConfig thresholds);

    Proposal strategic_plan(const StrategicContext& ctx, BudgetLedger& ledger) override;

private:
    const GridWorld* env_;
    ThresholdConfig thresholds_;
};

/// Deterministic reactive layer: exact precondition grounding against
/// the simulator schema, bounded local overrides, escalate otherwise.
class ScriptedReactive : public ReactiveController {
public:
    explicit ScriptedReactive(const GridWorld* env);

    ReactiveDecision reactive_act(const Proposal& proposal, std::size_t next_index,
                                  const EnvStep& obs, const std::vector<Hint>& hints,
                                  BudgetLedger& ledger) override;

private:
    bool grounded(const std::string& action) const;

    const GridWorld* env_;
};

/// ceil(len/4): the deterministic character-to-token stand-in used for
/// all scripted accounting.
long long approx_tokens(std::string_view text);

/// Per-stage output token caps.
inline constexpr long long kStateDescriptionTokenCap = 1024;
inline constexpr long long kTaskInferenceTokenCap = 800;
inline constexpr long long kSelfReflectionTokenCap = 512;
inline constexpr long long kActionPlanningTokenCap = 2048;
inline constexpr long long kReactiveTokenCap = 1024;
/// Hint text consumed per reactive step is capped at the 1024-token
/// analog, enforced as characters.
inline constexpr std::size_t kReactiveHintCharCap = 4096;

/// A prompt template with <$name$> placeholders.
struct PromptTemplate {
    std::string text;
    std::set<std::string> fields;
};

PromptTemplate load_prompt_template(const std::string& path);
PromptTemplate parse_prompt_template(const std::string& text);

/// Substitute every placeholder; missing fields throw
/// std::invalid_argument, unknown extra fields are ignored.
std::string render_prompt(const PromptTemplate& tpl,
                          const std::map<std::string, std::string>& fields);

/// Seam for a real language model. The scripted controllers never call
/// it; adapters plug in behind the same controller interfaces.
class ModelAdapter {
public:
    virtual ~ModelAdapter() = default;
    struct Completion {
        std::string text;
        long long tokens_in = 0;
        long long tokens_out = 0;
    };
    virtual Completion complete(const std::string& template_id,
                                const std::map<std::string, std::string>& fields) = 0;
};

}  // namespace spur
