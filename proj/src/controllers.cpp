#include "spur/controllers.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spur {

namespace {

constexpr std::string_view kSelectPrefix = "select_tool ";

bool is_move(const std::string& action) {
    return action == "move_up" || action == "move_down" || action == "move_left" ||
           action == "move_right";
}

std::pair<int, int> move_delta(const std::string& action) {
    if (action == "move_up") return {0, -1};
    if (action == "move_down") return {0, 1};
    if (action == "move_left") return {-1, 0};
    return {1, 0};
}

std::string opposite_move(const std::string& action) {
    if (action == "move_up") return "move_down";
    if (action == "move_down") return "move_up";
    if (action == "move_left") return "move_right";
    return "move_left";
}

std::vector<std::string> lateral_moves(const std::string& action) {
    if (action == "move_left" || action == "move_right") return {"move_up", "move_down"};
    return {"move_left", "move_right"};
}

bool move_free(const GridWorld& env, int from_x, int from_y, const std::string& action) {
    auto [dx, dy] = move_delta(action);
    int nx = from_x + dx;
    int ny = from_y + dy;
    return env.in_bounds(nx, ny) && !env.is_wall(nx, ny);
}

/// Shortest action path from the agent to the target, empty when the
/// agent already stands there, nullopt when no path exists.
std::optional<std::vector<std::string>> bfs_path(const GridWorld& env) {
    const int w = env.width();
    const int h = env.height();
    const int start = env.agent_y() * w + env.agent_x();
    const int goal = env.target_y() * w + env.target_x();
    if (start == goal) return std::vector<std::string>{};

    static const std::pair<std::string, std::pair<int, int>> kMoves[] = {
        {"move_up", {0, -1}},
        {"move_down", {0, 1}},
        {"move_left", {-1, 0}},
        {"move_right", {1, 0}},
    };

    std::vector<int> parent(static_cast<std::size_t>(w * h), -1);
    std::vector<std::string> via(static_cast<std::size_t>(w * h));
    std::deque<int> queue{start};
    parent[static_cast<std::size_t>(start)] = start;
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        if (cur == goal) break;
        int cx = cur % w;
        int cy = cur / w;
        for (const auto& [action, delta] : kMoves) {
            int nx = cx + delta.first;
            int ny = cy + delta.second;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            if (env.is_wall(nx, ny)) continue;
            int next = ny * w + nx;
            if (parent[static_cast<std::size_t>(next)] != -1) continue;
            parent[static_cast<std::size_t>(next)] = cur;
            via[static_cast<std::size_t>(next)] = action;
            queue.push_back(next);
        }
    }
    if (parent[static_cast<std::size_t>(goal)] == -1) return std::nullopt;

    std::vector<std::string> path;
    for (int cur = goal; cur != start; cur = parent[static_cast<std::size_t>(cur)]) {
        path.push_back(via[static_cast<std::size_t>(cur)]);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

long long charge(BudgetLedger& ledger, CallKind kind, const std::string& input,
                 const std::string& output, long long output_cap) {
    long long out_tokens = std::min(output_cap, approx_tokens(output));
    ledger.account_call(kind, approx_tokens(input), out_tokens);
    return out_tokens;
}

}  // namespace

std::string decision_kind_name(DecisionKind kind) {
    switch (kind) {
        case DecisionKind::follow: return "follow";
        case DecisionKind::override_plan: return "override";
        case DecisionKind::escalate: return "escalate";
    }
    throw std::invalid_argument("decision_kind_name: bad enum value");
}

std::string override_category_name(OverrideCategory category) {
    switch (category) {
        case OverrideCategory::facing_adjustment: return "facing_adjustment";
        case OverrideCategory::obstacle_avoidance: return "obstacle_avoidance";
        case OverrideCategory::tool_reselection: return "tool_reselection";
        case OverrideCategory::one_step_repositioning: return "one_step_repositioning";
    }
    throw std::invalid_argument("override_category_name: bad enum value");
}

OverrideCheck validate_override(const ReactiveDecision& decision, const Proposal& proposal) {
    OverrideCheck check;
    if (decision.kind != DecisionKind::override_plan) {
        check.violation = "decision is not an override";
        return check;
    }
    if (!decision.override_category.has_value()) {
        check.violation = "override without a category";
        return check;
    }
    switch (*decision.override_category) {
        case OverrideCategory::facing_adjustment:
        case OverrideCategory::obstacle_avoidance:
        case OverrideCategory::tool_reselection:
        case OverrideCategory::one_step_repositioning:
            break;
        default:
            check.violation = "category outside the allowed set";
            return check;
    }
    if (!decision.action.has_value()) {
        check.violation = "override without an action";
        return check;
    }
    if (decision.proposed_subgoal.has_value() &&
        *decision.proposed_subgoal != proposal.subgoal) {
        check.violation = "override attempts to change the subgoal";
        return check;
    }
    check.ok = true;
    return check;
}

ScriptedStrategic::ScriptedStrategic(const GridWorld* env, ThresholdConfig thresholds)
    : env_(env), thresholds_(thresholds) {
    if (!env_) {
        throw std::invalid_argument("ScriptedStrategic: null environment");
    }
}

Proposal ScriptedStrategic::strategic_plan(const StrategicContext& ctx,
                                           BudgetLedger& ledger) {
    if (ctx.valid_actions.empty()) {
        throw std::invalid_argument("strategic_plan: empty valid action set");
    }

    // Information collection: fold the observation and the Global
    // Memory window into one digest.
    std::ostringstream collect_in;
    collect_in << ctx.task_text << '\n' << ctx.observation_summary << '\n';
    for (const auto& entry : ctx.window) {
        collect_in << entry.step << ' ' << entry.digest << ' ' << entry.action << ' '
                   << entry.feedback_summary << '\n';
    }
    charge(ledger, CallKind::summarization, collect_in.str(), ctx.observation_summary,
           kStateDescriptionTokenCap);

    // Self reflection only on failure- or repetition-driven escalation.
    if (ctx.reason == TriggerReason::failure || ctx.reason == TriggerReason::repetition) {
        std::ostringstream reflect_in;
        for (const auto& trace : ctx.failure_traces) reflect_in << trace << '\n';
        std::ostringstream verdict;
        verdict << "reviewed " << ctx.failure_traces.size() << " failure traces for "
                << trigger_reason_name(ctx.reason);
        charge(ledger, CallKind::reflection, reflect_in.str(), verdict.str(),
               kSelfReflectionTokenCap);
    }

    // Task reasoning: fix the subgoal.
    bool needs_tool = !env_->required_tool().empty() &&
                      env_->selected_tool() != env_->required_tool();
    std::ostringstream subgoal;
    subgoal << "reach target " << env_->target_x() << " " << env_->target_y();
    if (!env_->required_tool().empty()) subgoal << " with " << env_->required_tool();
    std::ostringstream reason_in;
    reason_in << ctx.observation_summary << '\n';
    for (const auto& cand : ctx.fused_evidence) {
        reason_in << cand.action << ' ' << cand.fused << '\n';
    }
    charge(ledger, CallKind::task_reasoning, reason_in.str(), subgoal.str(),
           kTaskInferenceTokenCap);

    // Action proposal: tool first, then the shortest path, cut to the
    // refresh horizon.
    int horizon = thresholds_.periodic_refresh_enabled() ? thresholds_.T : 16;
    horizon = std::max(1, horizon);
    std::vector<std::string> plan;
    if (needs_tool) {
        plan.push_back(std::string(kSelectPrefix) + env_->required_tool());
    }
    std::string rationale;
    if (auto path = bfs_path(*env_)) {
        rationale = "shortest path of " + std::to_string(path->size()) + " moves";
        for (const auto& action : *path) {
            if (static_cast<int>(plan.size()) >= horizon) break;
            plan.push_back(action);
        }
    } else {
        rationale = "no path to target";
    }
    if (static_cast<int>(plan.size()) > horizon) plan.resize(static_cast<std::size_t>(horizon));
    if (plan.empty()) plan.push_back("wait");

    std::ostringstream plan_text;
    for (const auto& action : plan) plan_text << action << '\n';
    charge(ledger, CallKind::action_proposal, subgoal.str(), plan_text.str(),
           kActionPlanningTokenCap);

    Proposal proposal;
    proposal.subgoal = subgoal.str();
    proposal.planned_actions = std::move(plan);
    proposal.stop_condition = "agent on target with required tool selected";
    proposal.issued_at_step = ctx.step;
    proposal.rationale = rationale;
    return proposal;
}

ScriptedReactive::ScriptedReactive(const GridWorld* env) : env_(env) {
    if (!env_) {
        throw std::invalid_argument("ScriptedReactive: null environment");
    }
}

bool ScriptedReactive::grounded(const std::string& action) const {
    if (is_move(action)) {
        return move_free(*env_, env_->agent_x(), env_->agent_y(), action);
    }
    if (action.rfind(kSelectPrefix, 0) == 0) {
        std::string tool = action.substr(kSelectPrefix.size());
        const auto& tools = env_->tools();
        return std::find(tools.begin(), tools.end(), tool) != tools.end();
    }
    if (action == "use") {
        return env_->evaluate_success();
    }
    return action == "wait";
}

ReactiveDecision ScriptedReactive::reactive_act(const Proposal& proposal,
                                                std::size_t next_index, const EnvStep& obs,
                                                const std::vector<Hint>& hints,
                                                BudgetLedger& ledger) {
    std::string hint_text;
    for (const Hint& hint : hints) {
        if (hint_text.size() >= kReactiveHintCharCap) break;
        std::size_t room = kReactiveHintCharCap - hint_text.size();
        hint_text.append(hint.state_summary.substr(0, room));
        hint_text.push_back('\n');
    }

    ReactiveDecision decision;
    if (next_index >= proposal.planned_actions.size()) {
        decision.kind = DecisionKind::escalate;
    } else {
        const std::string& planned = proposal.planned_actions[next_index];
        if (grounded(planned)) {
            decision.kind = DecisionKind::follow;
            decision.action = planned;
        } else if (is_move(planned)) {
            decision.kind = DecisionKind::escalate;
            for (const auto& lateral : lateral_moves(planned)) {
                if (move_free(*env_, env_->agent_x(), env_->agent_y(), lateral)) {
                    decision.kind = DecisionKind::override_plan;
                    decision.action = lateral;
                    decision.override_category = OverrideCategory::obstacle_avoidance;
                    break;
                }
            }
            if (decision.kind == DecisionKind::escalate) {
                std::string back = opposite_move(planned);
                if (move_free(*env_, env_->agent_x(), env_->agent_y(), back)) {
                    decision.kind = DecisionKind::override_plan;
                    decision.action = back;
                    decision.override_category = OverrideCategory::one_step_repositioning;
                }
            }
        } else if (planned.rfind(kSelectPrefix, 0) == 0) {
            const auto& tools = env_->tools();
            const std::string& required = env_->required_tool();
            if (!required.empty() && env_->selected_tool() != required &&
                std::find(tools.begin(), tools.end(), required) != tools.end()) {
                decision.kind = DecisionKind::override_plan;
                decision.action = std::string(kSelectPrefix) + required;
                decision.override_category = OverrideCategory::tool_reselection;
            } else {
                decision.kind = DecisionKind::escalate;
            }
        } else {
            decision.kind = DecisionKind::escalate;
        }
    }

    std::string out_text = decision.action.value_or("escalate");
    charge(ledger, CallKind::reactive_selection, obs.ui_text + hint_text, out_text,
           kReactiveTokenCap);
    return decision;
}

long long approx_tokens(std::string_view text) {
    return static_cast<long long>((text.size() + 3) / 4);
}

PromptTemplate parse_prompt_template(const std::string& text) {
    PromptTemplate tpl;
    tpl.text = text;
    std::size_t pos = 0;
    while (true) {
        std::size_t open = text.find("<$", pos);
        if (open == std::string::npos) break;
        std::size_t close = text.find("$>", open + 2);
        if (close == std::string::npos) {
            throw std::invalid_argument("parse_prompt_template: unterminated placeholder");
        }
        std::string name = text.substr(open + 2, close - open - 2);
        if (name.empty()) {
            throw std::invalid_argument("parse_prompt_template: empty placeholder name");
        }
        tpl.fields.insert(name);
        pos = close + 2;
    }
    return tpl;
}

PromptTemplate load_prompt_template(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::invalid_argument("load_prompt_template: cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_prompt_template(buffer.str());
}

std::string render_prompt(const PromptTemplate& tpl,
                          const std::map<std::string, std::string>& fields) {
    for (const auto& field : tpl.fields) {
        if (fields.find(field) == fields.end()) {
            throw std::invalid_argument("render_prompt: missing field '" + field + "'");
        }
    }
    std::string out = tpl.text;
    for (const auto& [name, value] : fields) {
        std::string placeholder = "<$" + name + "$>";
        std::size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return out;
}

}  // namespace spur
