#include "spur/runtime.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "spur/visual.hpp"

namespace spur {

namespace {

using nlohmann::json;

TriggerReason reason_from_clauses(const ClauseOutcomes& o) {
    if (o.failure) return TriggerReason::failure;
    if (o.visual) return TriggerReason::scene_change;
    if (o.stall) return TriggerReason::stall;
    if (o.repetition) return TriggerReason::repetition;
    if (o.refresh) return TriggerReason::periodic;
    return TriggerReason::none;
}

std::string feedback_summary(const RunnerFeedback& fb) {
    std::ostringstream out;
    if (fb.task_or_subgoal_completed) out << "completed ";
    if (fb.position_or_facing_changed) out << "moved ";
    if (fb.selected_item_changed) out << "selected ";
    if (fb.inventory_delta) out << "inventory ";
    if (fb.menu_or_dialogue_transition) out << "menu ";
    if (fb.productive_execution_confirmed) out << "productive ";
    if (fb.invalid_action) out << "invalid ";
    if (fb.execution_error) out << "error ";
    std::string text = out.str();
    if (text.empty()) return "no_change";
    text.pop_back();
    return text;
}

}  // namespace

std::string episode_status_name(EpisodeStatus status) {
    switch (status) {
        case EpisodeStatus::success: return "success";
        case EpisodeStatus::step_cap: return "step_cap";
        case EpisodeStatus::budget_exhausted: return "budget_exhausted";
        case EpisodeStatus::env_failure: return "env_failure";
    }
    throw std::invalid_argument("episode_status_name: bad enum value");
}

EpisodeStatus parse_episode_status(const std::string& name) {
    if (name == "success") return EpisodeStatus::success;
    if (name == "step_cap") return EpisodeStatus::step_cap;
    if (name == "budget_exhausted") return EpisodeStatus::budget_exhausted;
    if (name == "env_failure") return EpisodeStatus::env_failure;
    throw std::invalid_argument("parse_episode_status: unknown status '" + name + "'");
}

std::string run_mode_name(RunMode mode) {
    return mode == RunMode::step_capped ? "step_capped" : "call_budgeted";
}

RunMode parse_run_mode(const std::string& name) {
    if (name == "step_capped") return RunMode::step_capped;
    if (name == "call_budgeted") return RunMode::call_budgeted;
    throw std::invalid_argument("parse_run_mode: unknown mode '" + name + "'");
}

GateOutcome memory_write_gate(const ExecResult& exec, const ReflectionVerdict& reflection) {
    GateOutcome gate;
    gate.samb = exec.step_success;
    bool promotable = exec.subgoal_completed || exec.interpretable_recovery ||
                      exec.planner_validated;
    gate.sakg = promotable && reflection.success &&
                reflection.confidence >= kPromotionConfidence;
    return gate;
}

RecoveryDirective apply_recovery_policy(int level) {
    RecoveryDirective d;
    d.level = level;
    if (level == 1) {
        d.local_retry = true;
    } else if (level == 2) {
        d.escalate_next = true;
    } else if (level >= 3) {
        d.escalate_next = true;
        d.flush_window = true;
    }
    return d;
}

void GlobalMemory::push(GlobalMemoryEntry entry) {
    entries_.push_back(std::move(entry));
    while (entries_.size() > capacity_) entries_.pop_front();
}

void GlobalMemory::push_failure(std::string summary) {
    failures_.push_back(std::move(summary));
    while (failures_.size() > capacity_) failures_.pop_front();
}

void GlobalMemory::flush() {
    entries_.clear();
    failures_.clear();
    subgoal_.clear();
}

std::vector<GlobalMemoryEntry> GlobalMemory::window() const {
    return {entries_.begin(), entries_.end()};
}

std::vector<std::string> GlobalMemory::failures() const {
    return {failures_.begin(), failures_.end()};
}

void apply_write_op(const MemoryWriteOp& op, MemoryBank& bank, KnowledgeGraph& graph) {
    if (op.store == MemoryWriteOp::Store::samb) {
        if (!bank.contains(op.key)) {
            MemoryItem item;
            item.key = op.key;
            item.state_summary = op.state_text;
            item.action_trace = {op.action};
            item.created_at = op.at;
            item.last_write_at = op.at;
            item.source_tag = "episode";
            bank.insert(std::move(item));
        }
        bank.record_outcome(op.key, op.reward, op.success, op.at);
    } else {
        graph.upsert_transition(op.state_text, op.action, op.next_state_text, op.success,
                                op.reward, op.at);
    }
}

EpisodeLog run_episode(GridWorld& env, StrategicController& strategic,
                       ReactiveController& reactive, MemoryBank& bank,
                       KnowledgeGraph& graph, BudgetLedger& ledger,
                       const EpisodeParams& params,
                       std::vector<MemoryWriteOp>* write_ops) {
    const ThresholdConfig& th = params.thresholds;

    EpisodeLog log;
    log.scenario_name = params.scenario_name;
    log.mode = params.mode;
    log.difficulty = env.difficulty();
    log.step_cap = params.caps.cap_for(log.difficulty);
    log.budget = params.caps.budget_for(log.difficulty);
    log.seed = params.seed;
    log.config_hash = params.config_hash;

    ledger.budget = log.budget;
    ledger.difficulty = log.difficulty;
    ledger.enforce_budget = params.mode == RunMode::call_budgeted;

    GlobalMemory gmem(5);
    TriggerSignals signals;
    std::deque<std::string> recent_actions;
    std::deque<int> recent_levels;
    Proposal plan;
    std::size_t plan_cursor = 0;
    bool have_plan = false;
    TriggerReason forced_reason = TriggerReason::none;
    int last_failure_step = 0;
    std::ptrdiff_t last_retry_slot = -1;
    EnvStep obs = env.observe();
    Descriptor prev_descriptor = encode(obs.frame);
    EpisodeStatus status = EpisodeStatus::step_cap;

    // Every step charges at least the reactive selection, so the step
    // count is bounded in both modes; the 4x margin is a hard stop for
    // misbehaving controller implementations that charge nothing.
    long long hard_stop = params.mode == RunMode::call_budgeted
                              ? 4 * log.budget
                              : static_cast<long long>(log.step_cap);

    for (int t = 1;; ++t) {
        if (params.mode == RunMode::step_capped && t > log.step_cap) {
            status = EpisodeStatus::step_cap;
            break;
        }
        if (params.mode == RunMode::call_budgeted &&
            (ledger.exhausted() || t > hard_stop)) {
            status = EpisodeStatus::budget_exhausted;
            break;
        }

        StepRecord rec;
        rec.t = t;
        rec.digest = obs.ui_text;
        rec.signals = signals;
        rec.clauses = evaluate_clauses(signals, th);

        TriggerReason natural = should_escalate(signals, th)
                                    ? reason_from_clauses(rec.clauses)
                                    : TriggerReason::none;
        bool g = true;
        TriggerReason reason;
        if (t == 1) {
            reason = TriggerReason::episode_start;
        } else if (forced_reason == TriggerReason::recovery_flush) {
            reason = TriggerReason::recovery_flush;
        } else if (natural != TriggerReason::none) {
            reason = natural;
        } else if (forced_reason != TriggerReason::none) {
            reason = forced_reason;
        } else if (!have_plan || plan_cursor >= plan.planned_actions.size()) {
            reason = TriggerReason::exhausted_proposal;
        } else {
            g = false;
            reason = TriggerReason::none;
        }
        forced_reason = TriggerReason::none;
        rec.g = g;
        rec.reason = reason;
        rec.controller = g ? "strategic+reactive" : "reactive";

        long long calls_before = ledger.total_calls();
        long long tin_before = ledger.tokens_in;
        long long tout_before = ledger.tokens_out;

        std::vector<Hint> hints;
        if (g) {
            // Strategic path: fuse SA-MB and SA-KG evidence, refresh the
            // proposal, reset the refresh counter.
            std::map<std::string, double> mb_scores;
            for (const Hint& hint : bank.retrieve_hints(obs.ui_text, params.hint_k,
                                                        static_cast<Timestamp>(t))) {
                if (hint.action_trace.empty()) continue;
                const std::string& action = hint.action_trace.front();
                auto [it, inserted] = mb_scores.try_emplace(action, hint.score);
                if (!inserted) it->second = std::max(it->second, hint.score);
            }
            std::vector<GraphFragment> fragments = graph.query_fragments(obs.ui_text);
            std::map<std::string, double> boosts =
                kg_action_boosts(fragments, graph.config(), params.fusion.epsilon);
            if (!mb_scores.empty()) {
                rec.fused = fuse(mb_scores, boosts, params.fusion);
            }

            StrategicContext ctx;
            ctx.observation_summary = obs.ui_text;
            ctx.task_text = params.task_text;
            ctx.subtask_text = gmem.subgoal();
            ctx.failure_traces = gmem.failures();
            ctx.window = gmem.window();
            ctx.fused_evidence = rec.fused;
            ctx.valid_actions = env.action_schema();
            ctx.reason = reason;
            ctx.step = t;
            plan = strategic.strategic_plan(ctx, ledger);
            plan_cursor = 0;
            have_plan = true;
            last_retry_slot = -1;
            gmem.set_subgoal(plan.subgoal);
            signals = reset_after_strategic(signals);
        } else {
            hints = bank.retrieve_hints(obs.ui_text, params.hint_k,
                                        static_cast<Timestamp>(t));
        }

        ReactiveDecision decision = reactive.reactive_act(plan, plan_cursor, obs, hints,
                                                          ledger);
        std::string action;
        std::ptrdiff_t consumed_slot = -1;
        if (decision.kind == DecisionKind::override_plan &&
            !validate_override(decision, plan).ok) {
            decision.kind = DecisionKind::escalate;
            decision.action.reset();
        }
        if (decision.kind == DecisionKind::escalate) {
            // No grounded local action: hold position and hand control
            // back to the trigger on the next step.
            action = "wait";
            forced_reason = TriggerReason::exhausted_proposal;
        } else {
            action = *decision.action;
            consumed_slot = static_cast<std::ptrdiff_t>(plan_cursor);
            plan_cursor += 1;
        }
        rec.decision = decision_kind_name(decision.kind);
        if (decision.override_category) {
            rec.override_category = override_category_name(*decision.override_category);
        }

        // Shared retry path: a schema-invalid action re-invokes the
        // Reactive Controller once, charged as a retry.
        if (!env.is_valid_action(action)) {
            ledger.account_call(CallKind::retry, approx_tokens(action), 1);
            ReactiveDecision again = reactive.reactive_act(plan, plan_cursor, obs, hints,
                                                           ledger);
            if (again.kind != DecisionKind::escalate && again.action &&
                env.is_valid_action(*again.action)) {
                action = *again.action;
            } else {
                action = "wait";
                forced_reason = TriggerReason::exhausted_proposal;
            }
        }
        rec.action = action;

        EnvStep next = env.step(action);
        Descriptor next_descriptor = encode(next.frame);
        double d = visual_distance(prev_descriptor, next_descriptor);
        prev_descriptor = std::move(next_descriptor);
        rec.visual_change = d;
        rec.feedback = next.feedback;
        rec.to_digest = next.ui_text;

        const std::vector<std::string> action_window(recent_actions.begin(),
                                                     recent_actions.end());
        const std::vector<int> level_window(recent_levels.begin(),
                                            recent_levels.end());
        signals = update_signals(signals, d, next.feedback, action,
                                 action_window, th.W);
        int level = classify_failure(next.feedback, signals, level_window, th);
        signals.ell = level;
        rec.level = level;

        int progress = derive_progress_increment(next.feedback);
        bool stuck = next.feedback.invalid_action || action == "wait";
        rec.stuck = stuck;

        ReflectionVerdict reflection;
        reflection.success =
            !next.feedback.invalid_action && !next.feedback.execution_error;
        reflection.confidence = progress > 0 ? 0.9 : (reflection.success ? 0.75 : 0.3);
        rec.reflection = reflection;

        ExecResult exec;
        exec.step_success = reflection.success;
        exec.subgoal_completed = next.feedback.task_or_subgoal_completed;
        exec.interpretable_recovery = level == 0 && !stuck && last_failure_step > 0 &&
                                      t - last_failure_step <= 3;
        exec.planner_validated = decision.kind == DecisionKind::follow && progress > 0;
        GateOutcome gate = memory_write_gate(exec, reflection);
        rec.gate = gate;
        if (level >= 1) last_failure_step = t;

        auto now = static_cast<Timestamp>(t);
        double reward = progress > 0 ? 1.0
                        : (next.feedback.invalid_action || next.feedback.execution_error)
                            ? -1.0
                            : 0.0;
        if (gate.samb) {
            MemoryWriteOp op;
            op.store = MemoryWriteOp::Store::samb;
            op.key = rec.digest + "::" + action;
            op.state_text = rec.digest;
            op.action = action;
            op.reward = reward;
            op.success = progress > 0;
            op.at = now;
            apply_write_op(op, bank, graph);
            if (write_ops) write_ops->push_back(std::move(op));
        }
        if (gate.sakg) {
            MemoryWriteOp op;
            op.store = MemoryWriteOp::Store::sakg;
            op.state_text = rec.digest;
            op.action = action;
            op.next_state_text = next.ui_text;
            op.reward = reward;
            op.success = progress > 0;
            op.at = now;
            apply_write_op(op, bank, graph);
            if (write_ops) write_ops->push_back(std::move(op));
        }

        RecoveryDirective directive = apply_recovery_policy(level);
        rec.recovery = directive;

        gmem.push({t, rec.digest, action, feedback_summary(next.feedback)});
        if (level >= 2) {
            std::ostringstream trace;
            trace << "step " << t << " action " << action << " level " << level << " "
                  << feedback_summary(next.feedback);
            gmem.push_failure(trace.str());
        }
        if (directive.flush_window) {
            gmem.flush();
            have_plan = false;
            forced_reason = TriggerReason::recovery_flush;
        } else if (directive.escalate_next) {
            forced_reason = TriggerReason::failure;
        } else if (directive.local_retry && consumed_slot >= 0 &&
                   last_retry_slot != consumed_slot) {
            plan_cursor = static_cast<std::size_t>(consumed_slot);
            last_retry_slot = consumed_slot;
        }

        recent_actions.push_back(action);
        while (static_cast<int>(recent_actions.size()) > th.W) recent_actions.pop_front();
        recent_levels.push_back(level);
        while (static_cast<int>(recent_levels.size()) > th.W) recent_levels.pop_front();

        rec.calls_delta = ledger.total_calls() - calls_before;
        rec.tokens_in_delta = ledger.tokens_in - tin_before;
        rec.tokens_out_delta = ledger.tokens_out - tout_before;
        log.steps.push_back(std::move(rec));

        obs = std::move(next);
        if (env.evaluate_success()) {
            status = EpisodeStatus::success;
            break;
        }
    }

    log.status = status;
    log.success = status == EpisodeStatus::success;
    log.ledger = ledger;
    return log;
}

namespace {

json signals_to_json(const TriggerSignals& s) {
    return {{"c", s.c}, {"d", s.d},     {"z", s.z},        {"r", s.r},
            {"ell", s.ell}, {"q", s.q}, {"delta", s.delta}};
}

TriggerSignals signals_from_json(const json& j) {
    TriggerSignals s;
    s.c = j.at("c").get<int>();
    s.d = j.at("d").get<double>();
    s.z = j.at("z").get<int>();
    s.r = j.at("r").get<int>();
    s.ell = j.at("ell").get<int>();
    s.q = j.at("q").get<long long>();
    s.delta = j.at("delta").get<int>();
    return s;
}

json feedback_to_json(const RunnerFeedback& fb) {
    return {{"task_or_subgoal_completed", fb.task_or_subgoal_completed},
            {"position_or_facing_changed", fb.position_or_facing_changed},
            {"selected_item_changed", fb.selected_item_changed},
            {"inventory_delta", fb.inventory_delta},
            {"menu_or_dialogue_transition", fb.menu_or_dialogue_transition},
            {"productive_execution_confirmed", fb.productive_execution_confirmed},
            {"invalid_action", fb.invalid_action},
            {"execution_error", fb.execution_error},
            {"structured_message", fb.structured_message}};
}

RunnerFeedback feedback_from_json(const json& j) {
    RunnerFeedback fb;
    fb.task_or_subgoal_completed = j.at("task_or_subgoal_completed").get<bool>();
    fb.position_or_facing_changed = j.at("position_or_facing_changed").get<bool>();
    fb.selected_item_changed = j.at("selected_item_changed").get<bool>();
    fb.inventory_delta = j.at("inventory_delta").get<bool>();
    fb.menu_or_dialogue_transition = j.at("menu_or_dialogue_transition").get<bool>();
    fb.productive_execution_confirmed = j.at("productive_execution_confirmed").get<bool>();
    fb.invalid_action = j.at("invalid_action").get<bool>();
    fb.execution_error = j.at("execution_error").get<bool>();
    fb.structured_message = j.at("structured_message").get<std::string>();
    return fb;
}

}  // namespace

void write_episode_jsonl(const EpisodeLog& log, std::ostream& out) {
    json header;
    header["type"] = "header";
    header["scenario"] = log.scenario_name;
    header["mode"] = run_mode_name(log.mode);
    header["difficulty"] = difficulty_name(log.difficulty);
    header["step_cap"] = log.step_cap;
    header["budget"] = log.budget;
    header["seed"] = log.seed;
    header["config_hash"] = log.config_hash;
    out << header.dump() << '\n';

    for (const StepRecord& rec : log.steps) {
        json j;
        j["type"] = "step";
        j["t"] = rec.t;
        j["digest"] = rec.digest;
        j["signals"] = signals_to_json(rec.signals);
        j["clauses"] = {{"refresh", rec.clauses.refresh},
                        {"visual", rec.clauses.visual},
                        {"stall", rec.clauses.stall},
                        {"repetition", rec.clauses.repetition},
                        {"failure", rec.clauses.failure}};
        j["g"] = rec.g;
        j["reason"] = trigger_reason_name(rec.reason);
        j["controller"] = rec.controller;
        j["decision"] = rec.decision;
        j["action"] = rec.action;
        if (rec.override_category) j["override_category"] = *rec.override_category;
        j["feedback"] = feedback_to_json(rec.feedback);
        j["visual_change"] = rec.visual_change;
        j["level"] = rec.level;
        j["gate"] = {{"samb", rec.gate.samb}, {"sakg", rec.gate.sakg}};
        j["recovery"] = {{"level", rec.recovery.level},
                         {"local_retry", rec.recovery.local_retry},
                         {"escalate_next", rec.recovery.escalate_next},
                         {"flush_window", rec.recovery.flush_window}};
        j["reflection"] = {{"success", rec.reflection.success},
                           {"confidence", rec.reflection.confidence}};
        j["calls"] = rec.calls_delta;
        j["tokens_in"] = rec.tokens_in_delta;
        j["tokens_out"] = rec.tokens_out_delta;
        j["to_digest"] = rec.to_digest;
        j["stuck"] = rec.stuck;
        if (!rec.fused.empty()) {
            json fused = json::array();
            for (const FusedCandidate& c : rec.fused) {
                fused.push_back({{"action", c.action},
                                 {"fused", c.fused},
                                 {"mb_raw", c.mb_raw},
                                 {"mb_norm", c.mb_norm},
                                 {"kg_norm", c.kg_norm}});
            }
            j["fused"] = fused;
        }
        out << j.dump() << '\n';
    }

    json end;
    end["type"] = "end";
    end["status"] = episode_status_name(log.status);
    end["success"] = log.success;
    end["steps"] = log.steps.size();
    end["calls_total"] = log.ledger.total_calls();
    end["tokens_in"] = log.ledger.tokens_in;
    end["tokens_out"] = log.ledger.tokens_out;
    json by_kind;
    for (int k = 0; k < kCallKindCount; ++k) {
        by_kind[call_kind_name(static_cast<CallKind>(k))] = log.ledger.calls_by_kind[k];
    }
    end["calls_by_kind"] = by_kind;
    out << end.dump() << '\n';
}

void save_episode_jsonl(const EpisodeLog& log, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::invalid_argument("save_episode_jsonl: cannot open " + path);
    }
    write_episode_jsonl(log, file);
}

EpisodeLog load_episode_jsonl(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::invalid_argument("load_episode_jsonl: cannot open " + path);
    }
    EpisodeLog log;
    bool saw_header = false;
    bool saw_end = false;
    std::string line;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            std::ostringstream msg;
            msg << "load_episode_jsonl: bad JSON at " << path << ":" << line_no;
            throw std::invalid_argument(msg.str());
        }
        std::string type = j.at("type").get<std::string>();
        if (type == "header") {
            saw_header = true;
            log.scenario_name = j.at("scenario").get<std::string>();
            log.mode = parse_run_mode(j.at("mode").get<std::string>());
            log.difficulty = parse_difficulty(j.at("difficulty").get<std::string>());
            log.step_cap = j.at("step_cap").get<int>();
            log.budget = j.at("budget").get<long long>();
            log.seed = j.at("seed").get<unsigned>();
            log.config_hash = j.at("config_hash").get<std::uint64_t>();
            log.ledger.budget = log.budget;
            log.ledger.difficulty = log.difficulty;
        } else if (type == "step") {
            StepRecord rec;
            rec.t = j.at("t").get<int>();
            rec.digest = j.at("digest").get<std::string>();
            rec.signals = signals_from_json(j.at("signals"));
            const json& clauses = j.at("clauses");
            rec.clauses.refresh = clauses.at("refresh").get<bool>();
            rec.clauses.visual = clauses.at("visual").get<bool>();
            rec.clauses.stall = clauses.at("stall").get<bool>();
            rec.clauses.repetition = clauses.at("repetition").get<bool>();
            rec.clauses.failure = clauses.at("failure").get<bool>();
            rec.g = j.at("g").get<bool>();
            // reason strings map back through the name table
            {
                std::string name = j.at("reason").get<std::string>();
                bool found = false;
                for (int r = 0; r <= static_cast<int>(TriggerReason::exhausted_proposal);
                     ++r) {
                    auto reason = static_cast<TriggerReason>(r);
                    if (trigger_reason_name(reason) == name) {
                        rec.reason = reason;
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    throw std::invalid_argument("load_episode_jsonl: bad reason " + name);
                }
            }
            rec.controller = j.at("controller").get<std::string>();
            rec.decision = j.at("decision").get<std::string>();
            rec.action = j.at("action").get<std::string>();
            if (j.contains("override_category")) {
                rec.override_category = j.at("override_category").get<std::string>();
            }
            rec.feedback = feedback_from_json(j.at("feedback"));
            rec.visual_change = j.at("visual_change").get<double>();
            rec.level = j.at("level").get<int>();
            rec.gate.samb = j.at("gate").at("samb").get<bool>();
            rec.gate.sakg = j.at("gate").at("sakg").get<bool>();
            const json& recovery = j.at("recovery");
            rec.recovery.level = recovery.at("level").get<int>();
            rec.recovery.local_retry = recovery.at("local_retry").get<bool>();
            rec.recovery.escalate_next = recovery.at("escalate_next").get<bool>();
            rec.recovery.flush_window = recovery.at("flush_window").get<bool>();
            rec.reflection.success = j.at("reflection").at("success").get<bool>();
            rec.reflection.confidence = j.at("reflection").at("confidence").get<double>();
            rec.calls_delta = j.at("calls").get<long long>();
            rec.tokens_in_delta = j.at("tokens_in").get<long long>();
            rec.tokens_out_delta = j.at("tokens_out").get<long long>();
            rec.to_digest = j.at("to_digest").get<std::string>();
            rec.stuck = j.at("stuck").get<bool>();
            if (j.contains("fused")) {
                for (const json& f : j.at("fused")) {
                    FusedCandidate c;
                    c.action = f.at("action").get<std::string>();
                    c.fused = f.at("fused").get<double>();
                    c.mb_raw = f.at("mb_raw").get<double>();
                    c.mb_norm = f.at("mb_norm").get<double>();
                    c.kg_norm = f.at("kg_norm").get<double>();
                    rec.fused.push_back(std::move(c));
                }
            }
            log.steps.push_back(std::move(rec));
        } else if (type == "end") {
            saw_end = true;
            log.status = parse_episode_status(j.at("status").get<std::string>());
            log.success = j.at("success").get<bool>();
            log.ledger.tokens_in = j.at("tokens_in").get<long long>();
            log.ledger.tokens_out = j.at("tokens_out").get<long long>();
            const json& by_kind = j.at("calls_by_kind");
            for (int k = 0; k < kCallKindCount; ++k) {
                log.ledger.calls_by_kind[k] =
                    by_kind.at(call_kind_name(static_cast<CallKind>(k))).get<long long>();
            }
        } else {
            throw std::invalid_argument("load_episode_jsonl: unknown record type " + type);
        }
    }
    if (!saw_header || !saw_end) {
        throw std::invalid_argument("load_episode_jsonl: truncated log " + path);
    }
    return log;
}

}  // namespace spur
