#include "spur/ledger.hpp"

#include <numeric>
#include <stdexcept>

namespace spur {

std::string difficulty_name(Difficulty d) {
    switch (d) {
        case Difficulty::easy: return "easy";
        case Difficulty::medium: return "medium";
        case Difficulty::hard: return "hard";
    }
    throw std::invalid_argument("difficulty_name: bad enum value");
}

Difficulty parse_difficulty(const std::string& name) {
    if (name == "easy") return Difficulty::easy;
    if (name == "medium") return Difficulty::medium;
    if (name == "hard") return Difficulty::hard;
    throw std::invalid_argument("parse_difficulty: unknown difficulty '" + name + "'");
}

int StepCaps::cap_for(Difficulty d) const {
    switch (d) {
        case Difficulty::easy: return easy;
        case Difficulty::medium: return medium;
        case Difficulty::hard: return hard;
    }
    throw std::invalid_argument("StepCaps::cap_for: bad enum value");
}

std::string call_kind_name(CallKind kind) {
    switch (kind) {
        case CallKind::reflection: return "reflection";
        case CallKind::task_reasoning: return "task_reasoning";
        case CallKind::action_proposal: return "action_proposal";
        case CallKind::reactive_selection: return "reactive_selection";
        case CallKind::memory_query: return "memory_query";
        case CallKind::summarization: return "summarization";
        case CallKind::retry: return "retry";
        case CallKind::replanning: return "replanning";
        case CallKind::transport_retry: return "transport_retry";
        case CallKind::format_retry: return "format_retry";
    }
    throw std::invalid_argument("call_kind_name: bad enum value");
}

long long BudgetLedger::total_calls() const {
    return std::accumulate(calls_by_kind.begin(), calls_by_kind.end(), 0LL);
}

bool BudgetLedger::account_call(CallKind kind, long long tokens_in_delta,
                                long long tokens_out_delta) {
    if (exhausted()) return false;
    calls_by_kind[static_cast<int>(kind)] += 1;
    tokens_in += tokens_in_delta;
    tokens_out += tokens_out_delta;
    return true;
}

}  // namespace spur
