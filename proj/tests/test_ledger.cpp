#include <doctest.h>

#include <stdexcept>

#include "spur/ledger.hpp"

using namespace spur;

TEST_CASE("difficulty names round trip") {
    for (Difficulty d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) {
        CHECK_EQ(parse_difficulty(difficulty_name(d)), d);
    }
    CHECK_EQ(difficulty_name(Difficulty::easy), "easy");
    CHECK_THROWS_AS(parse_difficulty("extreme"), std::invalid_argument);
    CHECK_THROWS_AS(parse_difficulty(""), std::invalid_argument);
}

TEST_CASE("step caps and call budgets per difficulty") {
    StepCaps caps;
    CHECK_EQ(caps.cap_for(Difficulty::easy), 30);
    CHECK_EQ(caps.cap_for(Difficulty::medium), 50);
    CHECK_EQ(caps.cap_for(Difficulty::hard), 150);
    CHECK_EQ(caps.budget_for(Difficulty::easy), 120);
    CHECK_EQ(caps.budget_for(Difficulty::medium), 200);
    CHECK_EQ(caps.budget_for(Difficulty::hard), 600);
}

TEST_CASE("call kind names are distinct and stable") {
    CHECK_EQ(call_kind_name(CallKind::reflection), "reflection");
    CHECK_EQ(call_kind_name(CallKind::task_reasoning), "task_reasoning");
    CHECK_EQ(call_kind_name(CallKind::action_proposal), "action_proposal");
    CHECK_EQ(call_kind_name(CallKind::reactive_selection), "reactive_selection");
    CHECK_EQ(call_kind_name(CallKind::memory_query), "memory_query");
    CHECK_EQ(call_kind_name(CallKind::summarization), "summarization");
    CHECK_EQ(call_kind_name(CallKind::retry), "retry");
    CHECK_EQ(call_kind_name(CallKind::replanning), "replanning");
    CHECK_EQ(call_kind_name(CallKind::transport_retry), "transport_retry");
    CHECK_EQ(call_kind_name(CallKind::format_retry), "format_retry");
}

TEST_CASE("fresh ledger is empty and unenforced") {
    BudgetLedger ledger;
    CHECK_EQ(ledger.total_calls(), 0);
    CHECK_EQ(ledger.tokens_in, 0);
    CHECK_EQ(ledger.tokens_out, 0);
    CHECK_FALSE(ledger.exhausted());  // budget 0 but enforcement is off
}

TEST_CASE("account_call records per-kind counts and token totals") {
    BudgetLedger ledger;
    CHECK(ledger.account_call(CallKind::summarization, 100, 40));
    CHECK(ledger.account_call(CallKind::summarization, 50, 10));
    CHECK(ledger.account_call(CallKind::action_proposal, 200, 80));
    CHECK_EQ(ledger.calls(CallKind::summarization), 2);
    CHECK_EQ(ledger.calls(CallKind::action_proposal), 1);
    CHECK_EQ(ledger.calls(CallKind::reflection), 0);
    CHECK_EQ(ledger.total_calls(), 3);
    CHECK_EQ(ledger.tokens_in, 350);
    CHECK_EQ(ledger.tokens_out, 130);
}

TEST_CASE("budget refusal happens only after the boundary is crossed") {
    BudgetLedger ledger;
    ledger.budget = 2;
    ledger.enforce_budget = true;
    CHECK(ledger.account_call(CallKind::retry, 10, 1));
    CHECK_FALSE(ledger.exhausted());
    // This call crosses the boundary; it still completes and is counted.
    CHECK(ledger.account_call(CallKind::retry, 10, 1));
    CHECK(ledger.exhausted());
    // Now the ledger refuses and records nothing.
    CHECK_FALSE(ledger.account_call(CallKind::retry, 10, 1));
    CHECK_EQ(ledger.total_calls(), 2);
    CHECK_EQ(ledger.tokens_in, 20);
    CHECK_EQ(ledger.tokens_out, 2);
}

TEST_CASE("unenforced ledger never refuses") {
    BudgetLedger ledger;
    ledger.budget = 1;
    ledger.enforce_budget = false;
    for (int i = 0; i < 5; ++i) {
        CHECK(ledger.account_call(CallKind::memory_query, 1, 1));
    }
    CHECK_EQ(ledger.total_calls(), 5);
    CHECK_FALSE(ledger.exhausted());
}
