#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "spur/fusion.hpp"
#include "spur/sakg.hpp"

using namespace spur;

namespace {

GraphFragment frag(double sim, const std::string& action, long long succ, long long exec) {
    GraphFragment f;
    f.similarity = sim;
    if (!action.empty()) {
        ActionEdge e;
        e.action = action;
        e.success_count = succ;
        e.exec_count = exec;
        f.best_edges.push_back(e);
    }
    return f;
}

}  // namespace

TEST_CASE("minmax_normalize maps spans onto [0, 1)") {
    std::vector<double> out = minmax_normalize({2.0, 4.0, 6.0}, 1e-9);
    REQUIRE_EQ(out.size(), 3);
    CHECK_EQ(out[0], 0.0);
    CHECK_EQ(out[1], doctest::Approx(0.5).epsilon(1e-8));
    CHECK_EQ(out[2], doctest::Approx(1.0).epsilon(1e-8));
    CHECK_LT(out[2], 1.0);  // epsilon keeps the top strictly below 1
}

TEST_CASE("minmax_normalize degenerate inputs") {
    CHECK(minmax_normalize({}, 1e-9).empty());
    CHECK_EQ(minmax_normalize({5.0}, 1e-9), std::vector<double>{0.0});
    std::vector<double> flat = minmax_normalize({3.0, 3.0, 3.0}, 1e-9);
    CHECK_EQ(flat, std::vector<double>({0.0, 0.0, 0.0}));
}

TEST_CASE("minmax_normalize is affine invariant up to epsilon") {
    std::vector<double> base = {1.0, 3.0, 7.0};
    std::vector<double> shifted;
    for (double v : base) shifted.push_back(2.0 * v + 5.0);
    std::vector<double> a = minmax_normalize(base, 1e-9);
    std::vector<double> b = minmax_normalize(shifted, 1e-9);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK_EQ(a[i], doctest::Approx(b[i]).epsilon(1e-6));
    }
}

TEST_CASE("kg_action_boosts normalizes fragments then keeps the action max") {
    std::vector<GraphFragment> fragments;
    fragments.push_back(frag(0.90, "go", 3, 4));   // 0.6*0.90 + 0.4*0.75 = 0.84
    fragments.push_back(frag(0.95, "use", 1, 2));  // 0.6*0.95 + 0.4*0.50 = 0.77
    fragments.push_back(frag(0.86, "go", 0, 1));   // 0.6*0.86 + 0.4*0.00 = 0.516
    KgConfig kg;
    std::map<std::string, double> boosts = kg_action_boosts(fragments, kg, 1e-9);
    REQUIRE_EQ(boosts.size(), 2);
    // raw scores span [0.516, 0.84]; "go" takes the max of its two fragments
    CHECK_EQ(boosts.at("go"), doctest::Approx(1.0).epsilon(1e-8));
    CHECK_EQ(boosts.at("use"), doctest::Approx(0.254 / 0.324).epsilon(1e-8));
}

TEST_CASE("edge-less fragments are not fusion candidates") {
    std::vector<GraphFragment> fragments;
    fragments.push_back(frag(0.99, "", 0, 0));  // would win on similarity alone
    fragments.push_back(frag(0.90, "go", 3, 4));
    KgConfig kg;
    std::map<std::string, double> boosts = kg_action_boosts(fragments, kg, 1e-9);
    REQUIRE_EQ(boosts.size(), 1);
    CHECK_EQ(boosts.at("go"), 0.0);  // singleton candidate set normalizes to zero
}

TEST_CASE("kg_action_boosts on no usable fragments is empty") {
    CHECK(kg_action_boosts({}, KgConfig{}, 1e-9).empty());
    std::vector<GraphFragment> only_bare = {frag(0.9, "", 0, 0)};
    CHECK(kg_action_boosts(only_bare, KgConfig{}, 1e-9).empty());
}

TEST_CASE("fuse combines normalized scores with the configured weights") {
    std::map<std::string, double> mb = {{"a", 0.2}, {"b", 0.6}};
    std::map<std::string, double> kg = {{"b", 1.0}};
    std::vector<FusedCandidate> out = fuse(mb, kg, FusionConfig{});
    REQUIRE_EQ(out.size(), 2);
    CHECK_EQ(out[0].action, "b");
    CHECK_EQ(out[0].mb_raw, 0.6);
    CHECK_EQ(out[0].mb_norm, doctest::Approx(1.0).epsilon(1e-8));
    CHECK_EQ(out[0].kg_norm, 1.0);
    CHECK_EQ(out[0].fused, doctest::Approx(0.75 * 1.0 + 0.25 * 1.0).epsilon(1e-8));
    CHECK_EQ(out[1].action, "a");
    CHECK_EQ(out[1].mb_norm, 0.0);
    CHECK_EQ(out[1].kg_norm, 0.0);
    CHECK_EQ(out[1].fused, 0.0);
}

TEST_CASE("fuse without graph evidence keeps the memory-bank order") {
    std::map<std::string, double> mb = {{"left", 0.1}, {"mid", 0.5}, {"right", 0.9}};
    std::vector<FusedCandidate> out = fuse(mb, {}, FusionConfig{});
    REQUIRE_EQ(out.size(), 3);
    CHECK_EQ(out[0].action, "right");
    CHECK_EQ(out[1].action, "mid");
    CHECK_EQ(out[2].action, "left");
    for (const FusedCandidate& c : out) {
        CHECK_EQ(c.kg_norm, 0.0);
        CHECK_EQ(c.fused, doctest::Approx(0.75 * c.mb_norm).epsilon(1e-12));
    }
}

TEST_CASE("fused ties fall back to raw memory score then action id") {
    SUBCASE("raw memory score breaks the tie") {
        FusionConfig cfg;
        cfg.epsilon = 0.0;  // exact normalization so the tie is exact
        cfg.lambda_mb = 0.25;
        cfg.lambda_kg = 0.25;
        std::map<std::string, double> mb = {{"x", 0.2}, {"y", 0.6}};
        std::map<std::string, double> kg = {{"x", 1.0}, {"y", 0.0}};
        std::vector<FusedCandidate> out = fuse(mb, kg, cfg);
        REQUIRE_EQ(out.size(), 2);
        CHECK_EQ(out[0].fused, out[1].fused);
        CHECK_EQ(out[0].action, "y");  // mb_raw 0.6 beats 0.2
    }
    SUBCASE("action identifier is the last resort") {
        // equal memory scores normalize to zero, so fused and raw both
        // tie exactly even with the default epsilon
        std::map<std::string, double> mb = {{"y", 0.4}, {"x", 0.4}};
        std::map<std::string, double> kg = {{"x", 0.3}, {"y", 0.3}};
        std::vector<FusedCandidate> out = fuse(mb, kg, FusionConfig{});
        REQUIRE_EQ(out.size(), 2);
        CHECK_EQ(out[0].fused, out[1].fused);
        CHECK_EQ(out[0].action, "x");
        CHECK_EQ(out[1].action, "y");
    }
}

TEST_CASE("fuse with empty inputs") {
    CHECK(fuse({}, {}, FusionConfig{}).empty());
    std::map<std::string, double> kg = {{"go", 1.0}};
    CHECK(fuse({}, kg, FusionConfig{}).empty());  // no MB candidates, nothing to rank
}
