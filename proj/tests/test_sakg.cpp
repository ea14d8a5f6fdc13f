#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spur/sakg.hpp"
#include "spur/text.hpp"

using namespace spur;

namespace {

/// Maps tokens "t0".."t7" onto basis axes so node similarities are exact:
/// embed("t0 t0 t0 t1") = (3e0 + e1)/sqrt(10), cosine against e0 = 3/sqrt(10).
class BasisEmbedder : public TextEmbedder {
public:
    int dim() const override { return 8; }
    Eigen::VectorXd embed(const std::string& text) const override {
        Eigen::VectorXd vec = Eigen::VectorXd::Zero(8);
        for (const auto& [token, count] : normalize_text(text)) {
            if (token.size() != 2 || token[0] != 't' || token[1] < '0' || token[1] > '7') {
                throw std::runtime_error("BasisEmbedder: unknown token " + token);
            }
            vec[token[1] - '0'] += static_cast<double>(count);
        }
        double norm = vec.norm();
        if (norm < 1e-12) {
            throw std::runtime_error("BasisEmbedder: token-free text");
        }
        return vec / norm;
    }
};

std::shared_ptr<const BasisEmbedder> basis_embedder() {
    static auto instance = std::make_shared<const BasisEmbedder>();
    return instance;
}

ActionEdge make_edge(double rate, long long exec, const std::string& action, long long to) {
    ActionEdge e;
    e.exec_count = exec;
    e.success_count = static_cast<long long>(std::llround(rate * static_cast<double>(exec)));
    e.action = action;
    e.to_node = to;
    return e;
}

std::filesystem::path temp_file(const std::string& name) {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / "spur_sakg_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("edge_better ranks by rate, exec count, action, then target") {
    ActionEdge strong = make_edge(1.0, 2, "use", 5);
    ActionEdge busy = make_edge(0.5, 4, "act", 5);
    ActionEdge light = make_edge(0.5, 2, "go", 5);
    ActionEdge late = make_edge(0.5, 2, "go", 9);
    ActionEdge zed = make_edge(0.5, 2, "zz", 5);

    CHECK(edge_better(strong, busy));   // higher success rate
    CHECK(edge_better(busy, light));    // same rate, more executions
    CHECK(edge_better(light, zed));     // action identifier ascending
    CHECK(edge_better(light, late));    // target node ascending
    CHECK_FALSE(edge_better(light, light));

    std::vector<ActionEdge> edges = {late, zed, light, busy, strong};
    std::vector<ActionEdge> shuffled = edges;
    std::mt19937 rng(3);
    for (int round = 0; round < 10; ++round) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::sort(shuffled.begin(), shuffled.end(), edge_better);
        std::sort(edges.begin(), edges.end(), edge_better);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            CHECK_EQ(shuffled[i].action, edges[i].action);
            CHECK_EQ(shuffled[i].to_node, edges[i].to_node);
        }
    }
}

TEST_CASE("score_fragment weighs similarity and best-edge success") {
    KgConfig cfg;
    GraphFragment f;
    f.similarity = 0.9;
    CHECK_EQ(score_fragment(f, cfg), doctest::Approx(0.6 * 0.9).epsilon(1e-12));
    f.best_edges.push_back(make_edge(0.75, 4, "go", 2));
    CHECK_EQ(score_fragment(f, cfg), doctest::Approx(0.6 * 0.9 + 0.4 * 0.75).epsilon(1e-12));
}

TEST_CASE("constructor validates its inputs") {
    CHECK_THROWS_AS(KnowledgeGraph(KgConfig{}, nullptr), std::invalid_argument);
    KgConfig cfg;
    cfg.max_entries = 0;
    CHECK_THROWS_AS(KnowledgeGraph(cfg, basis_embedder()), std::invalid_argument);
}

TEST_CASE("nodes deduplicate on normalized state text") {
    KnowledgeGraph g(KgConfig{}, basis_embedder());
    g.upsert_transition("t0 t1", "go", "t2", true, 1.0, 0.0);
    g.upsert_transition("t1 t0", "go", "t2", true, 1.0, 1.0);  // same canonical text
    CHECK_EQ(g.node_count(), 2);
    CHECK_EQ(g.edge_count(), 1);
    const StateNode* node = g.find_node("T1 t0!");
    REQUIRE(node != nullptr);
    CHECK_EQ(node->state_text, "t0 t1");  // first spelling wins
    CHECK_EQ(node->created_at, 0.0);
    CHECK(g.find_node("t5") == nullptr);
}

TEST_CASE("upsert_transition accumulates counts and reward EMA") {
    KnowledgeGraph g(KgConfig{}, basis_embedder());
    g.upsert_transition("t0", "go", "t1", true, 1.0, 10.0);
    g.upsert_transition("t0", "go", "t1", true, 1.0, 20.0);
    const ActionEdge& edge = g.upsert_transition("t0", "go", "t1", false, -1.0, 30.0);
    CHECK_EQ(edge.exec_count, 3);
    CHECK_EQ(edge.success_count, 2);
    CHECK_EQ(edge.success_rate(), doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    // eta = 0.3: 0 -> 0.3 -> 0.51 -> 0.057
    CHECK_EQ(edge.reward_ema, doctest::Approx(0.057).epsilon(1e-12));
    CHECK_EQ(edge.last_write_at, 30.0);
    CHECK_EQ(g.edge_count(), 1);
    CHECK_EQ(g.node_count(), 2);
}

TEST_CASE("same action to different targets makes separate edges") {
    KnowledgeGraph g(KgConfig{}, basis_embedder());
    g.upsert_transition("t0", "go", "t2", true, 1.0, 0.0);
    g.upsert_transition("t0", "go", "t3", true, 1.0, 1.0);
    CHECK_EQ(g.edge_count(), 2);
    const StateNode* from = g.find_node("t0");
    REQUIRE(from != nullptr);
    std::vector<const ActionEdge*> out = g.outgoing_edges(from->node_id);
    REQUIRE_EQ(out.size(), 2);
    // equal rate, exec, action: the earlier target has the smaller node id
    const ActionEdge& best = g.best_action(from->node_id);
    CHECK_EQ(best.to_node, g.find_node("t2")->node_id);
    CHECK_LT(g.find_node("t2")->node_id, g.find_node("t3")->node_id);
}

TEST_CASE("best_action throws when nothing is known") {
    KnowledgeGraph g(KgConfig{}, basis_embedder());
    g.upsert_transition("t0", "go", "t1", true, 1.0, 0.0);
    const StateNode* terminal = g.find_node("t1");
    REQUIRE(terminal != nullptr);
    CHECK_THROWS_AS(g.best_action(terminal->node_id), std::out_of_range);
    CHECK_THROWS_AS(g.best_action(999), std::out_of_range);
    CHECK_THROWS_WITH_AS(g.node(999), doctest::Contains("999"), std::out_of_range);
}

TEST_CASE("query_fragments applies the similarity gate") {
    KnowledgeGraph g(KgConfig{}, basis_embedder());
    g.upsert_transition("t0", "go", "t1", true, 1.0, 0.0);
    g.upsert_transition("t0 t0 t0 t1", "use", "t1", true, 1.0, 1.0);
    g.upsert_transition("t0 t1", "act", "t1", true, 1.0, 2.0);

    std::vector<GraphFragment> got = g.query_fragments("t0");
    // cosines: 1.0, 3/sqrt(10) = 0.9487, 1/sqrt(2) = 0.7071 < tau 0.85
    REQUIRE_EQ(got.size(), 2);
    CHECK_EQ(got[0].node.state_text, "t0");
    CHECK_EQ(got[0].similarity, doctest::Approx(1.0).epsilon(1e-12));
    CHECK_EQ(got[1].node.state_text, "t0 t0 t0 t1");
    CHECK_EQ(got[1].similarity, doctest::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("query_fragments respects top_k and breaks ties by node id") {
    KgConfig cfg;
    cfg.tau_kg = 0.5;
    KnowledgeGraph g(cfg, basis_embedder());
    g.upsert_transition("t0 t1", "go", "t7", true, 1.0, 0.0);
    g.upsert_transition("t0 t2", "use", "t7", true, 1.0, 1.0);
    g.upsert_transition("t0", "act", "t7", true, 1.0, 2.0);
    // hand both mixed nodes the same vector so their similarity ties exactly
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(8);
    diag[0] = 1.0;
    diag[1] = 1.0;
    REQUIRE(g.import_embedding("t0 t1", diag));
    REQUIRE(g.import_embedding("t0 t2", diag));

    std::vector<GraphFragment> got = g.query_fragments("t0");
    REQUIRE_EQ(got.size(), 3);
    CHECK_EQ(got[0].node.state_text, "t0");
    CHECK_EQ(got[1].node.state_text, "t0 t1");  // equal similarity: id order decides
    CHECK_EQ(got[2].node.state_text, "t0 t2");
    CHECK_EQ(got[1].similarity, got[2].similarity);

    KgConfig top1 = cfg;
    top1.top_k = 1;
    KnowledgeGraph h(top1, basis_embedder());
    h.upsert_transition("t0 t1", "go", "t7", true, 1.0, 0.0);
    h.upsert_transition("t0", "act", "t7", true, 1.0, 1.0);
    std::vector<GraphFragment> only = h.query_fragments("t0");
    REQUIRE_EQ(only.size(), 1);
    CHECK_EQ(only[0].node.state_text, "t0");
}

TEST_CASE("fragments carry outgoing edges ranked best-first") {
    KnowledgeGraph g(KgConfig{}, basis_embedder());
    g.upsert_transition("t0", "use", "t1", true, 1.0, 0.0);
    g.upsert_transition("t0", "use", "t1", true, 1.0, 1.0);   // rate 1.0, exec 2
    g.upsert_transition("t0", "go", "t2", true, 1.0, 2.0);
    g.upsert_transition("t0", "go", "t2", false, -1.0, 3.0);  // rate 0.5, exec 2
    g.upsert_transition("t0", "act", "t3", true, 1.0, 4.0);
    g.upsert_transition("t0", "act", "t3", true, 1.0, 5.0);
    g.upsert_transition("t0", "act", "t3", false, -1.0, 6.0);
    g.upsert_transition("t0", "act", "t3", false, -1.0, 7.0);  // rate 0.5, exec 4

    std::vector<GraphFragment> got = g.query_fragments("t0");
    REQUIRE_EQ(got.size(), 1);
    REQUIRE_EQ(got[0].best_edges.size(), 3);
    CHECK_EQ(got[0].best_edges[0].action, "use");
    CHECK_EQ(got[0].best_edges[1].action, "act");  // rate tie, more executions
    CHECK_EQ(got[0].best_edges[2].action, "go");
    const StateNode* from = g.find_node("t0");
    REQUIRE(from != nullptr);
    CHECK_EQ(g.best_action(from->node_id).action, "use");
}

TEST_CASE("query_fragments on an empty graph is empty") {
    KnowledgeGraph g(KgConfig{}, basis_embedder());
    CHECK(g.query_fragments("t0").empty());
}

TEST_CASE("eviction removes the least-used node and its incident edges") {
    KgConfig cfg;
    cfg.max_entries = 3;
    KnowledgeGraph g(cfg, basis_embedder());
    g.upsert_transition("t0", "go", "t1", true, 1.0, 0.0);
    g.upsert_transition("t0", "go", "t1", true, 1.0, 1.0);  // t0 outgoing exec 2
    g.upsert_transition("t1", "go", "t2", true, 1.0, 2.0);  // t1 outgoing exec 1
    CHECK_EQ(g.node_count(), 3);

    g.upsert_transition("t2", "go", "t3", true, 1.0, 3.0);  // forces one eviction
    CHECK_EQ(g.node_count(), 3);
    CHECK(g.find_node("t1") == nullptr);  // least outgoing executions
    REQUIRE(g.find_node("t0") != nullptr);
    // both edges touching t1 went with it
    CHECK_EQ(g.edge_count(), 1);
    CHECK_EQ(g.edges().front()->action, "go");
    CHECK_EQ(g.edges().front()->from_node, g.find_node("t2")->node_id);
}

TEST_CASE("eviction ties fall to the oldest node then the smallest id") {
    KgConfig cfg;
    cfg.max_entries = 3;
    KnowledgeGraph g(cfg, basis_embedder());
    g.upsert_transition("t0", "go", "t1", true, 1.0, 9.0);
    g.upsert_transition("t1", "go", "t0", true, 1.0, 9.0);
    g.upsert_transition("t2", "go", "t0", true, 1.0, 5.0);  // larger id, older timestamp
    CHECK_EQ(g.node_count(), 3);

    g.upsert_transition("t3", "go", "t4", true, 1.0, 20.0);  // evicts twice
    CHECK_EQ(g.node_count(), 3);
    CHECK(g.find_node("t2") == nullptr);  // exec counts all tie; t2 is oldest
    CHECK(g.find_node("t0") == nullptr);  // t0 and t1 tie on age; smaller id goes
    CHECK(g.find_node("t1") != nullptr);
    CHECK_EQ(g.edge_count(), 1);
}

TEST_CASE("transition endpoints are never evicted") {
    KgConfig cfg;
    cfg.max_entries = 1;
    KnowledgeGraph g(cfg, basis_embedder());
    g.upsert_transition("t0", "go", "t1", true, 1.0, 0.0);
    // both endpoints pinned: the graph holds 2 nodes rather than orphaning the edge
    CHECK_EQ(g.node_count(), 2);
    CHECK_EQ(g.edge_count(), 1);
}

TEST_CASE("import_embedding replaces and renormalizes the vector") {
    KnowledgeGraph g(KgConfig{}, basis_embedder());
    g.upsert_transition("t0", "go", "t1", true, 1.0, 0.0);

    Eigen::VectorXd axis3 = Eigen::VectorXd::Zero(8);
    axis3[3] = 2.0;  // deliberately unnormalized
    CHECK(g.import_embedding("t0", axis3));
    const StateNode* node = g.find_node("t0");
    REQUIRE(node != nullptr);
    CHECK_EQ(node->embedding[3], doctest::Approx(1.0).epsilon(1e-12));
    CHECK_EQ(node->embedding.norm(), doctest::Approx(1.0).epsilon(1e-12));

    // the imported vector drives retrieval now
    std::vector<GraphFragment> got = g.query_fragments("t3");
    REQUIRE_EQ(got.size(), 1);
    CHECK_EQ(got[0].node.state_text, "t0");

    CHECK_FALSE(g.import_embedding("t6", axis3));
    Eigen::VectorXd short_vec = Eigen::VectorXd::Ones(7);
    CHECK_THROWS_AS(g.import_embedding("t0", short_vec), std::invalid_argument);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(8);
    CHECK_THROWS_AS(g.import_embedding("t0", zero), std::invalid_argument);
}

TEST_CASE("save and load round trip the whole graph") {
    std::filesystem::path nodes_path = temp_file("roundtrip_nodes.jsonl");
    std::filesystem::path edges_path = temp_file("roundtrip_edges.jsonl");

    KnowledgeGraph g(KgConfig{}, basis_embedder());
    g.upsert_transition("t0", "go", "t1", true, 1.0, 10.0);
    g.upsert_transition("t0", "go", "t1", false, -1.0, 11.0);
    g.upsert_transition("t1", "use", "t2", true, 0.5, 12.0);
    Eigen::VectorXd axis5 = Eigen::VectorXd::Zero(8);
    axis5[5] = 1.0;
    REQUIRE(g.import_embedding("t2", axis5));
    g.save_jsonl(nodes_path.string(), edges_path.string());

    KnowledgeGraph loaded =
        KnowledgeGraph::load_jsonl(nodes_path.string(), edges_path.string(), KgConfig{},
                                   basis_embedder());
    CHECK_EQ(loaded.node_count(), g.node_count());
    CHECK_EQ(loaded.edge_count(), g.edge_count());

    const StateNode* t0 = loaded.find_node("t0");
    REQUIRE(t0 != nullptr);
    CHECK_EQ(t0->created_at, 10.0);
    const ActionEdge& best = loaded.best_action(t0->node_id);
    CHECK_EQ(best.action, "go");
    CHECK_EQ(best.exec_count, 2);
    CHECK_EQ(best.success_count, 1);
    CHECK_EQ(best.reward_ema, doctest::Approx(0.7 * 0.3 + 0.3 * (-1.0)).epsilon(1e-12));
    CHECK_EQ(best.last_write_at, 11.0);

    // imported embedding survives the round trip
    const StateNode* t2 = loaded.find_node("t2");
    REQUIRE(t2 != nullptr);
    CHECK_EQ(t2->embedding[5], doctest::Approx(1.0).epsilon(1e-12));

    // node ids keep counting from the loaded maximum
    long long max_id = 0;
    for (const StateNode* n : loaded.nodes()) max_id = std::max(max_id, n->node_id);
    loaded.upsert_transition("t6", "go", "t7", true, 1.0, 20.0);
    CHECK_EQ(loaded.find_node("t6")->node_id, max_id + 1);

    std::filesystem::remove(nodes_path);
    std::filesystem::remove(edges_path);
}

TEST_CASE("load_jsonl reports the offending file and line") {
    std::filesystem::path nodes_path = temp_file("bad_nodes.jsonl");
    std::filesystem::path edges_path = temp_file("bad_edges.jsonl");
    {
        std::ofstream nodes(nodes_path);
        nodes << R"({"node_id":1,"state_text":"t0","created_at":0.0,"embedding":[1,0,0,0,0,0,0,0]})"
              << '\n';
        nodes << "{not json\n";
        std::ofstream edges(edges_path);
    }
    CHECK_THROWS_WITH_AS(
        KnowledgeGraph::load_jsonl(nodes_path.string(), edges_path.string(), KgConfig{},
                                   basis_embedder()),
        doctest::Contains("bad_nodes.jsonl:2"), std::invalid_argument);
    CHECK_THROWS_AS(
        KnowledgeGraph::load_jsonl((nodes_path.parent_path() / "missing.jsonl").string(),
                                   edges_path.string(), KgConfig{}, basis_embedder()),
        std::invalid_argument);
    std::filesystem::remove(nodes_path);
    std::filesystem::remove(edges_path);
}

TEST_CASE("default embedder smoke test on real state text") {
    KnowledgeGraph g;
    g.upsert_transition("red door locked", "open", "red door open", true, 1.0, 0.0);
    std::vector<GraphFragment> got = g.query_fragments("red door locked");
    REQUIRE_FALSE(got.empty());
    CHECK_EQ(got[0].node.state_text, "red door locked");
    CHECK_EQ(got[0].similarity, doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE_EQ(got[0].best_edges.size(), 1);
    CHECK_EQ(got[0].best_edges[0].action, "open");
}
