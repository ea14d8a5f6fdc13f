#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "spur/embedding.hpp"
#include "spur/samb.hpp"

namespace spur {

struct StateNode {
    long long node_id = 0;
    std::string state_text;
    Eigen::VectorXd embedding;
    Timestamp created_at = 0.0;
};

struct ActionEdge {
    long long from_node = 0;
    long long to_node = 0;
    std::string action;
    long long exec_count = 0;
    long long success_count = 0;
    double reward_ema = 0.0;
    Timestamp last_write_at = 0.0;

    double success_rate() const {
        return exec_count > 0 ? static_cast<double>(success_count) /
                                    static_cast<double>(exec_count)
                              : 0.0;
    }
};

/// A retrieved node with its outgoing edges ranked best-first.
struct GraphFragment {
    StateNode node;
    std::vector<ActionEdge> best_edges;
    double similarity = 0.0;  ///< C_j against the query, >= tau_kg
};

struct KgConfig {
    double tau_kg = 0.85;
    int top_k = 5;
    double beta_c = 0.6;
    double beta_p = 0.4;
    std::size_t max_entries = 10000;
    double eta = 0.3;  ///< edge reward EMA rate
};

/// Edge ranking used everywhere a "best" action is needed: success rate,
/// then exec_count, then action identifier, then to_node, so the result
/// never depends on insertion order.
bool edge_better(const ActionEdge& a, const ActionEdge& b);

/// S_KG = beta_C * C_j + beta_P * P_j, with P_j the success rate of the
/// fragment's best edge (0 when the node has no outgoing edges).
double score_fragment(const GraphFragment& fragment, const KgConfig& cfg);

/// Validated transition store. Nodes are deduplicated on normalized
/// state text; similarity edges are not stored, they fall out of the
/// nearest-neighbor query.
class KnowledgeGraph {
public:
    explicit KnowledgeGraph(KgConfig cfg = {},
                            std::shared_ptr<const TextEmbedder> embedder = default_embedder());

    const KgConfig& config() const { return cfg_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    /// Insert or update the (state, action, next-state) edge. Callers are
    /// expected to have passed the promotion gate already; the graph
    /// itself accepts anything handed to it.
    const ActionEdge& upsert_transition(const std::string& state_text,
                                        const std::string& action,
                                        const std::string& next_state_text, bool success,
                                        double reward, Timestamp now);

    /// Top-k nearest nodes with similarity >= tau_kg, edges ranked.
    std::vector<GraphFragment> query_fragments(const std::string& query_text) const;

    /// Best outgoing edge per edge_better. Throws std::out_of_range when
    /// the node has no outgoing edges or does not exist.
    const ActionEdge& best_action(long long node_id) const;

    const StateNode* find_node(const std::string& state_text) const;
    const StateNode& node(long long node_id) const;
    std::vector<const StateNode*> nodes() const;
    std::vector<const ActionEdge*> edges() const;
    std::vector<const ActionEdge*> outgoing_edges(long long node_id) const;

    /// Replace a node's embedding with an externally computed vector
    /// (renormalized). Returns false when no node has that state text.
    /// Throws std::invalid_argument on dimension mismatch or zero norm.
    bool import_embedding(const std::string& state_text, const Eigen::VectorXd& embedding);

    /// Two-file JSONL persistence (nodes carry their embeddings so
    /// imported vectors survive a round trip).
    void save_jsonl(const std::string& nodes_path, const std::string& edges_path) const;
    static KnowledgeGraph load_jsonl(const std::string& nodes_path,
                                     const std::string& edges_path, KgConfig cfg = {},
                                     std::shared_ptr<const TextEmbedder> embedder =
                                         default_embedder());

private:
    using EdgeKey = std::tuple<long long, std::string, long long>;  // from, action, to

    long long upsert_node(const std::string& state_text, Timestamp now);
    void evict_if_needed(long long keep_a, long long keep_b);

    KgConfig cfg_;
    std::shared_ptr<const TextEmbedder> embedder_;
    long long next_node_id_ = 1;
    std::map<long long, StateNode> nodes_;
    std::map<std::string, long long> node_by_text_;  // canonical text -> id
    std::map<EdgeKey, ActionEdge> edges_;
};

}  // namespace spur
