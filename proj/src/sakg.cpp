#include "spur/sakg.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "spur/text.hpp"

namespace spur {

bool edge_better(const ActionEdge& a, const ActionEdge& b) {
    double ra = a.success_rate();
    double rb = b.success_rate();
    if (ra != rb) return ra > rb;
    if (a.exec_count != b.exec_count) return a.exec_count > b.exec_count;
    if (a.action != b.action) return a.action < b.action;
    return a.to_node < b.to_node;
}

double score_fragment(const GraphFragment& fragment, const KgConfig& cfg) {
    double p = fragment.best_edges.empty() ? 0.0 : fragment.best_edges.front().success_rate();
    return cfg.beta_c * fragment.similarity + cfg.beta_p * p;
}

KnowledgeGraph::KnowledgeGraph(KgConfig cfg, std::shared_ptr<const TextEmbedder> embedder)
    : cfg_(cfg), embedder_(std::move(embedder)) {
    if (!embedder_) {
        throw std::invalid_argument("KnowledgeGraph: null embedder");
    }
    if (cfg_.max_entries == 0) {
        throw std::invalid_argument("KnowledgeGraph: max_entries must be positive");
    }
}

long long KnowledgeGraph::upsert_node(const std::string& state_text, Timestamp now) {
    std::string key = canonical_text(state_text);
    auto it = node_by_text_.find(key);
    if (it != node_by_text_.end()) return it->second;

    StateNode node;
    node.node_id = next_node_id_++;
    node.state_text = state_text;
    node.embedding = embedder_->embed(state_text);
    node.created_at = now;
    long long id = node.node_id;
    nodes_[id] = std::move(node);
    node_by_text_[key] = id;
    return id;
}

void KnowledgeGraph::evict_if_needed(long long keep_a, long long keep_b) {
    while (nodes_.size() > cfg_.max_entries) {
        // Victim: smallest total outgoing exec_count, then oldest
        // created_at, then smallest id. The endpoints of the transition
        // being written are exempt so the new edge stays valid.
        long long victim = -1;
        long long victim_exec = std::numeric_limits<long long>::max();
        Timestamp victim_created = 0.0;
        for (const auto& [id, node] : nodes_) {
            if (id == keep_a || id == keep_b) continue;
            long long exec = 0;
            for (auto it = edges_.lower_bound({id, "", std::numeric_limits<long long>::min()});
                 it != edges_.end() && std::get<0>(it->first) == id; ++it) {
                exec += it->second.exec_count;
            }
            if (victim < 0 || exec < victim_exec ||
                (exec == victim_exec && node.created_at < victim_created)) {
                victim = id;
                victim_exec = exec;
                victim_created = node.created_at;
            }
        }
        if (victim < 0) return;  // everything is pinned

        node_by_text_.erase(canonical_text(nodes_.at(victim).state_text));
        nodes_.erase(victim);
        for (auto it = edges_.begin(); it != edges_.end();) {
            if (std::get<0>(it->first) == victim || std::get<2>(it->first) == victim) {
                it = edges_.erase(it);
            } else {
                ++it;
            }
        }
    }
}

const ActionEdge& KnowledgeGraph::upsert_transition(const std::string& state_text,
                                                    const std::string& action,
                                                    const std::string& next_state_text,
                                                    bool success, double reward,
                                                    Timestamp now) {
    long long from = upsert_node(state_text, now);
    long long to = upsert_node(next_state_text, now);
    evict_if_needed(from, to);

    EdgeKey key{from, action, to};
    auto [it, inserted] = edges_.try_emplace(key);
    ActionEdge& edge = it->second;
    if (inserted) {
        edge.from_node = from;
        edge.to_node = to;
        edge.action = action;
    }
    edge.exec_count += 1;
    if (success) edge.success_count += 1;
    edge.reward_ema = (1.0 - cfg_.eta) * edge.reward_ema + cfg_.eta * reward;
    edge.last_write_at = now;
    return edge;
}

std::vector<GraphFragment> KnowledgeGraph::query_fragments(const std::string& query_text) const {
    if (nodes_.empty()) return {};
    Eigen::VectorXd query = embedder_->embed(query_text);

    std::vector<std::pair<double, long long>> ranked;
    ranked.reserve(nodes_.size());
    for (const auto& [id, node] : nodes_) {
        ranked.emplace_back(cosine_similarity(query, node.embedding), id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::vector<GraphFragment> out;
    for (const auto& [sim, id] : ranked) {
        if (static_cast<int>(out.size()) >= cfg_.top_k) break;
        if (sim < cfg_.tau_kg) break;  // ranked descending, nothing below qualifies
        GraphFragment fragment;
        fragment.node = nodes_.at(id);
        fragment.similarity = sim;
        for (const ActionEdge* edge : outgoing_edges(id)) {
            fragment.best_edges.push_back(*edge);
        }
        std::sort(fragment.best_edges.begin(), fragment.best_edges.end(), edge_better);
        out.push_back(std::move(fragment));
    }
    return out;
}

const ActionEdge& KnowledgeGraph::best_action(long long node_id) const {
    const ActionEdge* best = nullptr;
    for (const ActionEdge* edge : outgoing_edges(node_id)) {
        if (!best || edge_better(*edge, *best)) best = edge;
    }
    if (!best) {
        throw std::out_of_range("KnowledgeGraph::best_action: node " +
                                std::to_string(node_id) + " has no outgoing edges");
    }
    return *best;
}

const StateNode* KnowledgeGraph::find_node(const std::string& state_text) const {
    auto it = node_by_text_.find(canonical_text(state_text));
    if (it == node_by_text_.end()) return nullptr;
    return &nodes_.at(it->second);
}

const StateNode& KnowledgeGraph::node(long long node_id) const {
    auto it = nodes_.find(node_id);
    if (it == nodes_.end()) {
        throw std::out_of_range("KnowledgeGraph::node: unknown id " + std::to_string(node_id));
    }
    return it->second;
}

std::vector<const StateNode*> KnowledgeGraph::nodes() const {
    std::vector<const StateNode*> out;
    out.reserve(nodes_.size());
    for (const auto& [id, node] : nodes_) out.push_back(&node);
    return out;
}

std::vector<const ActionEdge*> KnowledgeGraph::edges() const {
    std::vector<const ActionEdge*> out;
    out.reserve(edges_.size());
    for (const auto& [key, edge] : edges_) out.push_back(&edge);
    return out;
}

std::vector<const ActionEdge*> KnowledgeGraph::outgoing_edges(long long node_id) const {
    std::vector<const ActionEdge*> out;
    for (auto it = edges_.lower_bound({node_id, "", std::numeric_limits<long long>::min()});
         it != edges_.end() && std::get<0>(it->first) == node_id; ++it) {
        out.push_back(&it->second);
    }
    return out;
}

bool KnowledgeGraph::import_embedding(const std::string& state_text,
                                      const Eigen::VectorXd& embedding) {
    auto it = node_by_text_.find(canonical_text(state_text));
    if (it == node_by_text_.end()) return false;
    if (embedding.size() != embedder_->dim()) {
        throw std::invalid_argument("import_embedding: dimension mismatch");
    }
    double norm = embedding.norm();
    if (norm < 1e-12) {
        throw std::invalid_argument("import_embedding: zero-norm vector");
    }
    nodes_.at(it->second).embedding = embedding / norm;
    return true;
}

void KnowledgeGraph::save_jsonl(const std::string& nodes_path,
                                const std::string& edges_path) const {
    std::ofstream nodes_file(nodes_path);
    if (!nodes_file) {
        throw std::invalid_argument("KnowledgeGraph::save_jsonl: cannot open " + nodes_path);
    }
    for (const auto& [id, node] : nodes_) {
        nlohmann::json j;
        j["node_id"] = node.node_id;
        j["state_text"] = node.state_text;
        j["created_at"] = node.created_at;
        std::vector<double> emb(node.embedding.data(),
                                node.embedding.data() + node.embedding.size());
        j["embedding"] = emb;
        nodes_file << j.dump() << '\n';
    }

    std::ofstream edges_file(edges_path);
    if (!edges_file) {
        throw std::invalid_argument("KnowledgeGraph::save_jsonl: cannot open " + edges_path);
    }
    for (const auto& [key, edge] : edges_) {
        nlohmann::json j;
        j["from_node"] = edge.from_node;
        j["to_node"] = edge.to_node;
        j["action"] = edge.action;
        j["exec_count"] = edge.exec_count;
        j["success_count"] = edge.success_count;
        j["reward_ema"] = edge.reward_ema;
        j["last_write_at"] = edge.last_write_at;
        edges_file << j.dump() << '\n';
    }
}

KnowledgeGraph KnowledgeGraph::load_jsonl(const std::string& nodes_path,
                                          const std::string& edges_path, KgConfig cfg,
                                          std::shared_ptr<const TextEmbedder> embedder) {
    KnowledgeGraph graph(cfg, std::move(embedder));

    auto parse_line = [](const std::string& path, const std::string& line, int line_no) {
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            std::ostringstream msg;
            msg << "KnowledgeGraph::load_jsonl: bad JSON at " << path << ":" << line_no;
            throw std::invalid_argument(msg.str());
        }
        return j;
    };

    std::ifstream nodes_file(nodes_path);
    if (!nodes_file) {
        throw std::invalid_argument("KnowledgeGraph::load_jsonl: cannot open " + nodes_path);
    }
    std::string line;
    int line_no = 0;
    while (std::getline(nodes_file, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = parse_line(nodes_path, line, line_no);
        StateNode node;
        node.node_id = j.at("node_id").get<long long>();
        node.state_text = j.at("state_text").get<std::string>();
        node.created_at = j.at("created_at").get<double>();
        auto emb = j.at("embedding").get<std::vector<double>>();
        node.embedding = Eigen::Map<const Eigen::VectorXd>(emb.data(),
                                                           static_cast<Eigen::Index>(emb.size()));
        graph.next_node_id_ = std::max(graph.next_node_id_, node.node_id + 1);
        graph.node_by_text_[canonical_text(node.state_text)] = node.node_id;
        graph.nodes_[node.node_id] = std::move(node);
    }

    std::ifstream edges_file(edges_path);
    if (!edges_file) {
        throw std::invalid_argument("KnowledgeGraph::load_jsonl: cannot open " + edges_path);
    }
    line_no = 0;
    while (std::getline(edges_file, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = parse_line(edges_path, line, line_no);
        ActionEdge edge;
        edge.from_node = j.at("from_node").get<long long>();
        edge.to_node = j.at("to_node").get<long long>();
        edge.action = j.at("action").get<std::string>();
        edge.exec_count = j.at("exec_count").get<long long>();
        edge.success_count = j.at("success_count").get<long long>();
        edge.reward_ema = j.at("reward_ema").get<double>();
        edge.last_write_at = j.at("last_write_at").get<double>();
        EdgeKey key{edge.from_node, edge.action, edge.to_node};
        graph.edges_[key] = std::move(edge);
    }
    return graph;
}

}  // namespace spur
