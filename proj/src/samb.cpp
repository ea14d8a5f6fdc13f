#include "spur/samb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spur {

namespace {

double clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

}  // namespace

double score_item(const MemoryItem& item, const TokenCounts& query_tokens,
                  Timestamp now, const SambWeights& w) {
    TokenCounts item_tokens = normalize_text(item.state_summary);
    double c = token_cosine(query_tokens, item_tokens);
    double l = jaccard(query_tokens, item_tokens);
    double r = (clip(item.reward_ema, -1.0, 1.0) + 1.0) / 2.0;
    double p = static_cast<double>(item.successes) /
               static_cast<double>(std::max<long long>(1, item.attempts));
    double age_hours = std::max(0.0, hours_between(item.last_write_at, now));
    double rho = std::exp(-age_hours / w.recency_decay_hours);
    return rho * (w.alpha_c * c + w.alpha_l * l + w.alpha_r * r + w.alpha_p * p);
}

std::string MemoryBank::insert(MemoryItem item) {
    if (item.key.empty()) {
        throw std::invalid_argument("MemoryBank::insert: empty key");
    }
    std::string key = item.key;
    items_[key] = std::move(item);
    return key;
}

const MemoryItem& MemoryBank::get(const std::string& key) const {
    auto it = items_.find(key);
    if (it == items_.end()) {
        throw std::out_of_range("MemoryBank::get: unknown key " + key);
    }
    return it->second;
}

MemoryItem& MemoryBank::record_outcome(const std::string& key, double reward,
                                       bool success, Timestamp now) {
    auto it = items_.find(key);
    if (it == items_.end()) {
        throw std::out_of_range("MemoryBank::record_outcome: unknown key " + key);
    }
    MemoryItem& item = it->second;
    item.reward_ema = (1.0 - weights_.eta) * item.reward_ema + weights_.eta * reward;
    item.attempts += 1;
    if (success) item.successes += 1;
    item.last_write_at = now;
    return item;
}

std::vector<Hint> MemoryBank::retrieve_hints(const std::string& query, int k,
                                             Timestamp now) const {
    if (k <= 0) return {};
    TokenCounts query_tokens = normalize_text(query);
    double sem_denom = weights_.alpha_c + weights_.alpha_l;

    std::vector<std::pair<const MemoryItem*, Hint>> scored;
    scored.reserve(items_.size());
    for (const auto& [key, item] : items_) {
        TokenCounts item_tokens = normalize_text(item.state_summary);
        double c = token_cosine(query_tokens, item_tokens);
        double l = jaccard(query_tokens, item_tokens);
        Hint hint;
        hint.key = item.key;
        hint.state_summary = item.state_summary;
        hint.action_trace = item.action_trace;
        hint.score = score_item(item, query_tokens, now, weights_);
        hint.semantic =
            sem_denom > 0.0 ? (weights_.alpha_c * c + weights_.alpha_l * l) / sem_denom : 0.0;
        hint.quick_path = hint.semantic >= weights_.quick_path_threshold;
        hint.direct_adoption = hint.semantic >= weights_.direct_adoption_threshold;
        scored.emplace_back(&item, std::move(hint));
    }

    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second.score != b.second.score) return a.second.score > b.second.score;
        if (a.first->last_write_at != b.first->last_write_at) {
            return a.first->last_write_at > b.first->last_write_at;
        }
        return a.first->key < b.first->key;
    });

    std::vector<Hint> out;
    out.reserve(std::min<std::size_t>(scored.size(), static_cast<std::size_t>(k)));
    for (auto& [item, hint] : scored) {
        if (static_cast<int>(out.size()) >= k) break;
        out.push_back(std::move(hint));
    }
    return out;
}

std::vector<const MemoryItem*> MemoryBank::items() const {
    std::vector<const MemoryItem*> out;
    out.reserve(items_.size());
    for (const auto& [key, item] : items_) out.push_back(&item);
    return out;
}

void MemoryBank::save_jsonl(const std::string& path) const {
    std::ofstream file(path);
    if (!file) {
        throw std::invalid_argument("MemoryBank::save_jsonl: cannot open " + path);
    }
    for (const auto& [key, item] : items_) {
        nlohmann::json j;
        j["key"] = item.key;
        j["state_summary"] = item.state_summary;
        j["action_trace"] = item.action_trace;
        j["reward_ema"] = item.reward_ema;
        j["successes"] = item.successes;
        j["attempts"] = item.attempts;
        j["created_at"] = item.created_at;
        j["last_write_at"] = item.last_write_at;
        j["source_tag"] = item.source_tag;
        file << j.dump() << '\n';
    }
}

MemoryBank MemoryBank::load_jsonl(const std::string& path, SambWeights weights) {
    std::ifstream file(path);
    if (!file) {
        throw std::invalid_argument("MemoryBank::load_jsonl: cannot open " + path);
    }
    MemoryBank bank(weights);
    std::string line;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            std::ostringstream msg;
            msg << "MemoryBank::load_jsonl: bad JSON at " << path << ":" << line_no;
            throw std::invalid_argument(msg.str());
        }
        MemoryItem item;
        item.key = j.at("key").get<std::string>();
        item.state_summary = j.at("state_summary").get<std::string>();
        item.action_trace = j.at("action_trace").get<std::vector<std::string>>();
        item.reward_ema = j.at("reward_ema").get<double>();
        item.successes = j.at("successes").get<long long>();
        item.attempts = j.at("attempts").get<long long>();
        item.created_at = j.at("created_at").get<double>();
        item.last_write_at = j.at("last_write_at").get<double>();
        item.source_tag = j.value("source_tag", std::string());
        bank.insert(std::move(item));
    }
    return bank;
}

}  // namespace spur
