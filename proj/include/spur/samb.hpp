#pragma once

#include <map>
#include <string>
#include <vector>

#include "spur/text.hpp"

namespace spur {

/// Logical timestamp in seconds. The runtime drives this from step
/// indices so runs stay reproducible; wall clocks never enter the stores.
using Timestamp = double;

inline double hours_between(Timestamp from, Timestamp to) {
    return (to - from) / 3600.0;
}

/// One state-action record in the memory bank.
struct MemoryItem {
    std::string key;
    std::string state_summary;
    std::vector<std::string> action_trace;
    double reward_ema = 0.0;
    long long successes = 0;
    long long attempts = 0;
    Timestamp created_at = 0.0;
    Timestamp last_write_at = 0.0;
    std::string source_tag;
};

/// Retrieval weights and update rates for the bank.
struct SambWeights {
    double alpha_c = 0.55;
    double alpha_l = 0.45;
    double alpha_r = 0.15;
    double alpha_p = 0.10;
    double eta = 0.3;
    double recency_decay_hours = 24.0;
    double quick_path_threshold = 0.85;
    double direct_adoption_threshold = 0.92;
};

/// Retrieval result handed to the Reactive Controller. Hints are advice,
/// never commands: the flags mark strong semantic matches but nothing is
/// auto-executed.
struct Hint {
    std::string key;
    std::string state_summary;
    std::vector<std::string> action_trace;
    double score = 0.0;
    double semantic = 0.0;  ///< (aC*C + aL*L) / (aC + aL)
    bool quick_path = false;
    bool direct_adoption = false;
};

/// Rank a single item against a query at time `now`:
///   rho * (aC*C + aL*L + aR*R + aP*P)
/// with C = token-frequency cosine, L = Jaccard, R = (clip(ema,-1,1)+1)/2,
/// P = successes / max(1, attempts), rho = exp(-ageHours / decay).
double score_item(const MemoryItem& item, const TokenCounts& query_tokens,
                  Timestamp now, const SambWeights& w);

/// Flat scored store of recent state-action items.
class MemoryBank {
public:
    explicit MemoryBank(SambWeights weights = {}) : weights_(weights) {}

    const SambWeights& weights() const { return weights_; }

    /// Insert or overwrite by key. Returns the key.
    std::string insert(MemoryItem item);

    bool contains(const std::string& key) const { return items_.count(key) != 0; }
    const MemoryItem& get(const std::string& key) const;
    std::size_t size() const { return items_.size(); }

    /// EMA reward update plus success/attempt counters. Throws
    /// std::out_of_range for an unknown key.
    MemoryItem& record_outcome(const std::string& key, double reward, bool success,
                               Timestamp now);

    /// Top-k items by score, descending; ties broken by most recent
    /// last_write_at, then lexicographic key. Empty store -> empty list.
    std::vector<Hint> retrieve_hints(const std::string& query, int k, Timestamp now) const;

    /// All items in key order (stable for persistence and merging).
    std::vector<const MemoryItem*> items() const;

    /// JSONL persistence, one item per line.
    void save_jsonl(const std::string& path) const;
    static MemoryBank load_jsonl(const std::string& path, SambWeights weights = {});

private:
    SambWeights weights_;
    std::map<std::string, MemoryItem> items_;
};

}  // namespace spur
