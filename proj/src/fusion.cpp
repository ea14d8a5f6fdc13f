#include "spur/fusion.hpp"

#include <algorithm>

namespace spur {

std::vector<double> minmax_normalize(const std::vector<double>& scores, double epsilon) {
    if (scores.empty()) return {};
    auto [min_it, max_it] = std::minmax_element(scores.begin(), scores.end());
    double lo = *min_it;
    double span = *max_it - lo + epsilon;
    std::vector<double> out;
    out.reserve(scores.size());
    for (double s : scores) out.push_back((s - lo) / span);
    return out;
}

std::map<std::string, double> kg_action_boosts(const std::vector<GraphFragment>& fragments,
                                               const KgConfig& kg_cfg, double epsilon) {
    std::vector<const GraphFragment*> candidates;
    for (const GraphFragment& f : fragments) {
        if (!f.best_edges.empty()) candidates.push_back(&f);
    }
    std::vector<double> raw;
    raw.reserve(candidates.size());
    for (const GraphFragment* f : candidates) raw.push_back(score_fragment(*f, kg_cfg));
    std::vector<double> norm = minmax_normalize(raw, epsilon);

    std::map<std::string, double> boosts;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const std::string& action = candidates[i]->best_edges.front().action;
        auto [it, inserted] = boosts.try_emplace(action, norm[i]);
        if (!inserted) it->second = std::max(it->second, norm[i]);
    }
    return boosts;
}

std::vector<FusedCandidate> fuse(const std::map<std::string, double>& mb_scores,
                                 const std::map<std::string, double>& kg_boosts,
                                 const FusionConfig& cfg) {
    std::vector<FusedCandidate> out;
    out.reserve(mb_scores.size());
    std::vector<double> mb_raw;
    mb_raw.reserve(mb_scores.size());
    for (const auto& [action, raw] : mb_scores) mb_raw.push_back(raw);
    std::vector<double> mb_norm = minmax_normalize(mb_raw, cfg.epsilon);

    std::size_t i = 0;
    for (const auto& [action, raw] : mb_scores) {
        FusedCandidate c;
        c.action = action;
        c.mb_raw = raw;
        c.mb_norm = mb_norm[i++];
        auto it = kg_boosts.find(action);
        c.kg_norm = it != kg_boosts.end() ? it->second : 0.0;
        c.fused = cfg.lambda_mb * c.mb_norm + cfg.lambda_kg * c.kg_norm;
        out.push_back(std::move(c));
    }

    std::sort(out.begin(), out.end(), [](const FusedCandidate& a, const FusedCandidate& b) {
        if (a.fused != b.fused) return a.fused > b.fused;
        if (a.mb_raw != b.mb_raw) return a.mb_raw > b.mb_raw;
        return a.action < b.action;
    });
    return out;
}

}  // namespace spur
