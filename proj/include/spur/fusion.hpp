#pragma once

#include <map>
#include <string>
#include <vector>

#include "spur/sakg.hpp"

namespace spur {

struct FusionConfig {
    double lambda_mb = 0.75;
    double lambda_kg = 0.25;
    double epsilon = 1e-9;
};

/// (x - min) / (max - min + epsilon), elementwise. Empty in, empty out;
/// singletons and all-equal lists map to zeros.
std::vector<double> minmax_normalize(const std::vector<double>& scores, double epsilon);

/// One action in the fused ranking, with the intermediate values kept
/// for logging.
struct FusedCandidate {
    std::string action;
    double fused = 0.0;
    double mb_raw = 0.0;
    double mb_norm = 0.0;
    double kg_norm = 0.0;
};

/// Collapse retrieved fragments to per-action boosts: score each
/// fragment that has an outgoing edge, normalize those scores as one
/// candidate set, then keep the largest normalized score per best
/// action. Edge-less fragments carry no action so they are not fusion
/// candidates.
std::map<std::string, double> kg_action_boosts(const std::vector<GraphFragment>& fragments,
                                               const KgConfig& kg_cfg, double epsilon);

/// S_fuse = lambda_MB * S~_MB + lambda_KG * S~_KG per action. MB raw
/// scores are normalized here (their candidate set is this call's action
/// list); kg_boosts must already be normalized within the fragment set,
/// actions without a boost get 0. Sorted by fused score descending,
/// ties by higher raw MB score, then action identifier.
std::vector<FusedCandidate> fuse(const std::map<std::string, double>& mb_scores,
                                 const std::map<std::string, double>& kg_boosts,
                                 const FusionConfig& cfg);

}  // namespace spur
