#pragma once

#include <map>
#include <string>
#include <string_view>

namespace spur {

/// Token multiset: token -> occurrence count. std::map keeps iteration
/// order stable so downstream hashing and serialization are deterministic.
using TokenCounts = std::map<std::string, int>;

/// Lowercase, strip punctuation, collapse whitespace, split into tokens.
/// Idempotent: normalizing the joined token stream again is a fixed point.
TokenCounts normalize_text(std::string_view text);

/// Rebuild a canonical single-spaced string from a token multiset.
std::string join_tokens(const TokenCounts& tokens);

/// Normalize and join in one step; used as the canonical key for
/// deduplicating state text.
std::string canonical_text(std::string_view text);

/// Jaccard overlap of the token *sets* (counts ignored).
/// Both empty -> 0.
double jaccard(const TokenCounts& a, const TokenCounts& b);

/// Cosine similarity of the token-frequency vectors.
/// Either multiset empty -> 0. Result in [0, 1].
double token_cosine(const TokenCounts& a, const TokenCounts& b);

}  // namespace spur
