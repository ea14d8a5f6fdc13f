#include "spur/text.hpp"

#include <cctype>
#include <cmath>

namespace spur {

TokenCounts normalize_text(std::string_view text) {
    TokenCounts counts;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            ++counts[token];
            token.clear();
        }
    };
    for (unsigned char ch : text) {
        if (std::isalnum(ch)) {
            token.push_back(static_cast<char>(std::tolower(ch)));
        } else {
            // Punctuation and whitespace both end the current token.
            flush();
        }
    }
    flush();
    return counts;
}

std::string join_tokens(const TokenCounts& tokens) {
    std::string out;
    for (const auto& [tok, n] : tokens) {
        for (int i = 0; i < n; ++i) {
            if (!out.empty()) out.push_back(' ');
            out += tok;
        }
    }
    return out;
}

std::string canonical_text(std::string_view text) {
    return join_tokens(normalize_text(text));
}

double jaccard(const TokenCounts& a, const TokenCounts& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& [tok, n] : a) {
        (void)n;
        if (b.count(tok)) ++inter;
    }
    const std::size_t uni = a.size() + b.size() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double token_cosine(const TokenCounts& a, const TokenCounts& b) {
    if (a.empty() || b.empty()) return 0.0;
    double dot = 0.0;
    for (const auto& [tok, n] : a) {
        auto it = b.find(tok);
        if (it != b.end()) dot += double(n) * double(it->second);
    }
    double na = 0.0, nb = 0.0;
    for (const auto& [tok, n] : a) {
        (void)tok;
        na += double(n) * double(n);
    }
    for (const auto& [tok, n] : b) {
        (void)tok;
        nb += double(n) * double(n);
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace spur
