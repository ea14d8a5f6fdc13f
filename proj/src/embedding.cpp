#include "spur/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "spur/text.hpp"

namespace spur {

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t hash = seed;
    for (unsigned char byte : data) {
        hash ^= static_cast<std::uint64_t>(byte);
        hash *= 1099511628211ULL;
    }
    return hash;
}

HashingEmbedder::HashingEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim <= 0) {
        throw std::invalid_argument("HashingEmbedder: dim must be positive");
    }
}

Eigen::VectorXd HashingEmbedder::embed(const std::string& text) const {
    if (text.empty()) {
        throw std::invalid_argument("HashingEmbedder::embed: empty text");
    }
    Eigen::VectorXd vec = Eigen::VectorXd::Zero(dim_);
    TokenCounts tokens = normalize_text(text);
    for (const auto& [token, count] : tokens) {
        std::uint64_t h = fnv1a64(token, seed_);
        auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim_));
        // Independent bit decides the sign so bucket collisions tend to cancel.
        double sign = ((h >> 32) & 1ULL) ? 1.0 : -1.0;
        vec[bucket] += sign * static_cast<double>(count);
    }
    double norm = vec.norm();
    if (norm < 1e-12) {
        // Token-free text: fall back to one fixed bucket so the vector
        // is still a unit vector and runs stay deterministic.
        vec.setZero();
        vec[static_cast<Eigen::Index>(seed_ % static_cast<std::uint64_t>(dim_))] = 1.0;
        return vec;
    }
    return vec / norm;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    }
    double na = a.norm();
    double nb = b.norm();
    if (na < 1e-12 || nb < 1e-12) return 0.0;
    return a.dot(b) / (na * nb);
}

std::shared_ptr<const TextEmbedder> default_embedder() {
    static auto instance = std::make_shared<const HashingEmbedder>(256, 42);
    return instance;
}

}  // namespace spur
