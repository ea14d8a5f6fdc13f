#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace spur {

/// FNV-1a 64-bit. Used for feature hashing and config fingerprints;
/// stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);

/// Maps free text to a fixed-dimension vector. The default is a local
/// hashing embedder; externally computed vectors can be imported per
/// node instead (see KnowledgeGraph::import_embedding).
class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual int dim() const = 0;
    virtual Eigen::VectorXd embed(const std::string& text) const = 0;
};

/// Signed feature hashing over normalized tokens: each token adds +-1
/// (weighted by its count) to one bucket, then the vector is
/// L2-normalized. Texts with no tokens get a deterministic unit vector
/// so cosine stays well defined.
class HashingEmbedder : public TextEmbedder {
public:
    explicit HashingEmbedder(int dim = 256, std::uint64_t seed = 42);

    int dim() const override { return dim_; }
    Eigen::VectorXd embed(const std::string& text) const override;

private:
    int dim_;
    std::uint64_t seed_;
};

/// Cosine similarity; zero-norm inputs compare as 0. Throws
/// std::invalid_argument on dimension mismatch.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

std::shared_ptr<const TextEmbedder> default_embedder();

}  // namespace spur
