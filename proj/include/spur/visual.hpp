#pragma once

#include <Eigen/Core>
#include <iosfwd>

#include "spur/frame.hpp"

namespace spur {

inline constexpr int kDescriptorSide = 32;
inline constexpr int kDescriptorDim = kDescriptorSide * kDescriptorSide;

/// Output of the visual change encoder. `values` is unit length unless
/// `zero_norm` is set, in which case it is all zero (the centered vector
/// had no detectable structure).
struct Descriptor {
    Eigen::VectorXd values;
    bool zero_norm = false;
};

/// Deterministic change descriptor:
/// grayscale -> 32x32 bilinear resize -> flatten -> scale to [0,1]
/// -> mean-center -> L2-normalize.
/// Throws std::invalid_argument on an empty or malformed frame.
Descriptor encode(const Frame& frame);

/// Cosine distance 1 - cos(a, b) in [0, 2]. Returns 0 when either
/// descriptor is flagged zero-norm. Throws std::invalid_argument when the
/// vectors differ in length.
double visual_distance(const Descriptor& a, const Descriptor& b);

/// Debug dump: 1024 comma-separated decimals on one line.
void write_descriptor_csv(const Descriptor& d, std::ostream& out);

}  // namespace spur
