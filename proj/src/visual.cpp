#include "spur/visual.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace spur {

namespace {

// BT.601 luma. Single-channel frames pass through unchanged; 3+ channel
// frames use the first three samples per pixel.
Eigen::MatrixXd to_grayscale(const Frame& f) {
    Eigen::MatrixXd gray(f.height, f.width);
    const int ch = f.channels;
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            const std::uint8_t* px = &f.pixels[(std::size_t(y) * f.width + x) * ch];
            double v;
            if (ch == 1) {
                v = px[0];
            } else {
                v = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
            }
            gray(y, x) = v;
        }
    }
    return gray;
}

// Bilinear resample with half-pixel-center coordinates, clamped at the
// borders.
Eigen::MatrixXd resize_bilinear(const Eigen::MatrixXd& src, int out_h, int out_w) {
    Eigen::MatrixXd dst(out_h, out_w);
    const int src_h = static_cast<int>(src.rows());
    const int src_w = static_cast<int>(src.cols());
    const double sy = static_cast<double>(src_h) / out_h;
    const double sx = static_cast<double>(src_w) / out_w;
    for (int oy = 0; oy < out_h; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(src_h - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, src_h - 1);
        const double wy = fy - y0;
        for (int ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(src_w - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, src_w - 1);
            const double wx = fx - x0;
            const double top = src(y0, x0) * (1.0 - wx) + src(y0, x1) * wx;
            const double bot = src(y1, x0) * (1.0 - wx) + src(y1, x1) * wx;
            dst(oy, ox) = top * (1.0 - wy) + bot * wy;
        }
    }
    return dst;
}

}  // namespace

Descriptor encode(const Frame& frame) {
    if (frame.empty()) {
        throw std::invalid_argument("encode: empty or malformed frame");
    }
    const Eigen::MatrixXd gray = to_grayscale(frame);
    const Eigen::MatrixXd small = resize_bilinear(gray, kDescriptorSide, kDescriptorSide);

    Eigen::VectorXd v(kDescriptorDim);
    for (int y = 0; y < kDescriptorSide; ++y) {
        for (int x = 0; x < kDescriptorSide; ++x) {
            v[y * kDescriptorSide + x] = small(y, x) / 255.0;
        }
    }
    v.array() -= v.mean();

    Descriptor out;
    const double norm = v.norm();
    if (norm < 1e-12) {
        out.values = Eigen::VectorXd::Zero(kDescriptorDim);
        out.zero_norm = true;
    } else {
        out.values = v / norm;
        out.zero_norm = false;
    }
    return out;
}

double visual_distance(const Descriptor& a, const Descriptor& b) {
    if (a.values.size() != b.values.size()) {
        throw std::invalid_argument("visual_distance: descriptor length mismatch");
    }
    if (a.zero_norm || b.zero_norm) return 0.0;
    // Unit vectors, so the dot sits in [-1, 1] up to rounding; clamp the
    // rounding so the result honors the documented [0, 2] range.
    return std::clamp(1.0 - a.values.dot(b.values), 0.0, 2.0);
}

void write_descriptor_csv(const Descriptor& d, std::ostream& out) {
    for (Eigen::Index i = 0; i < d.values.size(); ++i) {
        if (i) out << ',';
        out << d.values[i];
    }
    out << '\n';
}

}  // namespace spur
