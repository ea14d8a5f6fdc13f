#pragma once

#include <cstdint>
#include <vector>

namespace spur {

/// Raw pixel grid as produced by the simulator renderer or a decoded PNG.
/// Row-major, `channels` interleaved 8-bit samples per pixel (1 = gray,
/// 3 = RGB).
struct Frame {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    bool empty() const {
        return width < 1 || height < 1 ||
               pixels.size() != static_cast<std::size_t>(width) * height * channels;
    }
};

}  // namespace spur
