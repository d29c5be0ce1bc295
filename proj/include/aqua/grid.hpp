#pragma once

#include <cstdint>
#include <vector>

#include "aqua/errors.hpp"

namespace aqua {

/// Row-major H x W x C raster of 32-bit floats. The universal container
/// shared by depth maps (1 channel), normal maps (3 channels) and RGB
/// images (3 channels).
struct ImageGrid {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<float> data;

    ImageGrid() = default;
    ImageGrid(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {
        if (h < 0 || w < 0 || (c != 1 && c != 3))
            throw ParameterError("ImageGrid: channels must be 1 or 3");
    }

    size_t size() const { return data.size(); }
    size_t pixels() const { return static_cast<size_t>(height) * width; }

    float& at(int y, int x, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const ImageGrid& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

// Depth/disparity: single-channel, relative and dimensionless.
using DepthGrid = ImageGrid;
// Per-pixel unit vectors (nx, ny, nz).
using NormalGrid = ImageGrid;

/// Boolean validity mask paired with a grid of the same H x W.
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    Mask() = default;
    Mask(int h, int w, bool fill = true)
        : height(h), width(w),
          data(static_cast<size_t>(h) * w, fill ? 1 : 0) {}

    static Mask all_true(int h, int w) { return Mask(h, w, true); }

    bool at(int y, int x) const {
        return data[static_cast<size_t>(y) * width + x] != 0;
    }
    void set(int y, int x, bool v) {
        data[static_cast<size_t>(y) * width + x] = v ? 1 : 0;
    }
    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += v != 0;
        return n;
    }
};

inline void require_single_channel(const ImageGrid& g, const char* what) {
    if (g.channels != 1)
        throw DimensionError(std::string(what) + ": expected single-channel grid");
}

}  // namespace aqua
