#include "aqua/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aqua {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

SobelResult sobel_gradients(const ImageGrid& g) {
    require_single_channel(g, "sobel_gradients");
    if (g.height < 3 || g.width < 3)
        throw DimensionError("sobel_gradients: grid must be at least 3x3");

    const int h = g.height, w = g.width;
    SobelResult r{ImageGrid(h, w, 1), ImageGrid(h, w, 1), ImageGrid(h, w, 1)};

    // Kernels scaled by 1/8; y axis points down.
    static const double kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static const double ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sx = 0.0, sy = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const double v = g.at(clampi(y + dy, 0, h - 1), clampi(x + dx, 0, w - 1));
                    sx += kx[dy + 1][dx + 1] * v;
                    sy += ky[dy + 1][dx + 1] * v;
                }
            }
            const float fx = static_cast<float>(sx / 8.0);
            const float fy = static_cast<float>(sy / 8.0);
            r.gx.at(y, x) = fx;
            r.gy.at(y, x) = fy;
            r.magnitude.at(y, x) = std::sqrt(fx * fx + fy * fy);
        }
    }
    return r;
}

DepthGrid minmax_normalize(const DepthGrid& d) {
    require_single_channel(d, "minmax_normalize");
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (float v : d.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    DepthGrid out(d.height, d.width, 1);
    if (d.data.empty() || hi == lo) return out;  // constant map -> zeros
    const float range = hi - lo;
    for (size_t i = 0; i < d.data.size(); ++i)
        out.data[i] = (d.data[i] - lo) / range;
    return out;
}

ImageGrid avg_pool(const ImageGrid& g, int factor) {
    if (factor < 1) throw ParameterError("avg_pool: factor must be >= 1");
    if (factor == 1) return g;

    const int oh = (g.height + factor - 1) / factor;
    const int ow = (g.width + factor - 1) / factor;
    ImageGrid out(oh, ow, g.channels);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const int y0 = oy * factor, y1 = std::min(y0 + factor, g.height);
            const int x0 = ox * factor, x1 = std::min(x0 + factor, g.width);
            for (int c = 0; c < g.channels; ++c) {
                double sum = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) sum += g.at(y, x, c);
                out.at(oy, ox, c) =
                    static_cast<float>(sum / ((y1 - y0) * (x1 - x0)));
            }
        }
    }
    return out;
}

ImageGrid box_local_variance(const DepthGrid& d, int window) {
    require_single_channel(d, "box_local_variance");
    if (window < 3 || window % 2 == 0)
        throw ParameterError("box_local_variance: window must be odd and >= 3");

    const int h = d.height, w = d.width, r = window / 2;

    // Separable box means of x and x^2 over the replicate-padded grid.
    auto box_mean = [&](auto value_of) {
        std::vector<double> row(static_cast<size_t>(h) * w);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                for (int dx = -r; dx <= r; ++dx) s += value_of(y, clampi(x + dx, 0, w - 1));
                row[static_cast<size_t>(y) * w + x] = s / window;
            }
        }
        std::vector<double> out(static_cast<size_t>(h) * w);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                for (int dy = -r; dy <= r; ++dy)
                    s += row[static_cast<size_t>(clampi(y + dy, 0, h - 1)) * w + x];
                out[static_cast<size_t>(y) * w + x] = s / window;
            }
        }
        return out;
    };

    auto mean = box_mean([&](int y, int x) { return static_cast<double>(d.at(y, x)); });
    auto mean_sq = box_mean([&](int y, int x) {
        const double v = d.at(y, x);
        return v * v;
    });

    ImageGrid out(h, w, 1);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = static_cast<float>(std::max(0.0, mean_sq[i] - mean[i] * mean[i]));
    return out;
}

Mask edge_mask(const ImageGrid& magnitude, double percentile) {
    require_single_channel(magnitude, "edge_mask");
    if (!(percentile > 0.0 && percentile < 100.0))
        throw ParameterError("edge_mask: percentile must be in (0, 100)");

    Mask mask(magnitude.height, magnitude.width, false);
    const size_t n = magnitude.data.size();
    if (n == 0) return mask;

    float maxv = 0.0f;
    for (float v : magnitude.data) maxv = std::max(maxv, v);
    if (maxv == 0.0f) return mask;  // no gradient anywhere

    const size_t idx = static_cast<size_t>(percentile / 100.0 * static_cast<double>(n));
    float threshold;
    if (idx == 0) {
        threshold = -1.0f;  // below any nonnegative magnitude
    } else {
        std::vector<float> sorted(magnitude.data);
        std::sort(sorted.begin(), sorted.end());
        threshold = sorted[std::min(idx, n) - 1];
    }
    for (size_t i = 0; i < n; ++i)
        if (magnitude.data[i] > threshold) mask.data[i] = 1;
    return mask;
}

NormalGrid decode_normals(const std::vector<uint8_t>& rgb8, int height, int width) {
    if (rgb8.size() != static_cast<size_t>(height) * width * 3)
        throw FormatError("decode_normals: buffer is not H*W*3 bytes");

    NormalGrid out(height, width, 3);
    for (size_t p = 0; p < static_cast<size_t>(height) * width; ++p) {
        const uint8_t r = rgb8[p * 3], g = rgb8[p * 3 + 1], b = rgb8[p * 3 + 2];
        if (r == 0 && g == 0 && b == 0) {
            out.data[p * 3 + 0] = 0.0f;
            out.data[p * 3 + 1] = 0.0f;
            out.data[p * 3 + 2] = 1.0f;
            continue;
        }
        const double vx = r / 255.0 * 2.0 - 1.0;
        const double vy = g / 255.0 * 2.0 - 1.0;
        const double vz = b / 255.0 * 2.0 - 1.0;
        const double norm = std::sqrt(vx * vx + vy * vy + vz * vz);
        if (norm < 1e-7) {
            out.data[p * 3 + 0] = 0.0f;
            out.data[p * 3 + 1] = 0.0f;
            out.data[p * 3 + 2] = 1.0f;
        } else {
            out.data[p * 3 + 0] = static_cast<float>(vx / norm);
            out.data[p * 3 + 1] = static_cast<float>(vy / norm);
            out.data[p * 3 + 2] = static_cast<float>(vz / norm);
        }
    }
    return out;
}

ImageGrid luminance(const ImageGrid& rgb) {
    if (rgb.channels == 1) return rgb;
    ImageGrid out(rgb.height, rgb.width, 1);
    for (size_t p = 0; p < rgb.pixels(); ++p) {
        out.data[p] = static_cast<float>(0.299 * rgb.data[p * 3] +
                                         0.587 * rgb.data[p * 3 + 1] +
                                         0.114 * rgb.data[p * 3 + 2]);
    }
    return out;
}

bool all_finite(const ImageGrid& g) {
    for (float v : g.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace aqua
