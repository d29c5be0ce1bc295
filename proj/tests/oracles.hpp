#pragma once

// Independent straight-line reimplementations used as oracles. These mirror
// the documented definitions with naive loops and share no code with the
// library implementation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "aqua/grid.hpp"

namespace oracle {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

struct SobelOracle {
    std::vector<float> gx, gy, mag;
};

/// Naive O(HW*9) convolution with the scaled 3x3 Sobel kernels and
/// replicate padding.
inline SobelOracle naive_sobel(const aqua::ImageGrid& g) {
    const int h = g.height, w = g.width;
    static const int KX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static const int KY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    SobelOracle out;
    out.gx.resize(static_cast<size_t>(h) * w);
    out.gy.resize(out.gx.size());
    out.mag.resize(out.gx.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sx = 0.0, sy = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const double v = g.at(clampi(y + dy, 0, h - 1), clampi(x + dx, 0, w - 1));
                    sx += KX[dy + 1][dx + 1] * v;
                    sy += KY[dy + 1][dx + 1] * v;
                }
            }
            const float fx = static_cast<float>(sx / 8.0);
            const float fy = static_cast<float>(sy / 8.0);
            out.gx[static_cast<size_t>(y) * w + x] = fx;
            out.gy[static_cast<size_t>(y) * w + x] = fy;
            out.mag[static_cast<size_t>(y) * w + x] = std::sqrt(fx * fx + fy * fy);
        }
    }
    return out;
}

/// Sort-and-threshold binarization: idx = floor(p/100 * n); true where
/// value > sorted[idx-1], everything true when idx == 0, everything false
/// when the maximum is zero.
inline std::vector<uint8_t> naive_edge_mask(const std::vector<float>& mag, double percentile) {
    const size_t n = mag.size();
    std::vector<uint8_t> mask(n, 0);
    float maxv = 0.0f;
    for (float v : mag) maxv = std::max(maxv, v);
    if (maxv == 0.0f) return mask;
    const size_t idx = static_cast<size_t>(percentile / 100.0 * static_cast<double>(n));
    float threshold = -1.0f;
    if (idx > 0) {
        std::vector<float> sorted(mag);
        std::sort(sorted.begin(), sorted.end());
        threshold = sorted[std::min(idx, n) - 1];
    }
    for (size_t i = 0; i < n; ++i) mask[i] = mag[i] > threshold;
    return mask;
}

/// Direct per-window variance with replicate padding (clamped indices).
inline std::vector<double> naive_box_variance(const aqua::ImageGrid& d, int window) {
    const int h = d.height, w = d.width, r = window / 2;
    std::vector<double> out(static_cast<size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    sum += d.at(clampi(y + dy, 0, h - 1), clampi(x + dx, 0, w - 1));
            const double mean = sum / (static_cast<double>(window) * window);
            double var = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double v =
                        d.at(clampi(y + dy, 0, h - 1), clampi(x + dx, 0, w - 1)) - mean;
                    var += v * v;
                }
            out[static_cast<size_t>(y) * w + x] = var / (static_cast<double>(window) * window);
        }
    }
    return out;
}

inline aqua::ImageGrid naive_luminance(const aqua::ImageGrid& rgb) {
    aqua::ImageGrid out(rgb.height, rgb.width, 1);
    for (size_t p = 0; p < rgb.pixels(); ++p)
        out.data[p] = static_cast<float>(0.299 * rgb.data[p * 3] + 0.587 * rgb.data[p * 3 + 1] +
                                         0.114 * rgb.data[p * 3 + 2]);
    return out;
}

inline aqua::ImageGrid naive_minmax_normalize(const aqua::ImageGrid& d) {
    float lo = d.data[0], hi = d.data[0];
    for (float v : d.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    aqua::ImageGrid out(d.height, d.width, 1);
    if (hi == lo) return out;
    for (size_t i = 0; i < d.data.size(); ++i) out.data[i] = (d.data[i] - lo) / (hi - lo);
    return out;
}

struct DepthQualityOracle {
    double edge_consistency, local_variance, complexity, sharpness;
};

struct NormalQualityOracle {
    double edge_consistency, orientation_variance, sharpness;
};

inline double edge_overlap(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& rgb) {
    size_t both = 0, total = 0;
    for (size_t i = 0; i < rgb.size(); ++i) {
        if (rgb[i]) {
            ++total;
            if (pred[i]) ++both;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(total);
}

inline DepthQualityOracle depth_quality_oracle(const aqua::ImageGrid& d,
                                               const aqua::ImageGrid& rgb) {
    const aqua::ImageGrid dn = naive_minmax_normalize(d);
    const SobelOracle dg = naive_sobel(dn);
    const SobelOracle ig = naive_sobel(naive_luminance(rgb));
    DepthQualityOracle q{};
    q.edge_consistency =
        edge_overlap(naive_edge_mask(dg.mag, 90.0), naive_edge_mask(ig.mag, 90.0));
    const auto var = naive_box_variance(dn, 11);
    double vsum = 0.0, csum = 0.0, smax = 0.0;
    for (size_t i = 0; i < var.size(); ++i) {
        vsum += var[i];
        csum += dg.mag[i];
        smax = std::max(smax, static_cast<double>(dg.mag[i]));
    }
    const double n = static_cast<double>(dn.pixels());
    q.local_variance = vsum / n;
    q.complexity = csum / n;
    q.sharpness = smax;
    return q;
}

inline NormalQualityOracle normal_quality_oracle(const aqua::NormalGrid& ng,
                                                 const aqua::ImageGrid& rgb) {
    const int h = ng.height, w = ng.width;
    std::vector<float> edge(static_cast<size_t>(h) * w, 0.0f);
    for (int c = 0; c < 3; ++c) {
        aqua::ImageGrid chan(h, w, 1);
        for (size_t p = 0; p < ng.pixels(); ++p) chan.data[p] = ng.data[p * 3 + c];
        const SobelOracle sg = naive_sobel(chan);
        for (size_t p = 0; p < edge.size(); ++p) edge[p] += sg.mag[p];
    }
    const SobelOracle ig = naive_sobel(naive_luminance(rgb));
    NormalQualityOracle q{};
    q.edge_consistency =
        edge_overlap(naive_edge_mask(edge, 90.0), naive_edge_mask(ig.mag, 90.0));
    double mx = 0.0, my = 0.0, mz = 0.0;
    const double n = static_cast<double>(ng.pixels());
    for (size_t p = 0; p < ng.pixels(); ++p) {
        mx += ng.data[p * 3];
        my += ng.data[p * 3 + 1];
        mz += ng.data[p * 3 + 2];
    }
    mx /= n;
    my /= n;
    mz /= n;
    double vo = 0.0;
    for (size_t p = 0; p < ng.pixels(); ++p)
        vo += 1.0 - (ng.data[p * 3] * mx + ng.data[p * 3 + 1] * my + ng.data[p * 3 + 2] * mz);
    q.orientation_variance = vo / n;
    double smax = 0.0;
    for (float v : edge) smax = std::max(smax, static_cast<double>(v));
    q.sharpness = smax;
    return q;
}

/// Weighted argmax over (depth, normal) metric pairs with the default weights.
inline size_t best_pair_oracle(const std::vector<DepthQualityOracle>& dq,
                               const std::vector<NormalQualityOracle>& nq) {
    size_t best = 0;
    double best_score = -1e300;
    for (size_t i = 0; i < dq.size(); ++i) {
        const double ds = 0.3 * dq[i].edge_consistency - 0.2 * dq[i].local_variance +
                          0.2 * dq[i].complexity + 0.3 * dq[i].sharpness;
        const double ns = 0.4 * nq[i].edge_consistency + 0.4 * nq[i].orientation_variance +
                          0.2 * nq[i].sharpness;
        if (ds + ns > best_score) {
            best_score = ds + ns;
            best = i;
        }
    }
    return best;
}

/// Alignment oracle: dense (s,t) grid scan followed by exact coordinate
/// descent (each coordinate update is the 1-D least-squares minimizer).
struct AlignOracle {
    double s, t, residual;
};

inline AlignOracle align_grid_search(const aqua::ImageGrid& d, const aqua::ImageGrid& gt,
                                     const aqua::Mask& mask) {
    std::vector<double> dv, gv;
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x)
            if (mask.at(y, x)) {
                dv.push_back(d.at(y, x));
                gv.push_back(gt.at(y, x));
            }
    auto residual = [&](double s, double t) {
        double r = 0.0;
        for (size_t i = 0; i < dv.size(); ++i) {
            const double e = s * dv[i] + t - gv[i];
            r += e * e;
        }
        return r;
    };
    double best_s = 0.0, best_t = 0.0, best_r = residual(0.0, 0.0);
    for (double s = -8.0; s <= 8.0; s += 0.25) {
        for (double t = -8.0; t <= 8.0; t += 0.25) {
            const double r = residual(s, t);
            if (r < best_r) {
                best_r = r;
                best_s = s;
                best_t = t;
            }
        }
    }
    for (int it = 0; it < 200; ++it) {
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < dv.size(); ++i) {
            num += dv[i] * (gv[i] - best_t);
            den += dv[i] * dv[i];
        }
        if (den > 0.0) best_s = num / den;
        double tsum = 0.0;
        for (size_t i = 0; i < dv.size(); ++i) tsum += gv[i] - best_s * dv[i];
        best_t = tsum / static_cast<double>(dv.size());
    }
    return AlignOracle{best_s, best_t, residual(best_s, best_t)};
}

/// Multi-scale gradient-matching oracle with its own pooling loops.
inline double grad_matching_oracle(const aqua::ImageGrid& d, const aqua::ImageGrid& gt,
                                   const aqua::Mask& mask, int k_levels, double s, double t) {
    const int h = d.height, w = d.width;
    std::vector<double> res(static_cast<size_t>(h) * w, 0.0);
    std::vector<uint8_t> valid = mask.data;
    size_t m = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (valid[i]) {
                res[i] = s * d.at(y, x) + t - gt.at(y, x);
                ++m;
            }
        }

    double total = 0.0;
    for (int level = 0; level < k_levels; ++level) {
        const int factor = 1 << level;
        const int ph = (h + factor - 1) / factor, pw = (w + factor - 1) / factor;
        std::vector<double> pooled(static_cast<size_t>(ph) * pw, 0.0);
        std::vector<uint8_t> pvalid(pooled.size(), 0);
        for (int py = 0; py < ph; ++py) {
            for (int px = 0; px < pw; ++px) {
                double sum = 0.0;
                int count = 0;
                bool ok = true;
                for (int y = py * factor; y < std::min((py + 1) * factor, h); ++y)
                    for (int x = px * factor; x < std::min((px + 1) * factor, w); ++x) {
                        const size_t i = static_cast<size_t>(y) * w + x;
                        if (!valid[i]) ok = false;
                        sum += res[i];
                        ++count;
                    }
                if (ok) {
                    pooled[static_cast<size_t>(py) * pw + px] = sum / count;
                    pvalid[static_cast<size_t>(py) * pw + px] = 1;
                }
            }
        }
        for (int py = 0; py < ph; ++py)
            for (int px = 0; px < pw; ++px) {
                const size_t i = static_cast<size_t>(py) * pw + px;
                if (!pvalid[i]) continue;
                if (px + 1 < pw && pvalid[i + 1]) total += std::abs(pooled[i + 1] - pooled[i]);
                if (py + 1 < ph && pvalid[i + pw]) total += std::abs(pooled[i + pw] - pooled[i]);
            }
    }
    return total / static_cast<double>(m);
}

}  // namespace oracle
