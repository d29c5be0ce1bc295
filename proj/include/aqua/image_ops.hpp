#pragma once

#include "aqua/grid.hpp"

namespace aqua {

struct SobelResult {
    ImageGrid gx;
    ImageGrid gy;
    ImageGrid magnitude;
};

/// 3x3 Sobel responses scaled by 1/8 so a unit-slope ramp yields gradient 1.
/// Borders use replicate padding. Requires H,W >= 3.
SobelResult sobel_gradients(const ImageGrid& g);

/// (d - min) / (max - min), mapping into [0,1]. A constant grid maps to all
/// zeros (any constant is information-free).
DepthGrid minmax_normalize(const DepthGrid& d);

/// Block mean over factor x factor cells; trailing partial blocks average
/// only the covered pixels. factor == 1 is the identity.
ImageGrid avg_pool(const ImageGrid& g, int factor);

/// Per-pixel variance over a centered window x window neighborhood with
/// replicate padding, via box-filtered E[x^2] - E[x]^2 clamped at 0.
/// window must be odd and >= 3.
ImageGrid box_local_variance(const DepthGrid& d, int window);

/// Binarize a nonnegative gradient-magnitude grid at a percentile-rank
/// threshold: with n values sorted ascending and idx = floor(p/100 * n),
/// mask is true where magnitude > sorted[idx-1] (all true when idx == 0).
/// An all-zero magnitude grid yields an all-false mask.
Mask edge_mask(const ImageGrid& magnitude, double percentile);

/// Maps 8-bit RGB-encoded normals (v/255*2 - 1 per channel) to unit
/// vectors. A black pixel (0,0,0) is the missing-normal marker and decodes
/// to the camera-facing default (0,0,1).
NormalGrid decode_normals(const std::vector<uint8_t>& rgb8, int height, int width);

/// 0.299 R + 0.587 G + 0.114 B. Single-channel input passes through.
ImageGrid luminance(const ImageGrid& rgb);

/// True iff every value is finite.
bool all_finite(const ImageGrid& g);

}  // namespace aqua
