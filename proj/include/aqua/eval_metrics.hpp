#pragma once

#include <cstdint>
#include <vector>

#include "aqua/grid.hpp"

namespace aqua::metrics {

struct DepthMetricRecord {
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double rmse = 0.0;
    double log10 = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    size_t pixel_count = 0;
};

struct NormalMetricRecord {
    double mean_deg = 0.0;
    double median_deg = 0.0;
    double rms_deg = 0.0;
    double acc_11_25 = 0.0;
    double acc_22_5 = 0.0;
    double acc_30 = 0.0;
    size_t pixel_count = 0;
};

enum class AlignMode { None, Lstsq, Median };

/// none -> identity; lstsq -> affine fit of pred to gt over the mask;
/// median -> scale by median(gt)/median(pred). The median over an even
/// count is the lower-middle element.
DepthGrid align_for_eval(const DepthGrid& pred, const DepthGrid& gt, const Mask& mask,
                         AlignMode mode);

/// The five standard depth statistics plus the three delta accuracies at
/// thresholds (1.25, 1.25^2, 1.25^3) over masked pixels. Both grids must be
/// strictly positive on the mask.
DepthMetricRecord depth_metrics(const DepthGrid& pred, const DepthGrid& gt, const Mask& mask);

/// Angular error statistics in degrees plus accuracies at 11.25/22.5/30
/// degrees. Dot products are clamped to [-1,1] before arccos. Vectors must
/// be unit within 1e-3 on the mask.
NormalMetricRecord normal_metrics(const NormalGrid& pred, const NormalGrid& gt, const Mask& mask);

/// Dataset aggregation, per-image mode: each record field averaged
/// uniformly over images.
DepthMetricRecord aggregate_depth(const std::vector<DepthMetricRecord>& records);
NormalMetricRecord aggregate_normals(const std::vector<NormalMetricRecord>& records);

/// Per-image sums kept so pixel-pooled aggregation is exact (equals one
/// concatenated image); also the building block of the per-image records.
struct DepthSums {
    double abs_rel = 0.0, sq_rel = 0.0, sq_err = 0.0, log10 = 0.0;
    size_t d1 = 0, d2 = 0, d3 = 0, count = 0;
};
DepthSums depth_sums(const DepthGrid& pred, const DepthGrid& gt, const Mask& mask);

struct NormalSums {
    double angle_sum = 0.0, angle_sq_sum = 0.0;
    size_t a1 = 0, a2 = 0, a3 = 0, count = 0;
    std::vector<double> angles;  // for pooled medians
};
NormalSums normal_sums(const NormalGrid& pred, const NormalGrid& gt, const Mask& mask);

DepthMetricRecord record_from_sums(const DepthSums& s);
NormalMetricRecord record_from_sums(const NormalSums& s);

/// Dataset aggregation, pixel-pooled mode.
DepthMetricRecord aggregate_depth_pooled(const std::vector<DepthSums>& sums);
NormalMetricRecord aggregate_normals_pooled(const std::vector<NormalSums>& sums);

}  // namespace aqua::metrics
