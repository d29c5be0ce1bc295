#include "aqua/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aqua/losses.hpp"

namespace aqua::metrics {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_shapes(const ImageGrid& a, const ImageGrid& b, const Mask& m, const char* what) {
    if (a.height != b.height || a.width != b.width || a.channels != b.channels)
        throw DimensionError(std::string(what) + ": grids differ in shape");
    if (m.height != a.height || m.width != a.width)
        throw DimensionError(std::string(what) + ": mask size mismatch");
}

/// Lower-middle element for even counts; deterministic across platforms.
double lower_median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const size_t k = (v.size() - 1) / 2;
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

}  // namespace

DepthGrid align_for_eval(const DepthGrid& pred, const DepthGrid& gt, const Mask& mask,
                         AlignMode mode) {
    require_shapes(pred, gt, mask, "align_for_eval");
    if (mode == AlignMode::None) return pred;

    if (mode == AlignMode::Lstsq) {
        const losses::Alignment a = losses::align_lstsq(pred, gt, mask);
        DepthGrid out(pred.height, pred.width, 1);
        for (size_t i = 0; i < pred.data.size(); ++i)
            out.data[i] = static_cast<float>(a.s * pred.data[i] + a.t);
        return out;
    }

    // Median scaling.
    std::vector<double> pv, gv;
    for (int y = 0; y < pred.height; ++y)
        for (int x = 0; x < pred.width; ++x)
            if (mask.at(y, x)) {
                pv.push_back(pred.at(y, x));
                gv.push_back(gt.at(y, x));
            }
    if (pv.empty()) throw DegenerateMathError("align_for_eval: empty mask");
    const double mp = lower_median(pv);
    if (mp == 0.0)
        throw DegenerateMathError("align_for_eval: median(pred) is zero under median mode");
    const double s = lower_median(gv) / mp;
    DepthGrid out(pred.height, pred.width, 1);
    for (size_t i = 0; i < pred.data.size(); ++i)
        out.data[i] = static_cast<float>(s * pred.data[i]);
    return out;
}

DepthSums depth_sums(const DepthGrid& pred, const DepthGrid& gt, const Mask& mask) {
    require_shapes(pred, gt, mask, "depth_metrics");

    DepthSums s;
    for (int y = 0; y < pred.height; ++y) {
        for (int x = 0; x < pred.width; ++x) {
            if (!mask.at(y, x)) continue;
            const double d = pred.at(y, x), g = gt.at(y, x);
            if (!(d > 0.0))
                throw ParameterError(
                    "depth_metrics: nonpositive predicted depth breaks log10/ratio metrics");
            if (!(g > 0.0))
                throw ParameterError(
                    "depth_metrics: nonpositive ground-truth depth breaks abs_rel");
            const double diff = d - g;
            s.abs_rel += std::abs(diff) / g;
            s.sq_rel += diff * diff / g;
            s.sq_err += diff * diff;
            s.log10 += std::abs(std::log10(d) - std::log10(g));
            const double ratio = std::max(d / g, g / d);
            if (ratio < 1.25) ++s.d1;
            if (ratio < 1.25 * 1.25) ++s.d2;
            if (ratio < 1.25 * 1.25 * 1.25) ++s.d3;
            ++s.count;
        }
    }
    if (s.count == 0) throw ParameterError("depth_metrics: empty mask");
    return s;
}

DepthMetricRecord record_from_sums(const DepthSums& s) {
    DepthMetricRecord r;
    const double n = static_cast<double>(s.count);
    r.abs_rel = s.abs_rel / n;
    r.sq_rel = s.sq_rel / n;
    r.rmse = std::sqrt(s.sq_err / n);
    r.log10 = s.log10 / n;
    r.delta1 = s.d1 / n;
    r.delta2 = s.d2 / n;
    r.delta3 = s.d3 / n;
    r.pixel_count = s.count;
    return r;
}

DepthMetricRecord depth_metrics(const DepthGrid& pred, const DepthGrid& gt, const Mask& mask) {
    return record_from_sums(depth_sums(pred, gt, mask));
}

NormalSums normal_sums(const NormalGrid& pred, const NormalGrid& gt, const Mask& mask) {
    require_shapes(pred, gt, mask, "normal_metrics");
    if (pred.channels != 3) throw DimensionError("normal_metrics: expected 3 channels");

    NormalSums s;
    for (int y = 0; y < pred.height; ++y) {
        for (int x = 0; x < pred.width; ++x) {
            if (!mask.at(y, x)) continue;
            double np = 0.0, ng = 0.0, dot = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double p = pred.at(y, x, c), g = gt.at(y, x, c);
                np += p * p;
                ng += g * g;
                dot += p * g;
            }
            if (std::abs(std::sqrt(np) - 1.0) > 1e-3 || std::abs(std::sqrt(ng) - 1.0) > 1e-3)
                throw ParameterError("normal_metrics: non-unit vector on mask");
            const double angle =
                std::acos(std::clamp(dot, -1.0, 1.0)) * 180.0 / kPi;
            s.angle_sum += angle;
            s.angle_sq_sum += angle * angle;
            if (angle < 11.25) ++s.a1;
            if (angle < 22.5) ++s.a2;
            if (angle < 30.0) ++s.a3;
            s.angles.push_back(angle);
            ++s.count;
        }
    }
    if (s.count == 0) throw ParameterError("normal_metrics: empty mask");
    return s;
}

NormalMetricRecord record_from_sums(const NormalSums& s) {
    NormalMetricRecord r;
    const double n = static_cast<double>(s.count);
    r.mean_deg = s.angle_sum / n;
    r.median_deg = lower_median(s.angles);
    r.rms_deg = std::sqrt(s.angle_sq_sum / n);
    r.acc_11_25 = s.a1 / n;
    r.acc_22_5 = s.a2 / n;
    r.acc_30 = s.a3 / n;
    r.pixel_count = s.count;
    return r;
}

NormalMetricRecord normal_metrics(const NormalGrid& pred, const NormalGrid& gt,
                                  const Mask& mask) {
    return record_from_sums(normal_sums(pred, gt, mask));
}

DepthMetricRecord aggregate_depth(const std::vector<DepthMetricRecord>& records) {
    DepthMetricRecord agg;
    if (records.empty()) return agg;
    const double n = static_cast<double>(records.size());
    for (const auto& r : records) {
        agg.abs_rel += r.abs_rel / n;
        agg.sq_rel += r.sq_rel / n;
        agg.rmse += r.rmse / n;
        agg.log10 += r.log10 / n;
        agg.delta1 += r.delta1 / n;
        agg.delta2 += r.delta2 / n;
        agg.delta3 += r.delta3 / n;
        agg.pixel_count += r.pixel_count;
    }
    return agg;
}

NormalMetricRecord aggregate_normals(const std::vector<NormalMetricRecord>& records) {
    NormalMetricRecord agg;
    if (records.empty()) return agg;
    const double n = static_cast<double>(records.size());
    for (const auto& r : records) {
        agg.mean_deg += r.mean_deg / n;
        agg.median_deg += r.median_deg / n;
        agg.rms_deg += r.rms_deg / n;
        agg.acc_11_25 += r.acc_11_25 / n;
        agg.acc_22_5 += r.acc_22_5 / n;
        agg.acc_30 += r.acc_30 / n;
        agg.pixel_count += r.pixel_count;
    }
    return agg;
}

DepthMetricRecord aggregate_depth_pooled(const std::vector<DepthSums>& sums) {
    DepthSums total;
    for (const auto& s : sums) {
        total.abs_rel += s.abs_rel;
        total.sq_rel += s.sq_rel;
        total.sq_err += s.sq_err;
        total.log10 += s.log10;
        total.d1 += s.d1;
        total.d2 += s.d2;
        total.d3 += s.d3;
        total.count += s.count;
    }
    if (total.count == 0) throw ParameterError("aggregate_depth_pooled: no pixels");
    return record_from_sums(total);
}

NormalMetricRecord aggregate_normals_pooled(const std::vector<NormalSums>& sums) {
    NormalSums total;
    for (const auto& s : sums) {
        total.angle_sum += s.angle_sum;
        total.angle_sq_sum += s.angle_sq_sum;
        total.a1 += s.a1;
        total.a2 += s.a2;
        total.a3 += s.a3;
        total.count += s.count;
        total.angles.insert(total.angles.end(), s.angles.begin(), s.angles.end());
    }
    if (total.count == 0) throw ParameterError("aggregate_normals_pooled: no pixels");
    return record_from_sums(total);
}

}  // namespace aqua::metrics
