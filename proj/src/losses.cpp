#include "aqua/losses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aqua::losses {

namespace {

void require_shapes(const ImageGrid& d, const ImageGrid& gt, const Mask& m, const char* what) {
    if (d.channels != 1 || gt.channels != 1)
        throw DimensionError(std::string(what) + ": expected single-channel grids");
    if (d.height != gt.height || d.width != gt.width)
        throw DimensionError(std::string(what) + ": grids differ in size");
    if (m.height != d.height || m.width != d.width)
        throw DimensionError(std::string(what) + ": mask size mismatch");
}

// Double-precision residual field with validity, the working representation
// for the loss internals and the finite-difference path.
struct Field {
    int h = 0, w = 0;
    std::vector<double> v;
    std::vector<uint8_t> valid;
};

std::vector<double> to_double(const DepthGrid& g) {
    return std::vector<double>(g.data.begin(), g.data.end());
}

Field residual_field(const std::vector<double>& d, const std::vector<double>& gt,
                     const Mask& mask, int h, int w, const Alignment& a) {
    Field r;
    r.h = h;
    r.w = w;
    r.v.assign(static_cast<size_t>(h) * w, 0.0);
    r.valid = mask.data;
    for (size_t i = 0; i < r.v.size(); ++i)
        if (r.valid[i]) r.v[i] = a.s * d[i] + a.t - gt[i];
    return r;
}

/// Pools by `factor`; trailing partial blocks average the covered pixels.
/// A pooled cell is valid iff every covered pixel is valid.
Field pool_field(const Field& f, int factor) {
    if (factor == 1) return f;
    Field out;
    out.h = (f.h + factor - 1) / factor;
    out.w = (f.w + factor - 1) / factor;
    out.v.assign(static_cast<size_t>(out.h) * out.w, 0.0);
    out.valid.assign(out.v.size(), 0);
    for (int oy = 0; oy < out.h; ++oy) {
        for (int ox = 0; ox < out.w; ++ox) {
            const int y0 = oy * factor, y1 = std::min(y0 + factor, f.h);
            const int x0 = ox * factor, x1 = std::min(x0 + factor, f.w);
            double sum = 0.0;
            bool ok = true;
            for (int y = y0; y < y1 && ok; ++y)
                for (int x = x0; x < x1; ++x) {
                    const size_t i = static_cast<size_t>(y) * f.w + x;
                    if (!f.valid[i]) {
                        ok = false;
                        break;
                    }
                    sum += f.v[i];
                }
            const size_t o = static_cast<size_t>(oy) * out.w + ox;
            if (ok) {
                out.valid[o] = 1;
                out.v[o] = sum / ((y1 - y0) * (x1 - x0));
            }
        }
    }
    return out;
}

size_t masked_count(const Mask& mask) {
    const size_t m = mask.count();
    if (m == 0) throw ParameterError("losses: empty mask");
    return m;
}

int check_scale_count(int h, int w, int k) {
    if (k < 1) throw ParameterError("grad_matching_loss: K must be >= 1");
    int max_k = 1;
    while ((1 << max_k) <= std::min(h, w)) ++max_k;  // need 2^(K-1) <= min(H,W)
    if ((1 << (k - 1)) > std::min(h, w)) {
        std::ostringstream msg;
        msg << "grad_matching_loss: grid too small for K=" << k << " levels (max feasible K="
            << max_k << ")";
        throw ParameterError(msg.str());
    }
    return k;
}

double reg_sum(const Field& r, int k_levels) {
    double total = 0.0;
    for (int level = 0; level < k_levels; ++level) {
        const Field f = pool_field(r, 1 << level);
        for (int y = 0; y < f.h; ++y) {
            for (int x = 0; x < f.w; ++x) {
                const size_t i = static_cast<size_t>(y) * f.w + x;
                if (!f.valid[i]) continue;
                if (x + 1 < f.w && f.valid[i + 1]) total += std::abs(f.v[i + 1] - f.v[i]);
                if (y + 1 < f.h && f.valid[i + f.w]) total += std::abs(f.v[i + f.w] - f.v[i]);
            }
        }
    }
    return total;
}

double rho_sum(const Field& r, Rho rho) {
    double total = 0.0;
    for (size_t i = 0; i < r.v.size(); ++i) {
        if (!r.valid[i]) continue;
        total += (rho == Rho::L1) ? std::abs(r.v[i]) : r.v[i] * r.v[i];
    }
    return total;
}

double frozen_total(const std::vector<double>& d, const std::vector<double>& gt,
                    const Mask& mask, int h, int w, Rho rho, int k, double alpha,
                    const Alignment& a, size_t m) {
    const Field r = residual_field(d, gt, mask, h, w, a);
    const double ssi = rho_sum(r, rho) / (2.0 * static_cast<double>(m));
    const double reg = reg_sum(r, k) / static_cast<double>(m);
    return ssi + alpha * reg;
}

/// d(total)/dd with (s,t) frozen, in double.
std::vector<double> analytic_gradient(const std::vector<double>& d,
                                      const std::vector<double>& gt, const Mask& mask, int h,
                                      int w, Rho rho, int k, double alpha, const Alignment& a,
                                      size_t m) {
    const Field r = residual_field(d, gt, mask, h, w, a);
    std::vector<double> grad_r(r.v.size(), 0.0);

    // SSI term: (1/2M) * rho'(r_i).
    const double inv_2m = 1.0 / (2.0 * static_cast<double>(m));
    for (size_t i = 0; i < r.v.size(); ++i) {
        if (!r.valid[i]) continue;
        if (rho == Rho::L1)
            grad_r[i] += inv_2m * (r.v[i] > 0.0 ? 1.0 : (r.v[i] < 0.0 ? -1.0 : 0.0));
        else
            grad_r[i] += inv_2m * 2.0 * r.v[i];
    }

    // Gradient-matching term, back-propagated through the forward
    // differences and the average pooling of each scale.
    const double reg_w = alpha / static_cast<double>(m);
    for (int level = 0; level < k; ++level) {
        const int factor = 1 << level;
        const Field f = pool_field(r, factor);
        std::vector<double> gpool(f.v.size(), 0.0);
        for (int y = 0; y < f.h; ++y) {
            for (int x = 0; x < f.w; ++x) {
                const size_t i = static_cast<size_t>(y) * f.w + x;
                if (!f.valid[i]) continue;
                if (x + 1 < f.w && f.valid[i + 1]) {
                    const double sg = (f.v[i + 1] > f.v[i]) ? 1.0
                                      : (f.v[i + 1] < f.v[i]) ? -1.0
                                                              : 0.0;
                    gpool[i + 1] += reg_w * sg;
                    gpool[i] -= reg_w * sg;
                }
                if (y + 1 < f.h && f.valid[i + f.w]) {
                    const double sg = (f.v[i + f.w] > f.v[i]) ? 1.0
                                      : (f.v[i + f.w] < f.v[i]) ? -1.0
                                                                : 0.0;
                    gpool[i + f.w] += reg_w * sg;
                    gpool[i] -= reg_w * sg;
                }
            }
        }
        // Distribute each pooled-cell gradient equally over its block.
        for (int oy = 0; oy < f.h; ++oy) {
            for (int ox = 0; ox < f.w; ++ox) {
                const size_t o = static_cast<size_t>(oy) * f.w + ox;
                if (!f.valid[o] || gpool[o] == 0.0) continue;
                const int y0 = oy * factor, y1 = std::min(y0 + factor, h);
                const int x0 = ox * factor, x1 = std::min(x0 + factor, w);
                const double share = gpool[o] / ((y1 - y0) * (x1 - x0));
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        grad_r[static_cast<size_t>(y) * w + x] += share;
            }
        }
    }

    // Chain rule through r_i = s*d_i + t - gt_i.
    std::vector<double> grad(grad_r.size(), 0.0);
    for (size_t i = 0; i < grad.size(); ++i)
        if (mask.data[i]) grad[i] = a.s * grad_r[i];
    return grad;
}

}  // namespace

Alignment align_lstsq(const DepthGrid& d, const DepthGrid& gt, const Mask& mask) {
    require_shapes(d, gt, mask, "align_lstsq");
    double sd = 0.0, sg = 0.0, sdd = 0.0, sdg = 0.0;
    size_t m = 0;
    for (size_t i = 0; i < d.data.size(); ++i) {
        if (!mask.data[i]) continue;
        const double dv = d.data[i], gv = gt.data[i];
        sd += dv;
        sg += gv;
        sdd += dv * dv;
        sdg += dv * gv;
        ++m;
    }
    if (m < 2) throw DegenerateMathError("align_lstsq: fewer than 2 masked pixels");
    const double n = static_cast<double>(m);
    const double denom = n * sdd - sd * sd;
    if (std::abs(denom) <= 1e-12 * std::max(1.0, n * sdd))
        throw DegenerateMathError("align_lstsq: prediction is constant on the mask");
    Alignment a;
    a.s = (n * sdg - sd * sg) / denom;
    a.t = (sg - a.s * sd) / n;
    return a;
}

double ssi_loss_frozen(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, Rho rho,
                       const Alignment& a) {
    require_shapes(d, gt, mask, "ssi_loss");
    const size_t m = masked_count(mask);
    const Field r = residual_field(to_double(d), to_double(gt), mask, d.height, d.width, a);
    return rho_sum(r, rho) / (2.0 * static_cast<double>(m));
}

double ssi_loss(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, Rho rho) {
    return ssi_loss_frozen(d, gt, mask, rho, align_lstsq(d, gt, mask));
}

double grad_matching_loss_frozen(const DepthGrid& d, const DepthGrid& gt, const Mask& mask,
                                 int k, const Alignment& a) {
    require_shapes(d, gt, mask, "grad_matching_loss");
    check_scale_count(d.height, d.width, k);
    const size_t m = masked_count(mask);
    const Field r = residual_field(to_double(d), to_double(gt), mask, d.height, d.width, a);
    return reg_sum(r, k) / static_cast<double>(m);
}

double grad_matching_loss(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, int k) {
    return grad_matching_loss_frozen(d, gt, mask, k, align_lstsq(d, gt, mask));
}

LossReport total_loss(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, Rho rho,
                      int k, double alpha) {
    LossReport report;
    report.alignment = align_lstsq(d, gt, mask);
    report.k = k;
    report.alpha = alpha;
    report.ssi = ssi_loss_frozen(d, gt, mask, rho, report.alignment);
    report.reg = grad_matching_loss_frozen(d, gt, mask, k, report.alignment);
    report.total = report.ssi + alpha * report.reg;
    return report;
}

ImageGrid loss_gradient(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, Rho rho,
                        int k, double alpha, const Alignment& frozen) {
    require_shapes(d, gt, mask, "loss_gradient");
    check_scale_count(d.height, d.width, k);
    const size_t m = masked_count(mask);
    const std::vector<double> dv = to_double(d), gv = to_double(gt);

    if (rho == Rho::L1) {
        std::ostringstream offenders;
        int bad = 0;
        for (size_t i = 0; i < dv.size(); ++i) {
            if (!mask.data[i]) continue;
            const double r = frozen.s * dv[i] + frozen.t - gv[i];
            if (std::abs(r) < 1e-6) {
                if (bad < 8) offenders << (bad ? ", " : "") << "(" << i / d.width << ","
                                       << i % d.width << ")";
                ++bad;
            }
        }
        if (bad > 0)
            throw DegenerateMathError("loss_gradient: L1 residual at the kink at " +
                                      std::to_string(bad) + " pixel(s): " + offenders.str());
    }

    const std::vector<double> g =
        analytic_gradient(dv, gv, mask, d.height, d.width, rho, k, alpha, frozen, m);
    ImageGrid out(d.height, d.width, 1);
    for (size_t i = 0; i < g.size(); ++i) out.data[i] = static_cast<float>(g[i]);
    return out;
}

double fd_check(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, Rho rho, int k,
                double alpha) {
    require_shapes(d, gt, mask, "fd_check");
    check_scale_count(d.height, d.width, k);
    const size_t m = masked_count(mask);
    const Alignment a = align_lstsq(d, gt, mask);
    const int h = d.height, w = d.width;
    std::vector<double> dv = to_double(d);
    const std::vector<double> gv = to_double(gt);

    const std::vector<double> analytic =
        analytic_gradient(dv, gv, mask, h, w, rho, k, alpha, a, m);

    constexpr double step = 1e-4;
    const double kink_band = 10.0 * step * std::max(1.0, std::abs(a.s));

    // Mark pixels whose FD stencil straddles an absolute-value kink: an L1
    // residual near zero, or a pooled forward difference near zero in any
    // scale touched by the pixel's pooling cell.
    std::vector<uint8_t> skip(dv.size(), 0);
    const Field r0 = residual_field(dv, gv, mask, h, w, a);
    if (rho == Rho::L1) {
        for (size_t i = 0; i < dv.size(); ++i)
            if (mask.data[i] && std::abs(r0.v[i]) < kink_band) skip[i] = 1;
    }
    for (int level = 0; level < k; ++level) {
        const int factor = 1 << level;
        const Field f = pool_field(r0, factor);
        for (int y = 0; y < f.h; ++y) {
            for (int x = 0; x < f.w; ++x) {
                const size_t i = static_cast<size_t>(y) * f.w + x;
                if (!f.valid[i]) continue;
                const bool near_x =
                    x + 1 < f.w && f.valid[i + 1] && std::abs(f.v[i + 1] - f.v[i]) < kink_band;
                const bool near_y = y + 1 < f.h && f.valid[i + f.w] &&
                                    std::abs(f.v[i + f.w] - f.v[i]) < kink_band;
                if (!near_x && !near_y) continue;
                // Flag every full-res pixel feeding either cell of the pair.
                auto flag_cell = [&](int cy, int cx) {
                    const int y0 = cy * factor, y1 = std::min(y0 + factor, h);
                    const int x0 = cx * factor, x1 = std::min(x0 + factor, w);
                    for (int yy = y0; yy < y1; ++yy)
                        for (int xx = x0; xx < x1; ++xx)
                            skip[static_cast<size_t>(yy) * w + xx] = 1;
                };
                flag_cell(y, x);
                if (near_x) flag_cell(y, x + 1);
                if (near_y) flag_cell(y + 1, x);
            }
        }
    }

    double max_rel = 0.0;
    for (size_t i = 0; i < dv.size(); ++i) {
        if (!mask.data[i] || skip[i]) continue;
        const double saved = dv[i];
        dv[i] = saved + step;
        const double lp = frozen_total(dv, gv, mask, h, w, rho, k, alpha, a, m);
        dv[i] = saved - step;
        const double lm = frozen_total(dv, gv, mask, h, w, rho, k, alpha, a, m);
        dv[i] = saved;
        const double fd = (lp - lm) / (2.0 * step);
        const double denom = std::max(std::abs(fd), std::abs(analytic[i]));
        if (denom < 1e-8) continue;  // both effectively zero
        max_rel = std::max(max_rel, std::abs(fd - analytic[i]) / denom);
    }
    return max_rel;
}

double mean_total(const std::vector<LossReport>& reports) {
    if (reports.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : reports) sum += r.total;
    return sum / static_cast<double>(reports.size());
}

}  // namespace aqua::losses
