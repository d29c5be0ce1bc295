#pragma once

#include <vector>

#include "aqua/grid.hpp"

namespace aqua::losses {

/// Affine alignment pred -> gt: argmin over (s,t) of sum_mask (s*d + t - gt)^2.
struct Alignment {
    double s = 1.0;
    double t = 0.0;
};

enum class Rho { L1, L2 };

struct LossReport {
    double ssi = 0.0;
    double reg = 0.0;
    double total = 0.0;
    Alignment alignment;
    int k = 4;
    double alpha = 0.5;
};

/// Closed-form 2x2 normal equations over masked pixels. Throws
/// DegenerateMathError when the masked prediction is constant (singular
/// system) or fewer than 2 pixels are valid.
Alignment align_lstsq(const DepthGrid& d, const DepthGrid& gt, const Mask& mask);

/// (1/2M) sum rho(s*d_i + t - gt_i) after least-squares alignment.
double ssi_loss(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, Rho rho = Rho::L1);
double ssi_loss_frozen(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, Rho rho,
                       const Alignment& a);

/// Multi-scale gradient matching of the aligned residual R = s*d + t - gt:
/// for k = 1..K the residual is average-pooled by 2^(k-1) and masked
/// forward differences |dx| + |dy| are summed, normalized by the
/// full-resolution valid count. A pooled cell is valid iff all covered
/// pixels are valid.
double grad_matching_loss(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, int k = 4);
double grad_matching_loss_frozen(const DepthGrid& d, const DepthGrid& gt, const Mask& mask,
                                 int k, const Alignment& a);

/// ssi + alpha * reg with a single shared alignment.
LossReport total_loss(const DepthGrid& d, const DepthGrid& gt, const Mask& mask,
                      Rho rho = Rho::L1, int k = 4, double alpha = 0.5);

/// Analytic d(total)/dd with (s,t) held constant. Under rho = L1, throws if
/// any masked residual is within 1e-6 of zero (the gradient is undefined at
/// the kink); the message lists the offending pixels.
ImageGrid loss_gradient(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, Rho rho,
                        int k, double alpha, const Alignment& frozen);

/// Central finite differences (h = 1e-4) of the frozen-alignment loss
/// against the analytic gradient; returns the max relative error over
/// masked pixels. Pixels whose perturbation stencil straddles an
/// absolute-value kink are skipped (the FD quotient is meaningless there),
/// as are pixels where both gradients are below 1e-8 in magnitude.
double fd_check(const DepthGrid& d, const DepthGrid& gt, const Mask& mask, Rho rho = Rho::L1,
                int k = 4, double alpha = 0.5);

/// Batch loss: mean of per-image totals.
double mean_total(const std::vector<LossReport>& reports);

}  // namespace aqua::losses
