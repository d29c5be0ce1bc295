#include <doctest.h>

#include <cmath>

#include "aqua/eval_metrics.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace aqua;
using namespace aqua::metrics;

namespace {

DepthGrid positive_grid(testutil::Rng& rng, int h, int w, double lo = 0.5, double hi = 5.0) {
    return testutil::random_grid(rng, h, w, 1, lo, hi);
}

}  // namespace

TEST_CASE("align_for_eval: none is the identity") {
    testutil::Rng rng(41);
    const DepthGrid pred = positive_grid(rng, 8, 8);
    const DepthGrid gt = positive_grid(rng, 8, 8);
    const DepthGrid out = align_for_eval(pred, gt, Mask::all_true(8, 8), AlignMode::None);
    CHECK(out.data == pred.data);
}

TEST_CASE("align_for_eval: median mode recovers an exact ratio") {
    testutil::Rng rng(42);
    const DepthGrid gt = positive_grid(rng, 8, 8);
    DepthGrid pred = gt;
    for (auto& v : pred.data) v *= 0.5f;
    const DepthGrid out = align_for_eval(pred, gt, Mask::all_true(8, 8), AlignMode::Median);
    for (size_t i = 0; i < gt.data.size(); ++i)
        CHECK(out.data[i] == doctest::Approx(gt.data[i]).epsilon(1e-6));

    DepthGrid zeros(8, 8, 1, 0.0f);
    CHECK_THROWS_AS(align_for_eval(zeros, gt, Mask::all_true(8, 8), AlignMode::Median),
                    DegenerateMathError);
}

TEST_CASE("align_for_eval: lstsq inverts an affine distortion") {
    testutil::Rng rng(43);
    const DepthGrid gt = positive_grid(rng, 8, 8);
    DepthGrid pred(8, 8, 1);
    for (size_t i = 0; i < gt.data.size(); ++i) pred.data[i] = 2.0f * gt.data[i] + 1.0f;
    const DepthGrid out = align_for_eval(pred, gt, Mask::all_true(8, 8), AlignMode::Lstsq);
    for (size_t i = 0; i < gt.data.size(); ++i)
        CHECK(std::abs(out.data[i] - gt.data[i]) <= 1e-6);
}

TEST_CASE("depth_metrics: perfect prediction gives the zero/one record") {
    testutil::Rng rng(44);
    const DepthGrid gt = positive_grid(rng, 16, 16);
    const DepthMetricRecord r = depth_metrics(gt, gt, Mask::all_true(16, 16));
    CHECK(r.abs_rel == 0.0);
    CHECK(r.sq_rel == 0.0);
    CHECK(r.rmse == 0.0);
    CHECK(r.log10 == 0.0);
    CHECK(r.delta1 == 1.0);
    CHECK(r.delta2 == 1.0);
    CHECK(r.delta3 == 1.0);
}

TEST_CASE("depth_metrics: pred = 2*gt scalar arithmetic") {
    testutil::Rng rng(45);
    const DepthGrid gt = positive_grid(rng, 16, 16);
    DepthGrid pred = gt;
    for (auto& v : pred.data) v *= 2.0f;
    const DepthMetricRecord r = depth_metrics(pred, gt, Mask::all_true(16, 16));
    CHECK(r.abs_rel == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(r.log10 - 0.3010299957) <= 1e-6);
    // ratio 2 exceeds every threshold: 1.25^3 = 1.953125 < 2.
    CHECK(r.delta1 == 0.0);
    CHECK(r.delta2 == 0.0);
    CHECK(r.delta3 == 0.0);
}

TEST_CASE("depth_metrics: two-pixel hand-computed case") {
    DepthGrid gt(1, 2, 1), pred(1, 2, 1);
    gt.data = {1.0f, 4.0f};
    pred.data = {2.0f, 2.0f};
    const DepthMetricRecord r = depth_metrics(pred, gt, Mask::all_true(1, 2));
    CHECK(r.abs_rel == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.rmse == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
    CHECK(r.sq_rel == doctest::Approx((1.0 / 1.0 + 4.0 / 4.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("depth_metrics: positivity violations name the failing metric") {
    DepthGrid gt(1, 2, 1), pred(1, 2, 1);
    gt.data = {1.0f, 2.0f};
    pred.data = {0.0f, 2.0f};
    CHECK_THROWS_WITH_AS(depth_metrics(pred, gt, Mask::all_true(1, 2)),
                         doctest::Contains("log10"), ParameterError);
    pred.data = {1.0f, 2.0f};
    gt.data = {-1.0f, 2.0f};
    CHECK_THROWS_WITH_AS(depth_metrics(pred, gt, Mask::all_true(1, 2)),
                         doctest::Contains("abs_rel"), ParameterError);
}

TEST_CASE("depth_metrics: delta monotonicity on random pairs") {
    testutil::Rng rng(46);
    for (int trial = 0; trial < 30; ++trial) {
        const DepthGrid gt = positive_grid(rng, 12, 12);
        const DepthGrid pred = positive_grid(rng, 12, 12);
        const DepthMetricRecord r = depth_metrics(pred, gt, Mask::all_true(12, 12));
        CHECK(r.delta1 <= r.delta2);
        CHECK(r.delta2 <= r.delta3);
    }
}

TEST_CASE("normal_metrics: identical and orthogonal fields") {
    testutil::Rng rng(47);
    const NormalGrid n = testutil::random_unit_normals(rng, 10, 10);
    const NormalMetricRecord same = normal_metrics(n, n, Mask::all_true(10, 10));
    // arccos near 1 amplifies float rounding: the per-pixel bound is about
    // sqrt(2 * 2^-23) rad ~ 0.03 degrees.
    CHECK(same.mean_deg <= 0.05);
    CHECK(same.acc_11_25 == 1.0);
    CHECK(same.acc_30 == 1.0);

    NormalGrid up(6, 6, 3), east(6, 6, 3);
    for (size_t p = 0; p < up.pixels(); ++p) {
        up.data[p * 3 + 2] = 1.0f;
        east.data[p * 3] = 1.0f;
    }
    const NormalMetricRecord r = normal_metrics(east, up, Mask::all_true(6, 6));
    CHECK(r.mean_deg == doctest::Approx(90.0).epsilon(1e-9));
    CHECK(r.median_deg == doctest::Approx(90.0).epsilon(1e-9));
    CHECK(r.rms_deg == doctest::Approx(90.0).epsilon(1e-9));
    CHECK(r.acc_11_25 == 0.0);
    CHECK(r.acc_22_5 == 0.0);
    CHECK(r.acc_30 == 0.0);
}

TEST_CASE("normal_metrics: matches arccos loop oracle, symmetric in its arguments") {
    testutil::Rng rng(48);
    for (int trial = 0; trial < 5; ++trial) {
        const NormalGrid a = testutil::random_unit_normals(rng, 12, 12);
        const NormalGrid b = testutil::random_unit_normals(rng, 12, 12);
        const Mask mask = Mask::all_true(12, 12);
        const NormalMetricRecord r = normal_metrics(a, b, mask);

        // Direct loop oracle.
        std::vector<double> angles;
        for (size_t p = 0; p < a.pixels(); ++p) {
            double dot = 0.0;
            for (int c = 0; c < 3; ++c)
                dot += static_cast<double>(a.data[p * 3 + c]) * b.data[p * 3 + c];
            angles.push_back(std::acos(std::clamp(dot, -1.0, 1.0)) * 180.0 / M_PI);
        }
        double mean = 0.0, sq = 0.0;
        for (double ang : angles) {
            mean += ang;
            sq += ang * ang;
        }
        mean /= angles.size();
        CHECK(std::abs(r.mean_deg - mean) <= 1e-6);
        CHECK(std::abs(r.rms_deg - std::sqrt(sq / angles.size())) <= 1e-6);

        const NormalMetricRecord rev = normal_metrics(b, a, mask);
        CHECK(r.mean_deg == doctest::Approx(rev.mean_deg).epsilon(1e-12));
        CHECK(r.median_deg == doctest::Approx(rev.median_deg).epsilon(1e-12));
        CHECK(r.rms_deg == doctest::Approx(rev.rms_deg).epsilon(1e-12));
        CHECK(r.acc_11_25 <= r.acc_22_5);
        CHECK(r.acc_22_5 <= r.acc_30);
    }
}

TEST_CASE("normal_metrics: rejects non-unit vectors on the mask") {
    NormalGrid bad(4, 4, 3);
    for (size_t p = 0; p < bad.pixels(); ++p) bad.data[p * 3 + 2] = 1.5f;
    NormalGrid up(4, 4, 3);
    for (size_t p = 0; p < up.pixels(); ++p) up.data[p * 3 + 2] = 1.0f;
    CHECK_THROWS_AS(normal_metrics(bad, up, Mask::all_true(4, 4)), ParameterError);
}

TEST_CASE("aggregation: pixel-pooled mode equals one concatenated image") {
    testutil::Rng rng(49);
    // Two images of different sizes vs their concatenation side by side as
    // one masked mega-image.
    const DepthGrid gt1 = positive_grid(rng, 8, 8), pred1 = positive_grid(rng, 8, 8);
    const DepthGrid gt2 = positive_grid(rng, 4, 6), pred2 = positive_grid(rng, 4, 6);

    std::vector<DepthSums> sums{depth_sums(pred1, gt1, Mask::all_true(8, 8)),
                                depth_sums(pred2, gt2, Mask::all_true(4, 6))};
    const DepthMetricRecord pooled = aggregate_depth_pooled(sums);

    // Concatenated oracle: a single 1 x (64+24) row image.
    DepthGrid cat_gt(1, 88, 1), cat_pred(1, 88, 1);
    std::copy(gt1.data.begin(), gt1.data.end(), cat_gt.data.begin());
    std::copy(gt2.data.begin(), gt2.data.end(), cat_gt.data.begin() + 64);
    std::copy(pred1.data.begin(), pred1.data.end(), cat_pred.data.begin());
    std::copy(pred2.data.begin(), pred2.data.end(), cat_pred.data.begin() + 64);
    const DepthMetricRecord whole = depth_metrics(cat_pred, cat_gt, Mask::all_true(1, 88));

    CHECK(pooled.abs_rel == doctest::Approx(whole.abs_rel).epsilon(1e-12));
    CHECK(pooled.sq_rel == doctest::Approx(whole.sq_rel).epsilon(1e-12));
    CHECK(pooled.rmse == doctest::Approx(whole.rmse).epsilon(1e-12));
    CHECK(pooled.log10 == doctest::Approx(whole.log10).epsilon(1e-12));
    CHECK(pooled.delta1 == whole.delta1);
    CHECK(pooled.pixel_count == whole.pixel_count);

    // Per-image mode is the plain average.
    const DepthMetricRecord per_image =
        aggregate_depth({record_from_sums(sums[0]), record_from_sums(sums[1])});
    CHECK(per_image.abs_rel ==
          doctest::Approx((record_from_sums(sums[0]).abs_rel +
                           record_from_sums(sums[1]).abs_rel) / 2.0).epsilon(1e-12));
}

TEST_CASE("aggregation: pooled normals equal the concatenated field") {
    testutil::Rng rng(50);
    const NormalGrid a1 = testutil::random_unit_normals(rng, 6, 6);
    const NormalGrid b1 = testutil::random_unit_normals(rng, 6, 6);
    const NormalGrid a2 = testutil::random_unit_normals(rng, 3, 4);
    const NormalGrid b2 = testutil::random_unit_normals(rng, 3, 4);

    std::vector<NormalSums> sums{normal_sums(a1, b1, Mask::all_true(6, 6)),
                                 normal_sums(a2, b2, Mask::all_true(3, 4))};
    const NormalMetricRecord pooled = aggregate_normals_pooled(sums);

    NormalGrid cat_a(1, 48, 3), cat_b(1, 48, 3);
    std::copy(a1.data.begin(), a1.data.end(), cat_a.data.begin());
    std::copy(a2.data.begin(), a2.data.end(), cat_a.data.begin() + 36 * 3);
    std::copy(b1.data.begin(), b1.data.end(), cat_b.data.begin());
    std::copy(b2.data.begin(), b2.data.end(), cat_b.data.begin() + 36 * 3);
    const NormalMetricRecord whole = normal_metrics(cat_a, cat_b, Mask::all_true(1, 48));

    CHECK(pooled.mean_deg == doctest::Approx(whole.mean_deg).epsilon(1e-12));
    CHECK(pooled.median_deg == doctest::Approx(whole.median_deg).epsilon(1e-12));
    CHECK(pooled.rms_deg == doctest::Approx(whole.rms_deg).epsilon(1e-12));
    CHECK(pooled.acc_30 == whole.acc_30);
}
