#include <doctest.h>

#include <cmath>

#include "aqua/losses.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace aqua;
using namespace aqua::losses;

TEST_CASE("align_lstsq: recovers an exact affine relation") {
    testutil::Rng rng(61);
    const DepthGrid d = testutil::random_grid(rng, 8, 8, 1, 0.1, 2.0);
    DepthGrid gt(8, 8, 1);
    for (size_t i = 0; i < d.data.size(); ++i) gt.data[i] = 2.0f * d.data[i] + 1.0f;
    const Alignment a = align_lstsq(d, gt, Mask::all_true(8, 8));
    CHECK(a.s == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(a.t == doctest::Approx(1.0).epsilon(1e-5));

    const Alignment id = align_lstsq(gt, gt, Mask::all_true(8, 8));
    CHECK(id.s == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(id.t) <= 1e-6);
}

TEST_CASE("align_lstsq: agrees with the grid-search + descent oracle") {
    testutil::Rng rng(62);
    for (int trial = 0; trial < 5; ++trial) {
        const DepthGrid d = testutil::random_grid(rng, 10, 10, 1, 0.0, 1.0);
        const DepthGrid gt = testutil::random_grid(rng, 10, 10, 1, -2.0, 3.0);
        Mask mask(10, 10, true);
        mask.set(0, 0, false);
        mask.set(3, 7, false);
        const Alignment a = align_lstsq(d, gt, mask);
        const oracle::AlignOracle o = oracle::align_grid_search(d, gt, mask);
        CHECK(std::abs(a.s - o.s) <= 1e-8);
        CHECK(std::abs(a.t - o.t) <= 1e-8);

        // Global optimality spot check: the closed-form residual never
        // exceeds the residual of random probes.
        double ra = 0.0;
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 10; ++x)
                if (mask.at(y, x)) {
                    const double e = a.s * d.at(y, x) + a.t - gt.at(y, x);
                    ra += e * e;
                }
        for (int probe = 0; probe < 100; ++probe) {
            const double s = rng.uniform(-4.0, 4.0), t = rng.uniform(-4.0, 4.0);
            double rp = 0.0;
            for (int y = 0; y < 10; ++y)
                for (int x = 0; x < 10; ++x)
                    if (mask.at(y, x)) {
                        const double e = s * d.at(y, x) + t - gt.at(y, x);
                        rp += e * e;
                    }
            CHECK(ra <= rp + 1e-9);
        }
    }
}

TEST_CASE("align_lstsq: degenerate inputs throw") {
    const DepthGrid flat(6, 6, 1, 0.4f);
    const DepthGrid gt(6, 6, 1, 1.0f);
    CHECK_THROWS_AS(align_lstsq(flat, gt, Mask::all_true(6, 6)), DegenerateMathError);

    Mask one(6, 6, false);
    one.set(2, 2, true);
    testutil::Rng rng(63);
    CHECK_THROWS_AS(align_lstsq(testutil::random_grid(rng, 6, 6), gt, one), DegenerateMathError);
}

TEST_CASE("ssi_loss: invariant to affine transforms of the prediction") {
    testutil::Rng rng(64);
    for (Rho rho : {Rho::L1, Rho::L2}) {
        // Keep the prediction on the 2^-10 lattice so gt = 3*d - 2 is exactly
        // representable and the invariance bound is not polluted by float
        // rounding of the inputs themselves.
        DepthGrid d(12, 12, 1);
        for (auto& v : d.data) v = static_cast<float>(rng.uniform_int(0, 1024)) / 1024.0f;
        DepthGrid gt(12, 12, 1);
        for (size_t i = 0; i < d.data.size(); ++i) gt.data[i] = 3.0f * d.data[i] - 2.0f;
        CHECK(ssi_loss(d, gt, Mask::all_true(12, 12), rho) <= 1e-8);

        // And unchanged when the prediction itself is re-scaled/shifted.
        const DepthGrid noise = testutil::random_grid(rng, 12, 12, 1, 0.0, 1.0);
        DepthGrid scaled(12, 12, 1);
        for (size_t i = 0; i < d.data.size(); ++i) scaled.data[i] = 5.0f * d.data[i] + 7.0f;
        const double base = ssi_loss(d, noise, Mask::all_true(12, 12), rho);
        const double after = ssi_loss(scaled, noise, Mask::all_true(12, 12), rho);
        CHECK(std::abs(base - after) <= 1e-5 * std::max(1.0, base));
    }
}

TEST_CASE("ssi_loss_frozen: two-pixel hand case") {
    DepthGrid d(1, 2, 1), gt(1, 2, 1);
    d.data = {1.0f, 2.0f};
    gt.data = {0.0f, 4.0f};
    const Alignment a{1.0, 0.0};
    // residuals (1, -2): l1 -> (1 + 2) / (2*2) = 0.75; l2 -> (1 + 4) / 4 = 1.25
    CHECK(ssi_loss_frozen(d, gt, Mask::all_true(1, 2), Rho::L1, a) ==
          doctest::Approx(0.75).epsilon(1e-12));
    CHECK(ssi_loss_frozen(d, gt, Mask::all_true(1, 2), Rho::L2, a) ==
          doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("grad_matching_loss_frozen: 2x2 single-level hand case") {
    DepthGrid d(2, 2, 1), gt(2, 2, 1, 0.0f);
    d.data = {0.0f, 1.0f, 0.0f, 1.0f};
    // Residual [[0,1],[0,1]]: two horizontal differences of 1, no vertical
    // differences, M = 4 -> 2/4 = 0.5.
    const double v = grad_matching_loss_frozen(d, gt, Mask::all_true(2, 2), 1, Alignment{1.0, 0.0});
    CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("grad_matching_loss: matches the pooling oracle across K and masks") {
    testutil::Rng rng(65);
    for (int trial = 0; trial < 5; ++trial) {
        const int h = rng.uniform_int(9, 33), w = rng.uniform_int(9, 33);
        const DepthGrid d = testutil::random_grid(rng, h, w, 1, 0.0, 1.0);
        const DepthGrid gt = testutil::random_grid(rng, h, w, 1, 0.0, 2.0);
        Mask mask(h, w, true);
        for (int i = 0; i < 10; ++i)
            mask.set(rng.uniform_int(0, h - 1), rng.uniform_int(0, w - 1), false);
        const Alignment a{rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0)};
        for (int k = 1; k <= 4; ++k) {
            const double impl = grad_matching_loss_frozen(d, gt, mask, k, a);
            const double orac = oracle::grad_matching_oracle(d, gt, mask, k, a.s, a.t);
            CHECK(std::abs(impl - orac) <= 1e-6 * std::max(1.0, orac));
        }
    }
}

TEST_CASE("grad_matching_loss: K beyond the feasible pyramid throws") {
    DepthGrid d(4, 4, 1, 0.0f), gt(4, 4, 1, 1.0f);
    for (int i = 0; i < 16; ++i) d.data[i] = static_cast<float>(i);
    CHECK_NOTHROW(grad_matching_loss(d, gt, Mask::all_true(4, 4), 3));
    CHECK_THROWS_AS(grad_matching_loss(d, gt, Mask::all_true(4, 4), 0), ParameterError);
}

TEST_CASE("total_loss: composition identity and alpha = 0") {
    testutil::Rng rng(66);
    const DepthGrid d = testutil::random_grid(rng, 16, 16, 1, 0.0, 1.0);
    const DepthGrid gt = testutil::random_grid(rng, 16, 16, 1, 0.5, 3.0);
    const Mask mask = Mask::all_true(16, 16);
    const LossReport r = total_loss(d, gt, mask, Rho::L1, 4, 0.5);
    CHECK(std::abs(r.total - (r.ssi + 0.5 * r.reg)) <= 1e-9);
    CHECK(r.ssi >= 0.0);
    CHECK(r.reg >= 0.0);

    // The shared alignment is the least-squares one.
    const Alignment a = align_lstsq(d, gt, mask);
    CHECK(r.alignment.s == doctest::Approx(a.s).epsilon(1e-12));
    CHECK(r.alignment.t == doctest::Approx(a.t).epsilon(1e-12));
    CHECK(std::abs(r.ssi - ssi_loss_frozen(d, gt, mask, Rho::L1, a)) <= 1e-12);
    CHECK(std::abs(r.reg - grad_matching_loss_frozen(d, gt, mask, 4, a)) <= 1e-12);

    const LossReport r0 = total_loss(d, gt, mask, Rho::L1, 4, 0.0);
    CHECK(r0.total == doctest::Approx(r0.ssi).epsilon(1e-15));
}

TEST_CASE("loss_gradient: l2 data term matches s*r/M in closed form") {
    testutil::Rng rng(67);
    const DepthGrid d = testutil::random_grid(rng, 8, 8, 1, 0.0, 1.0);
    const DepthGrid gt = testutil::random_grid(rng, 8, 8, 1, 0.0, 2.0);
    const Mask mask = Mask::all_true(8, 8);
    const Alignment a = align_lstsq(d, gt, mask);
    const ImageGrid g = loss_gradient(d, gt, mask, Rho::L2, 1, 0.0, a);
    const double m = 64.0;
    for (size_t i = 0; i < d.data.size(); ++i) {
        const double r = a.s * d.data[i] + a.t - gt.data[i];
        CHECK(std::abs(g.data[i] - a.s * r / m) <= 1e-9);
    }
}

TEST_CASE("loss_gradient: l1 kink detection throws with pixel locations") {
    testutil::Rng rng(68);
    const DepthGrid d = testutil::random_grid(rng, 6, 6, 1, 0.1, 1.0);
    DepthGrid gt(6, 6, 1);
    for (size_t i = 0; i < d.data.size(); ++i) gt.data[i] = 2.0f * d.data[i] + 1.0f;
    // Every residual sits at the kink after the exact alignment.
    const Alignment a = align_lstsq(d, gt, Mask::all_true(6, 6));
    CHECK_THROWS_AS(loss_gradient(d, gt, Mask::all_true(6, 6), Rho::L1, 1, 0.0, a),
                    DegenerateMathError);
}

TEST_CASE("fd_check: analytic gradient agrees with central differences") {
    testutil::Rng rng(69);
    for (Rho rho : {Rho::L1, Rho::L2}) {
        for (int trial = 0; trial < 3; ++trial) {
            const DepthGrid d = testutil::random_grid(rng, 32, 32, 1, 0.0, 1.0);
            const DepthGrid gt = testutil::random_grid(rng, 32, 32, 1, 0.5, 3.0);
            Mask mask(32, 32, true);
            for (int i = 0; i < 40; ++i)
                mask.set(rng.uniform_int(0, 31), rng.uniform_int(0, 31), false);
            const double err = fd_check(d, gt, mask, rho, 4, 0.5);
            CHECK(err < 1e-4);
        }
    }
}

TEST_CASE("mean_total: batch loss is the plain mean of per-image totals") {
    std::vector<LossReport> reports(3);
    reports[0].total = 1.0;
    reports[1].total = 2.0;
    reports[2].total = 6.0;
    CHECK(mean_total(reports) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(mean_total({}) == 0.0);
}

TEST_CASE("losses: shape and mask validation") {
    DepthGrid d(4, 4, 1, 0.5f), gt(4, 5, 1, 0.5f);
    CHECK_THROWS_AS(total_loss(d, gt, Mask::all_true(4, 4)), DimensionError);
    DepthGrid gt2(4, 4, 1, 0.5f);
    CHECK_THROWS_AS(total_loss(d, gt2, Mask(4, 4, false)), DegenerateMathError);
}
