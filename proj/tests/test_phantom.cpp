#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "atriareg/error.hpp"
#include "atriareg/metrics.hpp"
#include "atriareg/morphology.hpp"
#include "atriareg/phantom.hpp"
#include "atriareg/transform.hpp"
#include "support/oracles.hpp"

using namespace atriareg;
using oracle::grid;

namespace {

const Phantom &default_phantom() {
    static const Phantom ph = generate_phantom(PhantomConfig{});
    return ph;
}

double expected_scale(int t, int phases, int peak, double p) {
    const double x = t <= peak ? double(t) / peak : double(phases - t) / (phases - peak);
    const double s = std::sin(std::numbers::pi / 2 * x);
    return 1.0 + (p - 1.0) * s * s;
}

} // namespace

TEST_CASE("scale curve") {
    const PhantomConfig cfg;
    const auto &ph = default_phantom();
    REQUIRE(ph.scales.size() == 20);
    CHECK(ph.scales[0] == 1.0);
    CHECK(ph.scales[8] == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(*std::max_element(ph.scales.begin(), ph.scales.end()) == ph.scales[8]);
    for (int t = 0; t < 20; ++t) {
        CHECK(ph.scales[t] == doctest::Approx(expected_scale(t, 20, 8, 1.25)).epsilon(1e-15));
        CHECK(phantom_scale(cfg, t) == ph.scales[t]);
        CHECK(ph.scales[t] >= 1.0);
    }
    for (int t = 1; t <= 8; ++t) CHECK(ph.scales[t] > ph.scales[t - 1]);
    for (int t = 9; t < 20; ++t) CHECK(ph.scales[t] < ph.scales[t - 1]);
}

TEST_CASE("default phantom shape") {
    const auto &ph = default_phantom();
    CHECK(ph.series.phase_count() == 20);
    CHECK(ph.series.geometry().dims == Dims{96, 96, 36});
    CHECK(ph.series.geometry().spacing == Vec3{1.72, 1.72, 2.0});
    REQUIRE(ph.series.masks);
    for (double x : ph.truth[0].data()) CHECK(x == 0.0);
}

TEST_CASE("mask volume follows the cube of the scale") {
    const auto &ph = default_phantom();
    const auto &masks = *ph.series.masks;
    const double ratio = static_cast<double>(masks[8].count()) / static_cast<double>(masks[0].count());
    CHECK(std::abs(ratio / 1.953125 - 1.0) <= 0.02);
    for (int t = 0; t < 20; ++t) {
        const double s = ph.scales[t];
        const double r = static_cast<double>(masks[t].count()) / static_cast<double>(masks[0].count());
        CHECK(std::abs(r / (s * s * s) - 1.0) <= 0.02);
    }
}

TEST_CASE("analytic fields reproduce each phase") {
    const auto &ph = default_phantom();
    const auto &masks = *ph.series.masks;
    for (int t = 0; t < 20; ++t) CHECK(dice(warp_mask(masks[0], ph.truth[t]), masks[t]) >= 0.97);
}

TEST_CASE("analytic field jacobian") {
    const auto &ph = default_phantom();
    const auto &masks = *ph.series.masks;
    for (int t : {1, 4, 8, 13, 19}) {
        const double s = ph.scales[t];
        const double expect = 1.0 / (s * s * s);
        const auto det = jacobian_det_map(ph.truth[t]);
        CHECK(std::abs(det(48, 48, 18) / expect - 1.0) < 0.01);
        const double band_mean = mean_jacobian(ph.truth[t], contour_band_mask(masks[t]));
        CHECK(band_mean >= 0.98 * expect);
        CHECK(band_mean <= 1.02 * expect);
    }
}

TEST_CASE("uniform forward scaling has mean band jacobian s cubed") {
    const auto g = grid(32, 32, 20);
    const Vec3 c{16, 16, 10};
    const auto m = oracle::mask_from(g, [&](int i, int j, int k) {
        return std::pow((i - c[0]) / 8, 2) + std::pow((j - c[1]) / 7, 2) + std::pow((k - c[2]) / 5, 2) <= 1.0;
    });
    for (double s : {1.04, 1.1, 1.25}) {
        const auto u = oracle::field_from(g, [&](int i, int j, int k) {
            return Vec3{(s - 1) * (i - c[0]), (s - 1) * (j - c[1]), (s - 1) * (k - c[2])};
        });
        const double mean = mean_jacobian(u, contour_band_mask(m));
        CHECK(mean >= 0.98 * s * s * s);
        CHECK(mean <= 1.02 * s * s * s);
    }
}

TEST_CASE("determinism and noise") {
    PhantomConfig cfg;
    cfg.dims = {32, 30, 16};
    cfg.base_radii_voxels = {8, 7, 5};
    cfg.phases = 6;
    cfg.peak_phase = 3;
    cfg.seed = 42;
    const auto a = generate_phantom(cfg);
    const auto b = generate_phantom(cfg);
    for (int t = 0; t < 6; ++t) {
        CHECK(std::equal(a.series.phases[t].data().begin(), a.series.phases[t].data().end(),
                         b.series.phases[t].data().begin()));
        CHECK(a.truth[t] == b.truth[t]);
        CHECK((*a.series.masks)[t] == (*b.series.masks)[t]);
    }
    cfg.seed = 43;
    const auto c = generate_phantom(cfg);
    CHECK_FALSE(std::equal(a.series.phases[2].data().begin(), a.series.phases[2].data().end(),
                           c.series.phases[2].data().begin()));

    cfg.noise_sigma = 0.0;
    const auto q1 = generate_phantom(cfg);
    cfg.seed = 1234;
    const auto q2 = generate_phantom(cfg);
    for (int t = 0; t < 6; ++t) {
        CHECK(std::equal(q1.series.phases[t].data().begin(), q1.series.phases[t].data().end(),
                         q2.series.phases[t].data().begin()));
    }
    SUBCASE("noise-free intensities lie in [0, 1] with 1 deep inside") {
        const auto &v = q1.series.phases[0];
        CHECK(*std::min_element(v.data().begin(), v.data().end()) >= 0.0);
        CHECK(*std::max_element(v.data().begin(), v.data().end()) <= 1.0);
        CHECK(v(16, 15, 8) == 1.0);
        CHECK(v(0, 0, 0) == 0.0);
    }
}

TEST_CASE("phantom config validation") {
    const auto invalid = [](auto mutate) {
        PhantomConfig cfg;
        mutate(cfg);
        try {
            generate_phantom(cfg);
        } catch (const Error &e) {
            return e.code() == ErrorCode::ConfigInvalid;
        }
        return false;
    };
    CHECK(invalid([](PhantomConfig &c) { c.phases = 1; }));
    CHECK(invalid([](PhantomConfig &c) { c.peak_scale = 1.0; }));
    CHECK(invalid([](PhantomConfig &c) { c.peak_phase = 20; }));
    CHECK(invalid([](PhantomConfig &c) { c.peak_phase = 0; }));
    CHECK(invalid([](PhantomConfig &c) { c.noise_sigma = -0.1; }));
    CHECK(invalid([](PhantomConfig &c) { c.base_radii_voxels = {0, 1, 1}; }));
}

TEST_CASE("endpoint_error") {
    const auto g = grid(4, 4, 4);
    std::mt19937_64 rng(12);
    const auto truth = oracle::random_field(g, rng, 2.0);
    const Mask3 all(g, true);
    const auto same = endpoint_error(truth, truth, all);
    CHECK(same.mean == 0.0);
    CHECK(same.max == 0.0);
    DisplacementField shifted = truth;
    for (double &x : shifted.component(0)) x += 1.0;
    const auto off = endpoint_error(shifted, truth, all);
    CHECK(off.mean == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(off.max == doctest::Approx(1.0).epsilon(1e-14));

    const auto est = oracle::random_field(g, rng, 2.0);
    std::bernoulli_distribution pick(0.5);
    const auto region = oracle::mask_from(g, [&](int, int, int) { return pick(rng); });
    double sum = 0.0, worst = 0.0;
    std::size_t n = 0;
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) {
                if (!region(i, j, k)) continue;
                const Vec3 a = est.at(i, j, k), b = truth.at(i, j, k);
                const double e = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
                sum += e;
                worst = std::max(worst, e);
                ++n;
            }
    const auto r = endpoint_error(est, truth, region);
    CHECK(r.mean == doctest::Approx(sum / n).epsilon(1e-13));
    CHECK(r.max == doctest::Approx(worst).epsilon(1e-15));
    CHECK_THROWS_AS(endpoint_error(est, truth, Mask3(g)), Error);
}
