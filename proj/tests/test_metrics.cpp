#include <doctest.h>

#include <random>

#include "atriareg/error.hpp"
#include "atriareg/metrics.hpp"
#include "atriareg/preprocess.hpp"
#include "support/oracles.hpp"

using namespace atriareg;
using oracle::grid;

namespace {

const Vec3 kCine{1.72, 1.72, 2.0};

Mask3 cube(const Geometry &g, int x0, int y0, int z0, int n) {
    return oracle::mask_from(g, [=](int i, int j, int k) {
        return i >= x0 && i < x0 + n && j >= y0 && j < y0 + n && k >= z0 && k < z0 + n;
    });
}

Mask3 random_blob(const Geometry &g, std::mt19937_64 &rng) {
    std::bernoulli_distribution b(0.3);
    return oracle::mask_from(g, [&](int, int, int) { return b(rng); });
}

ErrorCode code_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("dice") {
    const auto g = grid(6, 6, 6);
    const auto a = cube(g, 1, 1, 1, 2);
    CHECK(dice(a, a) == 1.0);
    CHECK(dice(a, cube(g, 4, 4, 4, 2)) == 0.0);
    CHECK(dice(a, cube(g, 2, 1, 1, 2)) == 0.5);
    CHECK(code_of([&] { dice(Mask3(g), Mask3(g)); }) == ErrorCode::BothEmpty);
    CHECK(code_of([&] { dice(a, Mask3(grid(6, 6, 5))); }) == ErrorCode::GeometryMismatch);
}

TEST_CASE("hausdorff_mm") {
    const auto g = grid(5, 5, 5, kCine);
    const auto at = [&](int i, int j, int k) {
        return oracle::mask_from(g, [=](int a, int b, int c) { return a == i && b == j && c == k; });
    };
    CHECK(hausdorff_mm(at(1, 1, 1), at(1, 1, 1)) == 0.0);
    CHECK(hausdorff_mm(at(1, 1, 1), at(2, 1, 1)) == doctest::Approx(1.72).epsilon(1e-15));
    CHECK(hausdorff_mm(at(1, 1, 1), at(1, 1, 2)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(hausdorff_mm(at(0, 0, 0), at(1, 1, 1)) == doctest::Approx(std::sqrt(2 * 1.72 * 1.72 + 4.0)));
    CHECK(code_of([&] { hausdorff_mm(at(1, 1, 1), Mask3(g)); }) == ErrorCode::EmptyMask);
}

TEST_CASE("percentile hausdorff is bounded by the maximum") {
    std::mt19937_64 rng(10);
    const auto g = grid(9, 9, 9, kCine);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_blob(g, rng), b = random_blob(g, rng);
        const double full = hausdorff_mm(a, b);
        CHECK(hausdorff_mm(a, b, 95.0) <= full);
        CHECK(hausdorff_mm(a, b, 100.0) == full);
    }
}

TEST_CASE("metric oracles on random masks") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = grid(4 + trial % 7, 10 - trial % 5, 3 + trial % 8, kCine);
        const auto a = random_blob(g, rng), b = random_blob(g, rng);
        if (a.empty() || b.empty()) continue;
        CHECK(dice(a, b) == oracle::dice(a, b));
        CHECK(dice(a, b) == dice(b, a));
        CHECK(hausdorff_mm(a, b) == oracle::hausdorff(a, b));
        CHECK(hausdorff_mm(a, b) == hausdorff_mm(b, a));
        CHECK(hausdorff_mm(a, a) == 0.0);
    }
}

TEST_CASE("metrics are invariant under a shared translation") {
    const auto g = grid(14, 14, 14, kCine);
    const auto a = cube(g, 3, 4, 3, 4);
    const auto b = oracle::mask_from(g, [](int i, int j, int k) {
        return i >= 4 && i < 8 && j >= 3 && j < 9 && k >= 4 && k < 7;
    });
    const Index3 shift{2, -1, 3};
    CHECK(dice(translate(a, shift), translate(b, shift)) == dice(a, b));
    CHECK(hausdorff_mm(translate(a, shift), translate(b, shift)) == hausdorff_mm(a, b));
}

TEST_CASE("mask_volume_ml") {
    CHECK(mask_volume_ml(Mask3(grid(3, 3, 3))) == 0.0);
    CHECK(mask_volume_ml(Mask3(grid(10, 10, 10), true)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mask_volume_ml(Mask3(grid(10, 10, 1, kCine), true)) == doctest::Approx(0.59168).epsilon(1e-14));
}

TEST_CASE("mean_jacobian") {
    const auto g = grid(6, 6, 6);
    const auto u = oracle::field_from(g, [](int i, int, int) { return Vec3{0.1 * i, 0.0, 0.0}; });
    CHECK(mean_jacobian(u, cube(g, 1, 1, 1, 4)) == doctest::Approx(1.1).epsilon(1e-14));
    CHECK(code_of([&] { mean_jacobian(u, Mask3(g)); }) == ErrorCode::EmptyMask);
}

TEST_CASE("evaluate_tracking") {
    const auto g = grid(12, 12, 10, kCine);
    SUBCASE("static series with zero fields") {
        CineSeries s;
        const auto m = cube(g, 3, 3, 3, 5);
        for (int t = 0; t < 20; ++t) s.phases.push_back(to_volume(m));
        s.masks = std::vector<Mask3>(20, m);
        const std::vector<DisplacementField> zero(20, DisplacementField(g));
        const auto rows = evaluate_tracking(s, zero);
        REQUIRE(rows.size() == 20);
        for (int t = 0; t < 20; ++t) {
            CHECK(rows[t].phase == t);
            CHECK(rows[t].dice == 1.0);
            CHECK(rows[t].hausdorff_mm == 0.0);
            CHECK(rows[t].gt_volume_ml == rows[t].warped_volume_ml);
            CHECK(rows[t].mean_jacobian == 1.0);
        }
    }
    SUBCASE("shifted phase recovered by an integer field") {
        CineSeries s;
        const auto m0 = cube(g, 3, 3, 3, 4), m1 = cube(g, 5, 3, 3, 4);
        s.phases = {to_volume(m0), to_volume(m1)};
        s.masks = std::vector<Mask3>{m0, m1};
        const auto back = oracle::field_from(g, [](int, int, int) { return Vec3{-2.0, 0.0, 0.0}; });
        const std::vector<DisplacementField> fields{DisplacementField(g), back};
        const auto rows = evaluate_tracking(s, fields);
        CHECK(rows[1].dice == 1.0);
        CHECK(rows[1].hausdorff_mm == 0.0);
        const auto none = evaluate_tracking(s, std::vector<DisplacementField>(2, DisplacementField(g)));
        CHECK(none[1].dice == 0.5);
        CHECK(none[1].hausdorff_mm == doctest::Approx(2 * 1.72));
    }
    SUBCASE("errors") {
        CineSeries s;
        s.phases = {Volume3(g)};
        CHECK(code_of([&] { evaluate_tracking(s, std::vector<DisplacementField>(1, DisplacementField(g))); }) ==
              ErrorCode::MissingMasks);
        s.masks = std::vector<Mask3>{cube(g, 1, 1, 1, 2)};
        CHECK(code_of([&] { evaluate_tracking(s, std::vector<DisplacementField>{}); }) == ErrorCode::ConfigInvalid);
    }
}
