#include <doctest.h>

#include <random>

#include "atriareg/error.hpp"
#include "atriareg/morphology.hpp"
#include "support/oracles.hpp"

using namespace atriareg;
using oracle::grid;

namespace {

Mask3 single(int n, int i, int j, int k) {
    return oracle::mask_from(grid(n, n, n), [=](int a, int b, int c) { return a == i && b == j && c == k; });
}

Mask3 block(int n, int lo, int hi) {
    return oracle::mask_from(grid(n, n, n), [=](int i, int j, int k) {
        return i >= lo && i <= hi && j >= lo && j <= hi && k >= lo && k <= hi;
    });
}

Mask3 random_mask(const Geometry &g, std::mt19937_64 &rng, double p) {
    std::bernoulli_distribution b(p);
    return oracle::mask_from(g, [&](int, int, int) { return b(rng); });
}

} // namespace

TEST_CASE("extract_contour") {
    CHECK(extract_contour(Mask3(grid(4, 4, 4))).empty());
    CHECK(extract_contour(single(5, 2, 2, 2)) == single(5, 2, 2, 2));
    const auto shell = extract_contour(block(5, 1, 3));
    CHECK(shell.count() == 26);
    CHECK_FALSE(shell(2, 2, 2));
    CHECK(shell == oracle::contour(block(5, 1, 3)));
    SUBCASE("array border counts as outside") {
        CHECK(extract_contour(Mask3(grid(3, 3, 3), true)).count() == 26);
    }
}

TEST_CASE("ball offsets") {
    CHECK(ball_offsets(0.0).size() == 1);
    CHECK(ball_offsets(1.0).size() == 7);
    CHECK(ball_offsets(2.0).size() == 33); // 1 + 6 + 12 + 8 + 6
}

TEST_CASE("dilate_sphere") {
    CHECK(dilate_sphere(single(7, 3, 3, 3), 0.0) == single(7, 3, 3, 3));
    CHECK(dilate_sphere(single(7, 3, 3, 3), 1.0).count() == 7);
    CHECK(dilate_sphere(single(7, 3, 3, 3), 2.0).count() == 33);
    SUBCASE("clipped at the array bounds") {
        CHECK(dilate_sphere(single(7, 0, 0, 0), 1.0).count() == 4);
    }
    SUBCASE("matches the brute-force oracle") {
        std::mt19937_64 rng(21);
        for (double r : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) {
            const auto m = random_mask(grid(9, 8, 7), rng, 0.04);
            CHECK(dilate_sphere(m, r) == oracle::dilate(m, r));
        }
    }
}

TEST_CASE("apply_mask") {
    std::mt19937_64 rng(2);
    const auto v = oracle::random_volume(grid(4, 4, 4), rng);
    const auto all = apply_mask(v, Mask3(grid(4, 4, 4), true));
    CHECK(std::equal(all.data().begin(), all.data().end(), v.data().begin()));
    CHECK(apply_mask(v, Mask3(grid(4, 4, 4))).sum() == 0.0);
    CHECK(apply_mask(Volume3(grid(4, 4, 4), 1.0), block(4, 1, 2)).sum() == 8.0);
    CHECK_THROWS_AS(apply_mask(v, Mask3(grid(4, 4, 5))), Error);
}

TEST_CASE("contour_band_mask") {
    CHECK(contour_band_mask(Mask3(grid(5, 5, 5))).empty());
    CHECK(contour_band_mask(single(7, 3, 3, 3), 2.0).count() == 33);
    SUBCASE("solid 9 cube keeps a 3 cube core clear") {
        const auto m = block(13, 2, 10);
        const auto band = contour_band_mask(m, 2.0);
        CHECK(band == oracle::dilate(oracle::contour(m), 2.0));
        int core = 0;
        for (int k = 5; k <= 7; ++k)
            for (int j = 5; j <= 7; ++j)
                for (int i = 5; i <= 7; ++i) core += band(i, j, k);
        CHECK(core == 0);
        CHECK(band(4, 6, 6));
        CHECK_FALSE(band(5, 6, 6));
        CHECK(band(0, 6, 6));
    }
}

TEST_CASE("morphology properties on random masks") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 15; ++trial) {
        const auto g = grid(8 + trial % 3, 9, 7);
        const auto m = random_mask(g, rng, 0.15);
        const auto sub = oracle::mask_from(g, [&](int i, int j, int k) { return m(i, j, k) && (i + j + k) % 3 == 0; });
        const auto c = extract_contour(m);
        CHECK(c == oracle::contour(m));
        CHECK(oracle::subset(c, m));
        CHECK(oracle::subset(m, dilate_sphere(m, 1.3)));
        CHECK(oracle::subset(dilate_sphere(m, 1.0), dilate_sphere(m, 2.0)));
        CHECK(oracle::subset(dilate_sphere(sub, 1.5), dilate_sphere(m, 1.5)));
        CHECK(dilate_sphere(dilate_sphere(m, 0.0), 1.7) == dilate_sphere(m, 1.7));
    }
}

TEST_CASE("band voxels lie within r of the boundary") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> lo(0, 4), hi(6, 11);
    for (int trial = 0; trial < 10; ++trial) {
        const int a = lo(rng), b = hi(rng), c = lo(rng), d = hi(rng);
        const auto g = grid(12, 12, 12);
        const auto m = oracle::mask_from(g, [&](int i, int j, int k) {
            return i >= a && i <= b && j >= c && j <= d && k >= 3 && k <= 8;
        });
        const double r = 1.0 + 0.5 * (trial % 3);
        const auto band = contour_band_mask(m, r);
        const auto boundary = oracle::points(oracle::contour(m));
        for (int k = 0; k < 12; ++k)
            for (int j = 0; j < 12; ++j)
                for (int i = 0; i < 12; ++i) {
                    if (!band(i, j, k)) continue;
                    double best = 1e9;
                    for (auto &p : boundary)
                        best = std::min(best, std::hypot(i - p[0], j - p[1], k - p[2]));
                    CHECK(best <= r + 1e-12);
                }
    }
}
