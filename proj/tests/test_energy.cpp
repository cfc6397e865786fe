#include <doctest.h>

#include <random>

#include "atriareg/energy.hpp"
#include "atriareg/error.hpp"
#include "atriareg/parallel.hpp"
#include "atriareg/transform.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace atriareg;
using oracle::grid;

TEST_CASE("ordered_sum is exact on small integers and order-fixed") {
    std::vector<double> v(5000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 17);
    double expect = 0.0;
    for (double x : v) expect += x;
    CHECK(ordered_sum(v) == expect);
    CHECK(ordered_sum(std::span<const double>{}) == 0.0);
}

TEST_CASE("similarity_mse") {
    const auto g = grid(2, 2, 2);
    SUBCASE("identical inputs") {
        std::mt19937_64 rng(1);
        const auto v = oracle::random_volume(g, rng);
        const auto r = similarity_mse(v, v);
        CHECK(r.value == 0.0);
        for (double x : r.gradient.data()) CHECK(x == 0.0);
    }
    SUBCASE("uniform residual") {
        const auto r = similarity_mse(Volume3(g, 1.0), Volume3(g, 0.0));
        CHECK(r.value == 1.0);
        for (double x : r.gradient.data()) CHECK(x == 2.0 / 8.0);
    }
    SUBCASE("two voxels") {
        const auto r = similarity_mse(Volume3(grid(2, 1, 1), {1.0, -3.0}), Volume3(grid(2, 1, 1), {0.0, 0.0}));
        CHECK(r.value == 5.0);
        CHECK(r.gradient.data()[0] == 1.0);
        CHECK(r.gradient.data()[1] == -3.0);
    }
    SUBCASE("value is symmetric") {
        std::mt19937_64 rng(2);
        const auto a = oracle::random_volume(grid(5, 4, 3), rng), b = oracle::random_volume(grid(5, 4, 3), rng);
        CHECK(similarity_mse(a, b).value == similarity_mse(b, a).value);
    }
    CHECK_THROWS_AS(similarity_mse(Volume3(g), Volume3(grid(2, 2, 3))), Error);
}

TEST_CASE("similarity_ncc") {
    std::mt19937_64 rng(3);
    const auto a = oracle::random_volume(grid(5, 4, 3), rng);
    CHECK(similarity_ncc(a, a).value == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    Volume3 scaled(a.geometry());
    for (std::size_t i = 0; i < a.size(); ++i) scaled.data()[i] = 3.0 * a.data()[i] + 1.0;
    CHECK(std::abs(similarity_ncc(scaled, a).value) < 1e-12);
    const auto b = oracle::random_volume(a.geometry(), rng);
    const auto r = similarity_ncc(b, a);
    // directional derivative against central differences
    const auto dir = oracle::random_volume(a.geometry(), rng);
    double analytic = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) analytic += r.gradient.data()[i] * dir.data()[i];
    const double eps = 1e-6;
    Volume3 hi = b, lo = b;
    for (std::size_t i = 0; i < b.size(); ++i) {
        hi.data()[i] += eps * dir.data()[i];
        lo.data()[i] -= eps * dir.data()[i];
    }
    const double fd = (similarity_ncc(hi, a).value - similarity_ncc(lo, a).value) / (2 * eps);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("bending energy values") {
    const auto g = grid(8, 8, 8);
    SUBCASE("zero field") {
        const auto r = bending_energy(DisplacementField(g));
        CHECK(r.value == 0.0);
        for (double x : r.gradient.data()) CHECK(x == 0.0);
    }
    SUBCASE("quadratic along x") {
        const auto u = oracle::field_from(g, [](int i, int, int) { return Vec3{double(i * i), 0.0, 0.0}; });
        // u_xx = 2 at the 6 * 8 * 8 voxels where the x stencil fits
        CHECK(bending_energy_value(u) == doctest::Approx(4.0 * 6 * 8 * 8 / 512.0).epsilon(1e-15));
    }
    SUBCASE("agrees with direct per-voxel evaluation") {
        std::mt19937_64 rng(4);
        for (int trial = 0; trial < 10; ++trial) {
            const auto u = oracle::random_field(grid(4 + trial % 4, 5, 3 + trial % 3), rng, 1.0);
            CHECK(bending_energy_value(u) == doctest::Approx(oracle::bending(u)).epsilon(1e-12));
            CHECK(bending_energy(u).value == bending_energy_value(u));
        }
    }
    SUBCASE("non-negative") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 10; ++trial) CHECK(bending_energy_value(oracle::random_field(g, rng, 3.0)) >= 0.0);
    }
    CHECK_THROWS_AS(bending_energy(DisplacementField(grid(2, 8, 8))), Error);
}

TEST_CASE("affine fields are in the bending null space") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> a(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        double A[3][3], b[3];
        for (auto &row : A)
            for (double &x : row) x = a(rng);
        for (double &x : b) x = 10 * a(rng);
        const auto u = oracle::field_from(grid(7, 6, 5), [&](int i, int j, int k) {
            return Vec3{A[0][0] * i + A[0][1] * j + A[0][2] * k + b[0], A[1][0] * i + A[1][1] * j + A[1][2] * k + b[1],
                        A[2][0] * i + A[2][1] * j + A[2][2] * k + b[2]};
        });
        const auto r = bending_energy(u);
        CHECK(r.value < 1e-12);
        for (double x : r.gradient.data()) CHECK(std::abs(x) < 1e-10);
    }
}

TEST_CASE("bending gradient is the exact gradient of its value") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = grid(6 + trial % 3, 6, 6 + trial % 2);
        const auto u = oracle::random_field(g, rng, 1.0);
        const auto dir = oracle::random_field(g, rng, 1.0);
        const double rel = gradcheck::directional_error(
            u, dir, [](const DisplacementField &f) { return bending_energy_value(f); }, bending_energy(u).gradient,
            1e-3);
        CHECK(rel < 1e-5);
    }
}

TEST_CASE("total_loss") {
    std::mt19937_64 rng(8);
    const auto g = grid(8, 8, 8);
    const auto moving = oracle::random_volume(g, rng), fixed = oracle::random_volume(g, rng);
    SUBCASE("global minimum") {
        const auto r = total_loss(moving, moving, DisplacementField(g), 0.3);
        CHECK(r.loss.total == 0.0);
        for (double x : r.gradient.data()) CHECK(x == 0.0);
    }
    SUBCASE("breakdown composition") {
        const auto u = oracle::random_field(g, rng, 1.0);
        const auto off = total_loss(moving, fixed, u, 0.0);
        CHECK(off.loss.total == off.loss.similarity);
        const auto on = total_loss(moving, fixed, u, 0.25);
        CHECK(on.loss.total == on.loss.similarity + 0.25 * on.loss.bending);
        CHECK(on.loss.similarity == doctest::Approx(similarity_mse(warp_trilinear(moving, u), fixed).value).epsilon(1e-13));
        CHECK(on.loss.bending == doctest::Approx(bending_energy_value(u)).epsilon(1e-13));
    }
    SUBCASE("into reuses buffers with identical results") {
        const auto u = oracle::random_field(g, rng, 1.0);
        LossResult out;
        total_loss_into(moving, fixed, u, 0.1, SimilarityKind::MeanSquaredError, out);
        const auto ref = total_loss(moving, fixed, u, 0.1);
        CHECK(out.loss.total == ref.loss.total);
        CHECK(out.gradient == ref.gradient);
    }
    SUBCASE("gradient matches central differences per coordinate") {
        for (int trial = 0; trial < 3; ++trial) {
            const auto u = gradcheck::off_face_field(g, rng, 1.5);
            for (double lambda : {0.0, 0.05}) {
                for (auto kind : {SimilarityKind::MeanSquaredError, SimilarityKind::NormalizedCrossCorrelation}) {
                    const auto r = total_loss(moving, fixed, u, lambda, kind);
                    const double err = gradcheck::coordinate_error(
                        u, [&](const DisplacementField &f) { return total_loss(moving, fixed, f, lambda, kind).loss.total; },
                        r.gradient, 1e-3, 60, rng);
                    CHECK(err < 1e-4);
                }
            }
        }
    }
    CHECK_THROWS_AS(total_loss(moving, Volume3(grid(8, 8, 7)), DisplacementField(g), 0.1), Error);
}
