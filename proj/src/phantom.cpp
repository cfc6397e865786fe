#include "atriareg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "atriareg/error.hpp"

namespace atriareg {

void PhantomConfig::validate() const {
    Geometry{dims, spacing, {}}.validate();
    if (phases < 2) {
        throw Error(ErrorCode::ConfigInvalid, "phantom needs at least 2 phases");
    }
    if (!(peak_scale > 1.0) || !std::isfinite(peak_scale)) {
        throw Error(ErrorCode::ConfigInvalid, "peak_scale must be > 1");
    }
    if (peak_phase <= 0 || peak_phase >= phases) {
        throw Error(ErrorCode::ConfigInvalid, "peak_phase must lie in [1, phases)");
    }
    for (double r : base_radii_voxels) {
        if (!(r > 0.0)) {
            throw Error(ErrorCode::ConfigInvalid, "ellipsoid radii must be positive");
        }
    }
    if (!(noise_sigma >= 0.0) || !(falloff_voxels > 0.0)) {
        throw Error(ErrorCode::ConfigInvalid, "noise sigma must be >= 0 and falloff > 0");
    }
}

Vec3 PhantomConfig::resolved_center() const {
    if (center) {
        return *center;
    }
    return {dims.nx / 2.0, dims.ny / 2.0, dims.nz / 2.0};
}

double phantom_scale(const PhantomConfig &cfg, int phase) {
    const double amp = cfg.peak_scale - 1.0;
    const double half_pi = 0.5 * std::numbers::pi;
    double arg;
    if (phase <= cfg.peak_phase) {
        arg = half_pi * phase / cfg.peak_phase;
    } else {
        arg = half_pi * (cfg.phases - phase) / (cfg.phases - cfg.peak_phase);
    }
    const double s = std::sin(arg);
    return 1.0 + amp * s * s;
}

namespace {

struct Ellipsoid {
    Vec3 center;
    Vec3 radii;
    double half_width;

    // Normalised radius of phase-0 position p (1 on the surface).
    double rho(const Vec3 &p) const {
        double acc = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double q = (p[a] - center[a]) / radii[a];
            acc += q * q;
        }
        return std::sqrt(acc);
    }

    // 1 inside, 0 outside, C1 sine ramp of width 2*half_width centred on the
    // surface, measured along the ray from the centre.
    double intensity(const Vec3 &p) const {
        const double r = rho(p);
        if (r == 0.0) {
            return 1.0;
        }
        const double dist = std::hypot(p[0] - center[0], p[1] - center[1], p[2] - center[2]);
        const double signed_dist = dist * (r - 1.0) / r;
        const double t = signed_dist / half_width;
        if (t <= -1.0) {
            return 1.0;
        }
        if (t >= 1.0) {
            return 0.0;
        }
        return 0.5 * (1.0 - std::sin(0.5 * std::numbers::pi * t));
    }
};

} // namespace

Phantom generate_phantom(const PhantomConfig &cfg) {
    cfg.validate();
    const Geometry geom{cfg.dims, cfg.spacing, {0.0, 0.0, 0.0}};
    const Vec3 c = cfg.resolved_center();
    const Ellipsoid shape{c, cfg.base_radii_voxels, 0.5 * cfg.falloff_voxels};
    const Dims &d = cfg.dims;

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0);

    Phantom out;
    out.series.masks.emplace();
    for (int t = 0; t < cfg.phases; ++t) {
        const double s = phantom_scale(cfg, t);
        const double inv = 1.0 / s;
        Volume3 vol(geom);
        Mask3 mask(geom);
        DisplacementField truth(geom);
        for (int k = 0; k < d.nz; ++k) {
            for (int j = 0; j < d.ny; ++j) {
                for (int i = 0; i < d.nx; ++i) {
                    const Vec3 rel{i - c[0], j - c[1], k - c[2]};
                    // phase-0 position that moves to (i,j,k) at phase t
                    const Vec3 p{c[0] + rel[0] * inv, c[1] + rel[1] * inv, c[2] + rel[2] * inv};
                    double value = shape.intensity(p);
                    if (cfg.noise_sigma > 0.0) {
                        value += noise(rng);
                    }
                    vol(i, j, k) = value;
                    mask.set(i, j, k, shape.rho(p) <= 1.0);
                    truth.set(i, j, k, {(inv - 1.0) * rel[0], (inv - 1.0) * rel[1], (inv - 1.0) * rel[2]});
                }
            }
        }
        out.series.phases.push_back(std::move(vol));
        out.series.masks->push_back(std::move(mask));
        out.truth.push_back(std::move(truth));
        out.scales.push_back(s);
    }
    return out;
}

EndpointError endpoint_error(const DisplacementField &estimated, const DisplacementField &truth,
                             const Mask3 &region) {
    if (estimated.dims() != truth.dims() || region.dims() != truth.dims()) {
        throw Error(ErrorCode::GeometryMismatch, "endpoint_error: dimensions differ");
    }
    EndpointError out;
    std::size_t n = 0;
    const std::size_t voxels = truth.voxel_count();
    const auto e = estimated.data();
    const auto g = truth.data();
    for (std::size_t i = 0; i < voxels; ++i) {
        if (!region.test_linear(i)) {
            continue;
        }
        const double dx = e[i] - g[i], dy = e[voxels + i] - g[voxels + i], dz = e[2 * voxels + i] - g[2 * voxels + i];
        const double err = std::sqrt(dx * dx + dy * dy + dz * dz);
        out.mean += err;
        out.max = std::max(out.max, err);
        ++n;
    }
    if (n == 0) {
        throw Error(ErrorCode::EmptyMask, "endpoint_error over an empty region");
    }
    out.mean /= static_cast<double>(n);
    return out;
}

} // namespace atriareg
