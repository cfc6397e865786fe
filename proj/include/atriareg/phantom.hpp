#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "atriareg/field.hpp"
#include "atriareg/volume.hpp"

namespace atriareg {

// Synthetic cine series: an ellipsoid scaled about `center` by s_t per phase.
//
// Scale curve (periodic over `phases`, s_0 = 1, maximum at `peak_phase`):
//   t <= peak:  s_t = 1 + (peak_scale - 1) sin^2(pi/2 * t / peak_phase)
//   t >  peak:  s_t = 1 + (peak_scale - 1) sin^2(pi/2 * (phases - t) / (phases - peak_phase))
struct PhantomConfig {
    Dims dims{96, 96, 36};
    Vec3 spacing{1.72, 1.72, 2.0};
    int phases = kDefaultPhaseCount;
    Vec3 base_radii_voxels{18.0, 15.0, 10.0};
    std::optional<Vec3> center; // voxel coordinates; dims/2 when unset
    double peak_scale = 1.25;
    int peak_phase = 8;
    double noise_sigma = 0.02;
    double falloff_voxels = 2.0; // width of the 1 -> 0 intensity ramp at the surface
    std::uint64_t seed = 0;

    // Throws ConfigInvalid.
    void validate() const;
    Vec3 resolved_center() const;
};

struct Phantom {
    CineSeries series;                      // intensities and exact ellipsoid masks
    std::vector<DisplacementField> truth;   // pull-back fields, voxel units
    std::vector<double> scales;             // s_t
};

double phantom_scale(const PhantomConfig &cfg, int phase);

// u_t(x) = (1/s_t - 1)(x - c), so warp(phase 0, u_t) reproduces phase t.
Phantom generate_phantom(const PhantomConfig &cfg);

struct EndpointError {
    double mean = 0.0;
    double max = 0.0;
};

// Per-voxel |estimated - truth| over `region`. Throws GeometryMismatch, EmptyMask.
EndpointError endpoint_error(const DisplacementField &estimated, const DisplacementField &truth,
                             const Mask3 &region);

} // namespace atriareg
