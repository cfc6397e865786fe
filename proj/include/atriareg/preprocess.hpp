#pragma once

#include <vector>

#include "atriareg/volume.hpp"

namespace atriareg {

// (x - min) / (max - min). Throws ConstantIntensity when max == min.
Volume3 minmax_normalize(const Volume3 &v);

// Extracts a `size` window whose voxel 0 sits at center - size/2 (floor).
// Out-of-range source voxels read as 0 / unset. The output origin is moved so
// every copied voxel keeps its physical position.
Volume3 crop_center(const Volume3 &v, const Index3 &center, const Index3 &size);
Mask3 crop_center(const Mask3 &m, const Index3 &center, const Index3 &size);

// out(x) = in(x - shift); geometry unchanged, vacated voxels 0 / unset.
Volume3 translate(const Volume3 &v, const Index3 &shift);
Mask3 translate(const Mask3 &m, const Index3 &shift);

// Mean index coordinate of the set voxels. Throws EmptyMask.
Vec3 mask_centroid(const Mask3 &m);

struct StabilizedSeries {
    CineSeries series;
    std::vector<Index3> shifts; // per phase, applied as translate(phase, shift)
};

// Moves every phase by round(centroid(mask_ref) - centroid(mask_t)) so the
// mask centroid stays within half a voxel of the reference phase.
// Throws MissingMasks, EmptyMask.
StabilizedSeries stabilize_centroid(const CineSeries &series);

inline constexpr Index3 kDefaultCropSize{96, 96, 36};

} // namespace atriareg
