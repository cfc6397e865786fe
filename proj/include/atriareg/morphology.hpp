#pragma once

#include <vector>

#include "atriareg/volume.hpp"

namespace atriareg {

// Set voxels with at least one face neighbour that is unset or outside the array.
Mask3 extract_contour(const Mask3 &m);

// Integer offsets d with |d|^2 <= radius^2, in index units (spacing ignored).
std::vector<Index3> ball_offsets(double radius_voxels);

// Union of closed index-space balls around every set voxel, clipped at bounds.
Mask3 dilate_sphere(const Mask3 &m, double radius_voxels);

// v where m is set, 0 elsewhere. Throws GeometryMismatch.
Volume3 apply_mask(const Volume3 &v, const Mask3 &m);

inline constexpr double kDefaultBandRadius = 2.0;

// dilate_sphere(extract_contour(m), radius)
Mask3 contour_band_mask(const Mask3 &m, double radius_voxels = kDefaultBandRadius);

} // namespace atriareg
