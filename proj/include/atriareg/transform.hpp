#pragma once

#include "atriareg/field.hpp"
#include "atriareg/volume.hpp"

namespace atriareg {

struct TrilinearSample {
    double value = 0.0;
    Vec3 gradient{0.0, 0.0, 0.0}; // d value / d position, exact for the interpolant
};

// Trilinear interpolation at a continuous index position, zero outside the
// array. At integer positions the gradient is the forward difference of the
// cell starting there.
double sample_trilinear(const Volume3 &v, const Vec3 &pos) noexcept;
TrilinearSample sample_trilinear_with_gradient(const Volume3 &v, const Vec3 &pos) noexcept;

// warped(x) = moving(x + u(x)), zero padding. Throws GeometryMismatch.
Volume3 warp_trilinear(const Volume3 &moving, const DisplacementField &field);

// Indicator of `mask` warped trilinearly, set where the sample is > threshold.
Mask3 warp_mask(const Mask3 &mask, const DisplacementField &field, double threshold = 0.5);

// det(I + grad u) with central differences (one-sided at array borders).
// Throws TooSmall when any axis has fewer than 3 voxels.
Volume3 jacobian_det_map(const DisplacementField &field);

// x -> u(x) + shift
DisplacementField compose_with_shift(const DisplacementField &field, const Index3 &shift);

// Voxel-unit field scaled componentwise by the voxel spacing.
DisplacementField field_to_mm(const DisplacementField &field);

} // namespace atriareg
