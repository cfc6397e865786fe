#pragma once

#include "atriareg/field.hpp"
#include "atriareg/volume.hpp"

namespace atriareg {

struct LossBreakdown {
    double similarity = 0.0;
    double bending = 0.0;
    double total = 0.0; // similarity + lambda * bending
    double lambda = 0.0;

    static LossBreakdown compose(double similarity, double bending, double lambda) noexcept {
        return {similarity, bending, similarity + lambda * bending, lambda};
    }
};

enum class SimilarityKind {
    MeanSquaredError,
    // 1 - global normalized cross-correlation
    NormalizedCrossCorrelation,
};

struct ImageTermResult {
    double value = 0.0;
    Volume3 gradient; // d value / d warped
};

struct FieldTermResult {
    double value = 0.0;
    DisplacementField gradient; // d value / d u
};

struct LossResult {
    LossBreakdown loss;
    DisplacementField gradient; // d total / d u
};

// (1/N) sum (warped - fixed)^2. Throws GeometryMismatch.
ImageTermResult similarity_mse(const Volume3 &warped, const Volume3 &fixed);

// 1 - <a,b>/(|a||b|) on mean-centred images; 1 when either image is constant.
ImageTermResult similarity_ncc(const Volume3 &warped, const Volume3 &fixed);

ImageTermResult similarity(SimilarityKind kind, const Volume3 &warped, const Volume3 &fixed);

// Discrete bending energy
//   (1/N) sum_c sum_x [u_xx^2 + u_yy^2 + u_zz^2 + 2u_xy^2 + 2u_xz^2 + 2u_yz^2]
// with unit-step central second differences. A stencil contributes only where
// it fits inside the grid. The gradient is the exact adjoint, 2 L^T L u / N.
// Throws TooSmall when any axis has fewer than 3 voxels.
FieldTermResult bending_energy(const DisplacementField &field);
double bending_energy_value(const DisplacementField &field);

// similarity(warp(moving, u), fixed) + lambda * bending(u), with the gradient
// chained through the trilinear sampler.
LossResult total_loss(const Volume3 &moving, const Volume3 &fixed, const DisplacementField &field, double lambda,
                      SimilarityKind kind = SimilarityKind::MeanSquaredError);

// As total_loss, reusing out.gradient's storage when its geometry matches.
void total_loss_into(const Volume3 &moving, const Volume3 &fixed, const DisplacementField &field, double lambda,
                     SimilarityKind kind, LossResult &out);

} // namespace atriareg
