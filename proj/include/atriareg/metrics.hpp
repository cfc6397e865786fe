#pragma once

#include <span>
#include <vector>

#include "atriareg/field.hpp"
#include "atriareg/registration.hpp"
#include "atriareg/volume.hpp"

namespace atriareg {

struct PhaseEvaluation {
    int phase = 0;
    double dice = 0.0;
    double hausdorff_mm = 0.0;
    double gt_volume_ml = 0.0;
    double warped_volume_ml = 0.0;
    double mean_jacobian = 0.0;
};

// 2|A n B| / (|A| + |B|). Throws BothEmpty, GeometryMismatch.
double dice(const Mask3 &a, const Mask3 &b);

// Symmetric Hausdorff distance between the 6-connected boundary voxel sets,
// measured centre to centre in mm. `percentile` < 100 replaces each directed
// maximum by that (nearest-rank) percentile of the directed distances.
// Throws EmptyMask, GeometryMismatch.
double hausdorff_mm(const Mask3 &a, const Mask3 &b, double percentile = 100.0);

// Set voxel count times voxel volume, in ml.
double mask_volume_ml(const Mask3 &m);

// Mean of the Jacobian determinant over `region`. Throws EmptyMask.
double mean_jacobian(const DisplacementField &field, const Mask3 &region);

struct EvaluationOptions {
    double hausdorff_percentile = 100.0;
    double warp_threshold = 0.5;
};

// Warps the reference-phase mask with each phase's field and compares it to
// that phase's mask. Throws MissingMasks, ConfigInvalid, plus metric errors.
std::vector<PhaseEvaluation> evaluate_tracking(const CineSeries &series, std::span<const DisplacementField> fields,
                                               const EvaluationOptions &options = {});
std::vector<PhaseEvaluation> evaluate_tracking(const CineSeries &series,
                                               std::span<const RegistrationResult> results,
                                               const EvaluationOptions &options = {});

} // namespace atriareg
