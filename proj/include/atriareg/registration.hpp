#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "atriareg/energy.hpp"
#include "atriareg/field.hpp"
#include "atriareg/volume.hpp"

namespace atriareg {

struct RegistrationConfig {
    double lambda = 1.0;
    std::vector<int> levels{4, 2, 1}; // downsample factors, coarse to fine
    int max_iters_per_level = 300;
    // Adam learning rate in voxels of the current level, so a coarse step
    // covers `factor` finest-level voxels.
    double step_size = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double stop_rel_tol = 1e-3;
    int stop_window = 10;
    // The optimizer is deterministic; the seed is carried for provenance.
    std::uint64_t seed = 0;
    bool warm_start = true;
    SimilarityKind similarity = SimilarityKind::MeanSquaredError;

    // Throws ConfigInvalid.
    void validate() const;
};

struct RegistrationResult {
    DisplacementField field;               // finest level, voxel units
    std::vector<LossBreakdown> loss_trace; // one entry per accepted iteration, all levels
    std::vector<int> iterations_used;      // per level, coarse to fine
    bool converged = false;                // every level stopped on the tolerance test
};

// Average pooling by `factor`; dims are zero-padded up to a multiple first.
// The coarse voxel sits at the centre of its block.
Volume3 downsample(const Volume3 &v, int factor);

// Resamples a coarse-level field onto `fine` geometry (clamped trilinear)
// and multiplies displacements by `ratio` = coarse factor / fine factor.
DisplacementField prolong_field(const DisplacementField &coarse, const Geometry &fine, double ratio);

// Pools a finest-level field down by `factor`, dividing displacements by it.
DisplacementField restrict_field(const DisplacementField &fine, int factor);

// Coarse-to-fine Adam minimisation of total_loss over a dense field. A step
// that would raise the loss is retried with half the learning rate, so the
// recorded trace never increases.
// Throws GeometryMismatch, NonFiniteLoss, ConfigInvalid, TooSmall.
RegistrationResult register_pair(const Volume3 &moving, const Volume3 &fixed,
                                 const std::optional<DisplacementField> &init, const RegistrationConfig &cfg);

// Registers the reference phase (moving) onto every phase t (fixed), warm
// starting phase t from phase t-1 unless cfg.warm_start is false.
std::vector<RegistrationResult> track_cycle(const CineSeries &series, const RegistrationConfig &cfg);

} // namespace atriareg
