#pragma once

#include <vector>

#include "atriareg/morphology.hpp"
#include "atriareg/preprocess.hpp"
#include "atriareg/volume.hpp"

namespace atriareg {

struct PreprocessOptions {
    Index3 crop_size = kDefaultCropSize;
    double band_radius = kDefaultBandRadius;
};

struct PreprocessedSeries {
    // Contour-band-masked, min-max normalized volumes plus the cropped,
    // stabilized ground-truth masks.
    CineSeries series;
    std::vector<Index3> shifts; // centroid stabilization, per phase
    Index3 crop_center{};       // in the raw voxel grid
};

// Crop around the reference mask centroid, stabilize centroids, normalize
// each phase, and keep only the contour band of each phase's own mask.
// Throws MissingMasks, EmptyMask, ConstantIntensity.
PreprocessedSeries preprocess_series(const CineSeries &raw, const PreprocessOptions &options = {});

} // namespace atriareg
