#include "atriareg/pipeline.hpp"

#include <cmath>
#include <string>

#include "atriareg/error.hpp"

namespace atriareg {

PreprocessedSeries preprocess_series(const CineSeries &raw, const PreprocessOptions &options) {
    raw.validate();
    if (!raw.masks) {
        throw Error(ErrorCode::MissingMasks, "preprocessing needs per-phase segmentations");
    }
    const Vec3 c = mask_centroid((*raw.masks)[raw.reference_phase]);
    PreprocessedSeries out;
    out.crop_center = {static_cast<int>(std::lround(c[0])), static_cast<int>(std::lround(c[1])),
                       static_cast<int>(std::lround(c[2]))};

    CineSeries cropped;
    cropped.reference_phase = raw.reference_phase;
    cropped.masks.emplace();
    for (std::size_t t = 0; t < raw.phase_count(); ++t) {
        cropped.phases.push_back(crop_center(raw.phases[t], out.crop_center, options.crop_size));
        cropped.masks->push_back(crop_center((*raw.masks)[t], out.crop_center, options.crop_size));
    }

    StabilizedSeries stable = stabilize_centroid(cropped);
    out.shifts = std::move(stable.shifts);
    out.series.reference_phase = raw.reference_phase;
    out.series.masks = std::move(stable.series.masks);
    for (std::size_t t = 0; t < stable.series.phase_count(); ++t) {
        try {
            const Volume3 normalized = minmax_normalize(stable.series.phases[t]);
            const Mask3 band = contour_band_mask((*out.series.masks)[t], options.band_radius);
            out.series.phases.push_back(apply_mask(normalized, band));
        } catch (const Error &e) {
            throw Error(e.code(), "phase " + std::to_string(t) + ": " + e.detail());
        }
    }
    return out;
}

} // namespace atriareg
