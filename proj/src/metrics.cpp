#include "atriareg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "atriareg/error.hpp"
#include "atriareg/morphology.hpp"
#include "atriareg/transform.hpp"

namespace atriareg {

double dice(const Mask3 &a, const Mask3 &b) {
    require_same_geometry(a.geometry(), b.geometry(), "dice");
    std::size_t na = 0, nb = 0, both = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool x = a.test_linear(i), y = b.test_linear(i);
        na += x;
        nb += y;
        both += x && y;
    }
    if (na + nb == 0) {
        throw Error(ErrorCode::BothEmpty, "dice of two empty masks is undefined");
    }
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

namespace {

std::vector<Index3> boundary_points(const Mask3 &m) {
    const Mask3 contour = extract_contour(m);
    const Dims &d = m.dims();
    std::vector<Index3> pts;
    for (int k = 0; k < d.nz; ++k) {
        for (int j = 0; j < d.ny; ++j) {
            for (int i = 0; i < d.nx; ++i) {
                if (contour(i, j, k)) {
                    pts.push_back({i, j, k});
                }
            }
        }
    }
    return pts;
}

// Squared mm distance from every point of `from` to its nearest point of `to`.
// Index differences are scaled, so a shared translation changes nothing.
std::vector<double> directed_sq(const std::vector<Index3> &from, const std::vector<Index3> &to, const Vec3 &s) {
    std::vector<double> out(from.size());
    for (std::size_t p = 0; p < from.size(); ++p) {
        double best = std::numeric_limits<double>::infinity();
        const Index3 &a = from[p];
        for (const Index3 &b : to) {
            const double dx = (a[0] - b[0]) * s[0], dy = (a[1] - b[1]) * s[1], dz = (a[2] - b[2]) * s[2];
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        out[p] = best;
    }
    return out;
}

double percentile_of(std::vector<double> values, double percentile) {
    if (percentile >= 100.0) {
        return *std::max_element(values.begin(), values.end());
    }
    const std::size_t rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * values.size()));
    const std::size_t idx = rank == 0 ? 0 : rank - 1;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx), values.end());
    return values[idx];
}

} // namespace

double hausdorff_mm(const Mask3 &a, const Mask3 &b, double percentile) {
    require_same_geometry(a.geometry(), b.geometry(), "hausdorff_mm");
    if (!(percentile > 0.0 && percentile <= 100.0)) {
        throw Error(ErrorCode::InvalidArgument, "Hausdorff percentile must lie in (0, 100]");
    }
    const auto pa = boundary_points(a);
    const auto pb = boundary_points(b);
    const Vec3 &s = a.geometry().spacing;
    if (pa.empty() || pb.empty()) {
        throw Error(ErrorCode::EmptyMask, "Hausdorff distance needs two non-empty masks");
    }
    const double ab = percentile_of(directed_sq(pa, pb, s), percentile);
    const double ba = percentile_of(directed_sq(pb, pa, s), percentile);
    return std::sqrt(std::max(ab, ba));
}

double mask_volume_ml(const Mask3 &m) {
    const Vec3 &s = m.geometry().spacing;
    return static_cast<double>(m.count()) * s[0] * s[1] * s[2] / 1000.0;
}

double mean_jacobian(const DisplacementField &field, const Mask3 &region) {
    if (field.dims() != region.dims()) {
        throw Error(ErrorCode::GeometryMismatch, "mean_jacobian: region and field dimensions differ");
    }
    const Volume3 det = jacobian_det_map(field);
    const auto v = det.data();
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (region.test_linear(i)) {
            s += v[i];
            ++n;
        }
    }
    if (n == 0) {
        throw Error(ErrorCode::EmptyMask, "mean_jacobian over an empty region");
    }
    return s / static_cast<double>(n);
}

std::vector<PhaseEvaluation> evaluate_tracking(const CineSeries &series, std::span<const DisplacementField> fields,
                                               const EvaluationOptions &options) {
    series.validate();
    if (!series.masks) {
        throw Error(ErrorCode::MissingMasks, "tracking evaluation needs ground-truth masks");
    }
    if (fields.size() != series.phase_count()) {
        throw Error(ErrorCode::ConfigInvalid, "one field per phase is required");
    }
    const auto &masks = *series.masks;
    const Mask3 &reference = masks[series.reference_phase];
    std::vector<PhaseEvaluation> rows;
    rows.reserve(fields.size());
    for (std::size_t t = 0; t < fields.size(); ++t) {
        try {
            const Mask3 warped = warp_mask(reference, fields[t], options.warp_threshold);
            PhaseEvaluation row;
            row.phase = static_cast<int>(t);
            row.dice = dice(warped, masks[t]);
            row.hausdorff_mm = hausdorff_mm(warped, masks[t], options.hausdorff_percentile);
            row.gt_volume_ml = mask_volume_ml(masks[t]);
            row.warped_volume_ml = mask_volume_ml(warped);
            row.mean_jacobian = mean_jacobian(fields[t], warped);
            rows.push_back(row);
        } catch (const Error &e) {
            throw Error(e.code(), "phase " + std::to_string(t) + ": " + e.detail());
        }
    }
    return rows;
}

std::vector<PhaseEvaluation> evaluate_tracking(const CineSeries &series,
                                               std::span<const RegistrationResult> results,
                                               const EvaluationOptions &options) {
    std::vector<DisplacementField> fields;
    fields.reserve(results.size());
    for (const auto &r : results) {
        fields.push_back(r.field);
    }
    return evaluate_tracking(series, std::span<const DisplacementField>(fields), options);
}

} // namespace atriareg
