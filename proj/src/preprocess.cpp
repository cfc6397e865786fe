#include "atriareg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "atriareg/error.hpp"

namespace atriareg {

Volume3 minmax_normalize(const Volume3 &v) {
    const auto data = v.data();
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const double min = *lo;
    const double max = *hi;
    if (!(max > min)) {
        throw Error(ErrorCode::ConstantIntensity, "cannot min-max normalize a constant volume");
    }
    const double range = max - min;
    Volume3 out(v.geometry());
    auto dst = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        dst[i] = (data[i] - min) / range;
    }
    return out;
}

namespace {

Geometry cropped_geometry(const Geometry &g, const Index3 &start, const Index3 &size) {
    for (int s : size) {
        if (s <= 0) {
            throw Error(ErrorCode::InvalidArgument, "crop size must be positive");
        }
    }
    Geometry out = g;
    out.dims = Dims{size[0], size[1], size[2]};
    for (int d = 0; d < 3; ++d) {
        out.origin[d] = g.origin[d] + start[d] * g.spacing[d];
    }
    return out;
}

Index3 crop_start(const Index3 &center, const Index3 &size) {
    return {center[0] - size[0] / 2, center[1] - size[1] / 2, center[2] - size[2] / 2};
}

// Calls copy(dst_index, src_index) for every output voxel whose source lies
// inside `src_dims`.
template <typename Fn>
void for_each_overlap(const Dims &dst_dims, const Dims &src_dims, const Index3 &offset, Fn &&copy) {
    for (int k = 0; k < dst_dims.nz; ++k) {
        const int sk = k + offset[2];
        if (sk < 0 || sk >= src_dims.nz) {
            continue;
        }
        for (int j = 0; j < dst_dims.ny; ++j) {
            const int sj = j + offset[1];
            if (sj < 0 || sj >= src_dims.ny) {
                continue;
            }
            for (int i = 0; i < dst_dims.nx; ++i) {
                const int si = i + offset[0];
                if (si < 0 || si >= src_dims.nx) {
                    continue;
                }
                copy(dst_dims.index(i, j, k), src_dims.index(si, sj, sk));
            }
        }
    }
}

} // namespace

Volume3 crop_center(const Volume3 &v, const Index3 &center, const Index3 &size) {
    const Index3 start = crop_start(center, size);
    Volume3 out(cropped_geometry(v.geometry(), start, size));
    auto dst = out.data();
    const auto src = v.data();
    for_each_overlap(out.dims(), v.dims(), start, [&](std::size_t d, std::size_t s) { dst[d] = src[s]; });
    return out;
}

Mask3 crop_center(const Mask3 &m, const Index3 &center, const Index3 &size) {
    const Index3 start = crop_start(center, size);
    Mask3 out(cropped_geometry(m.geometry(), start, size));
    for_each_overlap(out.dims(), m.dims(), start,
                     [&](std::size_t d, std::size_t s) { out.set_linear(d, m.test_linear(s)); });
    return out;
}

Volume3 translate(const Volume3 &v, const Index3 &shift) {
    Volume3 out(v.geometry());
    auto dst = out.data();
    const auto src = v.data();
    const Index3 offset{-shift[0], -shift[1], -shift[2]};
    for_each_overlap(v.dims(), v.dims(), offset, [&](std::size_t d, std::size_t s) { dst[d] = src[s]; });
    return out;
}

Mask3 translate(const Mask3 &m, const Index3 &shift) {
    Mask3 out(m.geometry());
    const Index3 offset{-shift[0], -shift[1], -shift[2]};
    for_each_overlap(m.dims(), m.dims(), offset,
                     [&](std::size_t d, std::size_t s) { out.set_linear(d, m.test_linear(s)); });
    return out;
}

Vec3 mask_centroid(const Mask3 &m) {
    const Dims &dims = m.dims();
    double sx = 0.0, sy = 0.0, sz = 0.0;
    std::size_t n = 0;
    for (int k = 0; k < dims.nz; ++k) {
        for (int j = 0; j < dims.ny; ++j) {
            for (int i = 0; i < dims.nx; ++i) {
                if (m(i, j, k)) {
                    sx += i;
                    sy += j;
                    sz += k;
                    ++n;
                }
            }
        }
    }
    if (n == 0) {
        throw Error(ErrorCode::EmptyMask, "centroid of an empty mask");
    }
    const double inv = 1.0 / static_cast<double>(n);
    return {sx * inv, sy * inv, sz * inv};
}

StabilizedSeries stabilize_centroid(const CineSeries &series) {
    series.validate();
    if (!series.masks) {
        throw Error(ErrorCode::MissingMasks, "centroid stabilization needs per-phase masks");
    }
    const auto &masks = *series.masks;
    const Vec3 ref = mask_centroid(masks[series.reference_phase]);

    StabilizedSeries out;
    out.series.reference_phase = series.reference_phase;
    out.series.masks.emplace();
    for (std::size_t t = 0; t < series.phase_count(); ++t) {
        Vec3 c;
        try {
            c = mask_centroid(masks[t]);
        } catch (const Error &) {
            throw Error(ErrorCode::EmptyMask, "mask of phase " + std::to_string(t) + " is empty");
        }
        const Index3 shift{static_cast<int>(std::lround(ref[0] - c[0])), static_cast<int>(std::lround(ref[1] - c[1])),
                           static_cast<int>(std::lround(ref[2] - c[2]))};
        out.series.phases.push_back(translate(series.phases[t], shift));
        out.series.masks->push_back(translate(masks[t], shift));
        out.shifts.push_back(shift);
    }
    return out;
}

} // namespace atriareg
