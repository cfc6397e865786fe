#include "atriareg/transform.hpp"

#include <algorithm>
#include <cmath>

#include "atriareg/error.hpp"
#include "atriareg/parallel.hpp"

namespace atriareg {

DisplacementField::DisplacementField(const Geometry &geom, FieldUnits units) : geom_(geom), units_(units) {
    geom_.validate();
    data_.assign(3 * geom_.dims.count(), 0.0);
}

DisplacementField::DisplacementField(const Geometry &geom, std::vector<double> planar, FieldUnits units)
    : geom_(geom), units_(units), data_(std::move(planar)) {
    geom_.validate();
    if (data_.size() != 3 * geom_.dims.count()) {
        throw Error(ErrorCode::ConfigInvalid, "field data length must be 3 * voxel count");
    }
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorCode::NonFiniteData, "field contains NaN or Inf");
    }
}

namespace {

struct Corners {
    double c[8]; // c[dx + 2*dy + 4*dz]
    double fx, fy, fz;
};

inline Corners gather(const Volume3 &v, const Vec3 &pos) noexcept {
    const Dims &d = v.dims();
    const double flx = std::floor(pos[0]), fly = std::floor(pos[1]), flz = std::floor(pos[2]);
    Corners out{};
    out.fx = pos[0] - flx;
    out.fy = pos[1] - fly;
    out.fz = pos[2] - flz;
    // Positions far outside the array would overflow int; they sample zero anyway.
    if (flx < -2.0 || fly < -2.0 || flz < -2.0 || flx > d.nx + 1.0 || fly > d.ny + 1.0 || flz > d.nz + 1.0) {
        return out;
    }
    const int i0 = static_cast<int>(flx), j0 = static_cast<int>(fly), k0 = static_cast<int>(flz);
    const auto data = v.data();
    if (i0 >= 0 && j0 >= 0 && k0 >= 0 && i0 + 1 < d.nx && j0 + 1 < d.ny && k0 + 1 < d.nz) {
        const std::size_t base = d.index(i0, j0, k0);
        const std::size_t sy = static_cast<std::size_t>(d.nx);
        const std::size_t sz = sy * static_cast<std::size_t>(d.ny);
        out.c[0] = data[base];
        out.c[1] = data[base + 1];
        out.c[2] = data[base + sy];
        out.c[3] = data[base + sy + 1];
        out.c[4] = data[base + sz];
        out.c[5] = data[base + sz + 1];
        out.c[6] = data[base + sz + sy];
        out.c[7] = data[base + sz + sy + 1];
        return out;
    }
    for (int n = 0; n < 8; ++n) {
        const int i = i0 + (n & 1), j = j0 + ((n >> 1) & 1), k = k0 + ((n >> 2) & 1);
        out.c[n] = d.contains(i, j, k) ? data[d.index(i, j, k)] : 0.0;
    }
    return out;
}

} // namespace

double sample_trilinear(const Volume3 &v, const Vec3 &pos) noexcept {
    const Corners g = gather(v, pos);
    const double gx = 1.0 - g.fx, gy = 1.0 - g.fy, gz = 1.0 - g.fz;
    const double c00 = g.c[0] * gx + g.c[1] * g.fx;
    const double c10 = g.c[2] * gx + g.c[3] * g.fx;
    const double c01 = g.c[4] * gx + g.c[5] * g.fx;
    const double c11 = g.c[6] * gx + g.c[7] * g.fx;
    const double c0 = c00 * gy + c10 * g.fy;
    const double c1 = c01 * gy + c11 * g.fy;
    return c0 * gz + c1 * g.fz;
}

TrilinearSample sample_trilinear_with_gradient(const Volume3 &v, const Vec3 &pos) noexcept {
    const Corners g = gather(v, pos);
    const double gx = 1.0 - g.fx, gy = 1.0 - g.fy, gz = 1.0 - g.fz;
    const double c00 = g.c[0] * gx + g.c[1] * g.fx;
    const double c10 = g.c[2] * gx + g.c[3] * g.fx;
    const double c01 = g.c[4] * gx + g.c[5] * g.fx;
    const double c11 = g.c[6] * gx + g.c[7] * g.fx;
    const double c0 = c00 * gy + c10 * g.fy;
    const double c1 = c01 * gy + c11 * g.fy;

    TrilinearSample s;
    s.value = c0 * gz + c1 * g.fz;
    const double dx00 = g.c[1] - g.c[0], dx10 = g.c[3] - g.c[2];
    const double dx01 = g.c[5] - g.c[4], dx11 = g.c[7] - g.c[6];
    s.gradient[0] = (dx00 * gy + dx10 * g.fy) * gz + (dx01 * gy + dx11 * g.fy) * g.fz;
    s.gradient[1] = (c10 - c00) * gz + (c11 - c01) * g.fz;
    s.gradient[2] = c1 - c0;
    return s;
}

Volume3 warp_trilinear(const Volume3 &moving, const DisplacementField &field) {
    if (moving.dims() != field.dims()) {
        throw Error(ErrorCode::GeometryMismatch, "warp_trilinear: field and moving image dimensions differ");
    }
    Geometry out_geom = moving.geometry();
    out_geom.spacing = field.geometry().spacing;
    out_geom.origin = field.geometry().origin;
    Volume3 out(out_geom);
    const Dims d = field.dims();
    const auto ux = field.component(0), uy = field.component(1), uz = field.component(2);
    auto dst = out.data();
#pragma omp parallel for schedule(static) num_threads(worker_threads())
    for (int k = 0; k < d.nz; ++k) {
        for (int j = 0; j < d.ny; ++j) {
            std::size_t idx = d.index(0, j, k);
            for (int i = 0; i < d.nx; ++i, ++idx) {
                dst[idx] = sample_trilinear(moving, {i + ux[idx], j + uy[idx], k + uz[idx]});
            }
        }
    }
    return out;
}

Mask3 warp_mask(const Mask3 &mask, const DisplacementField &field, double threshold) {
    const Volume3 warped = warp_trilinear(to_volume(mask), field);
    Mask3 out(warped.geometry());
    const auto src = warped.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        out.set_linear(i, src[i] > threshold);
    }
    return out;
}

namespace {

// d/d(axis) of a component at (i,j,k): central, one-sided at the borders.
inline double derivative(std::span<const double> comp, const Dims &d, int i, int j, int k, int axis) noexcept {
    int pos = axis == 0 ? i : (axis == 1 ? j : k);
    const int n = d[axis];
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? static_cast<std::size_t>(d.nx)
                                                          : static_cast<std::size_t>(d.nx) * d.ny);
    const std::size_t idx = d.index(i, j, k);
    if (pos == 0) {
        return comp[idx + stride] - comp[idx];
    }
    if (pos == n - 1) {
        return comp[idx] - comp[idx - stride];
    }
    return 0.5 * (comp[idx + stride] - comp[idx - stride]);
}

} // namespace

Volume3 jacobian_det_map(const DisplacementField &field) {
    const Dims d = field.dims();
    if (d.nx < 3 || d.ny < 3 || d.nz < 3) {
        throw Error(ErrorCode::TooSmall, "Jacobian needs at least 3 voxels per axis");
    }
    Volume3 out(field.geometry());
    auto dst = out.data();
    const std::span<const double> comps[3] = {field.component(0), field.component(1), field.component(2)};
#pragma omp parallel for schedule(static) num_threads(worker_threads())
    for (int k = 0; k < d.nz; ++k) {
        for (int j = 0; j < d.ny; ++j) {
            for (int i = 0; i < d.nx; ++i) {
                double a[3][3];
                for (int c = 0; c < 3; ++c) {
                    for (int ax = 0; ax < 3; ++ax) {
                        a[c][ax] = derivative(comps[c], d, i, j, k, ax) + (c == ax ? 1.0 : 0.0);
                    }
                }
                dst[d.index(i, j, k)] = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                                        a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                                        a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
            }
        }
    }
    return out;
}

DisplacementField compose_with_shift(const DisplacementField &field, const Index3 &shift) {
    DisplacementField out = field;
    for (int c = 0; c < 3; ++c) {
        for (double &v : out.component(c)) {
            v += shift[c];
        }
    }
    return out;
}

DisplacementField field_to_mm(const DisplacementField &field) {
    if (field.units() != FieldUnits::Voxel) {
        throw Error(ErrorCode::InvalidArgument, "field is already in millimetres");
    }
    std::vector<double> scaled(field.data().begin(), field.data().end());
    const std::size_t n = field.voxel_count();
    for (int c = 0; c < 3; ++c) {
        const double s = field.geometry().spacing[c];
        for (std::size_t i = 0; i < n; ++i) {
            scaled[c * n + i] *= s;
        }
    }
    return DisplacementField(field.geometry(), std::move(scaled), FieldUnits::Millimetre);
}

} // namespace atriareg
