#include "atriareg/morphology.hpp"

#include <cmath>

#include "atriareg/error.hpp"

namespace atriareg {

Mask3 extract_contour(const Mask3 &m) {
    const Dims &d = m.dims();
    Mask3 out(m.geometry());
    for (int k = 0; k < d.nz; ++k) {
        for (int j = 0; j < d.ny; ++j) {
            for (int i = 0; i < d.nx; ++i) {
                if (!m(i, j, k)) {
                    continue;
                }
                const bool interior = m.at_or_unset(i - 1, j, k) && m.at_or_unset(i + 1, j, k) &&
                                      m.at_or_unset(i, j - 1, k) && m.at_or_unset(i, j + 1, k) &&
                                      m.at_or_unset(i, j, k - 1) && m.at_or_unset(i, j, k + 1);
                if (!interior) {
                    out.set(i, j, k);
                }
            }
        }
    }
    return out;
}

std::vector<Index3> ball_offsets(double radius_voxels) {
    if (!(radius_voxels >= 0.0) || !std::isfinite(radius_voxels)) {
        throw Error(ErrorCode::InvalidArgument, "dilation radius must be finite and non-negative");
    }
    const int reach = static_cast<int>(std::floor(radius_voxels));
    const double r2 = radius_voxels * radius_voxels;
    std::vector<Index3> offsets;
    for (int dz = -reach; dz <= reach; ++dz) {
        for (int dy = -reach; dy <= reach; ++dy) {
            for (int dx = -reach; dx <= reach; ++dx) {
                if (static_cast<double>(dx * dx + dy * dy + dz * dz) <= r2) {
                    offsets.push_back({dx, dy, dz});
                }
            }
        }
    }
    return offsets;
}

Mask3 dilate_sphere(const Mask3 &m, double radius_voxels) {
    const auto offsets = ball_offsets(radius_voxels);
    const Dims &d = m.dims();
    Mask3 out(m.geometry());
    for (int k = 0; k < d.nz; ++k) {
        for (int j = 0; j < d.ny; ++j) {
            for (int i = 0; i < d.nx; ++i) {
                if (!m(i, j, k)) {
                    continue;
                }
                for (const auto &o : offsets) {
                    const int x = i + o[0], y = j + o[1], z = k + o[2];
                    if (d.contains(x, y, z)) {
                        out.set(x, y, z);
                    }
                }
            }
        }
    }
    return out;
}

Volume3 apply_mask(const Volume3 &v, const Mask3 &m) {
    require_same_geometry(v.geometry(), m.geometry(), "apply_mask");
    Volume3 out(v.geometry());
    auto dst = out.data();
    const auto src = v.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = m.test_linear(i) ? src[i] : 0.0;
    }
    return out;
}

Mask3 contour_band_mask(const Mask3 &m, double radius_voxels) {
    return dilate_sphere(extract_contour(m), radius_voxels);
}

} // namespace atriareg
