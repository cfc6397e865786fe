#pragma once

#include <span>
#include <vector>

#include "atriareg/volume.hpp"

namespace atriareg {

enum class FieldUnits { Voxel, Millimetre };

// Dense displacement u(x) on the fixed grid; deformation phi(x) = x + u(x).
// Components are stored planar: all x, then all y, then all z, each in
// x-fastest voxel order (the NIfTI 4D layout with dim[4] = 3).
class DisplacementField {
  public:
    DisplacementField() = default;
    explicit DisplacementField(const Geometry &geom, FieldUnits units = FieldUnits::Voxel);
    // Throws ConfigInvalid on length mismatch, NonFiniteData on NaN/Inf.
    DisplacementField(const Geometry &geom, std::vector<double> planar, FieldUnits units = FieldUnits::Voxel);

    const Geometry &geometry() const noexcept { return geom_; }
    const Dims &dims() const noexcept { return geom_.dims; }
    FieldUnits units() const noexcept { return units_; }
    std::size_t voxel_count() const noexcept { return geom_.dims.count(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> component(int c) const noexcept {
        return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * voxel_count(), voxel_count());
    }
    std::span<double> component(int c) noexcept {
        return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * voxel_count(), voxel_count());
    }

    Vec3 at(int i, int j, int k) const noexcept {
        const std::size_t idx = geom_.dims.index(i, j, k);
        const std::size_t n = voxel_count();
        return {data_[idx], data_[n + idx], data_[2 * n + idx]};
    }
    void set(int i, int j, int k, const Vec3 &u) noexcept {
        const std::size_t idx = geom_.dims.index(i, j, k);
        const std::size_t n = voxel_count();
        data_[idx] = u[0];
        data_[n + idx] = u[1];
        data_[2 * n + idx] = u[2];
    }

    bool operator==(const DisplacementField &) const = default;

  private:
    Geometry geom_;
    FieldUnits units_ = FieldUnits::Voxel;
    std::vector<double> data_;
};

} // namespace atriareg
