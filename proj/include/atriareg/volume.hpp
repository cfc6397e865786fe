#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace atriareg {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

struct Dims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    int operator[](int axis) const noexcept { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
    bool contains(int i, int j, int k) const noexcept {
        return i >= 0 && j >= 0 && k >= 0 && i < nx && j < ny && k < nz;
    }
    // x-fastest linear order
    std::size_t index(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(k) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(j)) *
                   static_cast<std::size_t>(nx) +
               static_cast<std::size_t>(i);
    }
    bool operator==(const Dims &) const = default;
};

// Shared by volumes, masks and displacement fields. Physical position of
// voxel (i,j,k) is origin + (i*sx, j*sy, k*sz) in mm.
struct Geometry {
    Dims dims;
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};

    // Throws ConfigInvalid for non-positive dims or spacing.
    void validate() const;
    bool operator==(const Geometry &) const = default;
};

// Throws GeometryMismatch when a and b differ.
void require_same_geometry(const Geometry &a, const Geometry &b, const char *what);

class Volume3 {
  public:
    Volume3() = default;
    explicit Volume3(const Geometry &geom, double fill = 0.0);
    // Throws ConfigInvalid on length mismatch, NonFiniteData on NaN/Inf.
    Volume3(const Geometry &geom, std::vector<double> data);

    const Geometry &geometry() const noexcept { return geom_; }
    const Dims &dims() const noexcept { return geom_.dims; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    double operator()(int i, int j, int k) const noexcept { return data_[geom_.dims.index(i, j, k)]; }
    double &operator()(int i, int j, int k) noexcept { return data_[geom_.dims.index(i, j, k)]; }

    double sum() const noexcept;

  private:
    Geometry geom_;
    std::vector<double> data_;
};

class Mask3 {
  public:
    Mask3() = default;
    explicit Mask3(const Geometry &geom, bool fill = false);
    // Nonzero bytes count as set; stored as exactly 0/1.
    Mask3(const Geometry &geom, std::vector<std::uint8_t> bits);

    const Geometry &geometry() const noexcept { return geom_; }
    const Dims &dims() const noexcept { return geom_.dims; }
    std::size_t size() const noexcept { return bits_.size(); }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    bool operator()(int i, int j, int k) const noexcept { return bits_[geom_.dims.index(i, j, k)] != 0; }
    // Out-of-range reads as unset.
    bool at_or_unset(int i, int j, int k) const noexcept {
        return geom_.dims.contains(i, j, k) && (*this)(i, j, k);
    }
    void set(int i, int j, int k, bool value = true) noexcept {
        bits_[geom_.dims.index(i, j, k)] = value ? 1 : 0;
    }
    void set_linear(std::size_t idx, bool value = true) noexcept { bits_[idx] = value ? 1 : 0; }
    bool test_linear(std::size_t idx) const noexcept { return bits_[idx] != 0; }

    std::size_t count() const noexcept;
    bool empty() const noexcept { return count() == 0; }

    bool operator==(const Mask3 &other) const = default;

  private:
    Geometry geom_;
    std::vector<std::uint8_t> bits_;
};

// Indicator of the mask as a real volume (1 set, 0 unset).
Volume3 to_volume(const Mask3 &m);

struct CineSeries {
    std::vector<Volume3> phases;
    std::optional<std::vector<Mask3>> masks;
    int reference_phase = 0;

    std::size_t phase_count() const noexcept { return phases.size(); }
    const Geometry &geometry() const { return phases.front().geometry(); }
    // Shared geometry, mask count and reference index; throws GeometryMismatch
    // or ConfigInvalid.
    void validate() const;
};

inline constexpr int kDefaultPhaseCount = 20;

} // namespace atriareg
