#include "atriareg/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "atriareg/error.hpp"
#include "atriareg/parallel.hpp"

namespace atriareg {

void Geometry::validate() const {
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) {
        throw Error(ErrorCode::ConfigInvalid, "volume dimensions must be positive");
    }
    for (double s : spacing) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw Error(ErrorCode::ConfigInvalid, "voxel spacing must be positive and finite");
        }
    }
}

void require_same_geometry(const Geometry &a, const Geometry &b, const char *what) {
    if (a.dims != b.dims) {
        throw Error(ErrorCode::GeometryMismatch, std::string(what) + ": dimensions differ");
    }
    for (int d = 0; d < 3; ++d) {
        if (std::abs(a.spacing[d] - b.spacing[d]) > 1e-6 * std::max(1.0, std::abs(a.spacing[d])) ||
            std::abs(a.origin[d] - b.origin[d]) > 1e-6 * std::max(1.0, std::abs(a.origin[d]))) {
            throw Error(ErrorCode::GeometryMismatch, std::string(what) + ": spacing or origin differ");
        }
    }
}

Volume3::Volume3(const Geometry &geom, double fill) : geom_(geom) {
    geom_.validate();
    data_.assign(geom_.dims.count(), fill);
}

Volume3::Volume3(const Geometry &geom, std::vector<double> data) : geom_(geom), data_(std::move(data)) {
    geom_.validate();
    if (data_.size() != geom_.dims.count()) {
        throw Error(ErrorCode::ConfigInvalid, "volume data length does not match dimensions");
    }
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorCode::NonFiniteData, "volume contains NaN or Inf");
    }
}

double Volume3::sum() const noexcept { return ordered_sum(data_); }

Mask3::Mask3(const Geometry &geom, bool fill) : geom_(geom) {
    geom_.validate();
    bits_.assign(geom_.dims.count(), fill ? 1 : 0);
}

Mask3::Mask3(const Geometry &geom, std::vector<std::uint8_t> bits) : geom_(geom), bits_(std::move(bits)) {
    geom_.validate();
    if (bits_.size() != geom_.dims.count()) {
        throw Error(ErrorCode::ConfigInvalid, "mask data length does not match dimensions");
    }
    for (auto &b : bits_) {
        b = b != 0 ? 1 : 0;
    }
}

std::size_t Mask3::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Volume3 to_volume(const Mask3 &m) {
    Volume3 out(m.geometry());
    auto dst = out.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
        dst[i] = m.test_linear(i) ? 1.0 : 0.0;
    }
    return out;
}

void CineSeries::validate() const {
    if (phases.empty()) {
        throw Error(ErrorCode::ConfigInvalid, "series has no phases");
    }
    if (reference_phase < 0 || static_cast<std::size_t>(reference_phase) >= phases.size()) {
        throw Error(ErrorCode::ConfigInvalid, "reference phase out of range");
    }
    const Geometry &g = phases.front().geometry();
    for (const auto &v : phases) {
        require_same_geometry(g, v.geometry(), "series phase");
    }
    if (masks) {
        if (masks->size() != phases.size()) {
            throw Error(ErrorCode::ConfigInvalid, "mask count differs from phase count");
        }
        for (const auto &m : *masks) {
            require_same_geometry(g, m.geometry(), "series mask");
        }
    }
}

} // namespace atriareg
