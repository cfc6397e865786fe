#include "atriareg/energy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "atriareg/error.hpp"
#include "atriareg/parallel.hpp"
#include "atriareg/transform.hpp"

namespace atriareg {

namespace {

// Sums f(k) for every slice k. Each slice is reduced by one thread and slice
// totals are added in slice order, so the result is thread-count independent.
template <typename Fn>
double sum_over_slices(int nz, Fn &&slice_sum) {
    std::vector<double> partial(static_cast<std::size_t>(nz), 0.0);
#pragma omp parallel for schedule(static) num_threads(worker_threads())
    for (int k = 0; k < nz; ++k) {
        partial[k] = slice_sum(k);
    }
    return ordered_sum(partial);
}

} // namespace

ImageTermResult similarity_mse(const Volume3 &warped, const Volume3 &fixed) {
    require_same_geometry(warped.geometry(), fixed.geometry(), "similarity_mse");
    const Dims d = warped.dims();
    const double n = static_cast<double>(d.count());
    const auto w = warped.data();
    const auto f = fixed.data();
    ImageTermResult out{0.0, Volume3(warped.geometry())};
    auto g = out.gradient.data();
    const std::size_t slice = static_cast<std::size_t>(d.nx) * d.ny;
    const double sum = sum_over_slices(d.nz, [&](int k) {
        double s = 0.0;
        for (std::size_t idx = k * slice; idx < (k + 1) * slice; ++idx) {
            const double r = w[idx] - f[idx];
            s += r * r;
            g[idx] = 2.0 * r / n;
        }
        return s;
    });
    out.value = sum / n;
    return out;
}

ImageTermResult similarity_ncc(const Volume3 &warped, const Volume3 &fixed) {
    require_same_geometry(warped.geometry(), fixed.geometry(), "similarity_ncc");
    const auto w = warped.data();
    const auto f = fixed.data();
    const std::size_t n = w.size();
    const double mean_w = ordered_sum(w) / static_cast<double>(n);
    const double mean_f = ordered_sum(f) / static_cast<double>(n);
    std::vector<double> ab(n), aa(n), bb(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = w[i] - mean_w, b = f[i] - mean_f;
        ab[i] = a * b;
        aa[i] = a * a;
        bb[i] = b * b;
    }
    const double sab = ordered_sum(ab), saa = ordered_sum(aa), sbb = ordered_sum(bb);
    ImageTermResult out{1.0, Volume3(warped.geometry())};
    if (!(saa > 0.0) || !(sbb > 0.0)) {
        return out;
    }
    const double norm = std::sqrt(saa * sbb);
    const double ncc = sab / norm;
    out.value = 1.0 - ncc;
    auto g = out.gradient.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = w[i] - mean_w, b = f[i] - mean_f;
        g[i] = -(b / norm - ncc * a / saa);
    }
    return out;
}

ImageTermResult similarity(SimilarityKind kind, const Volume3 &warped, const Volume3 &fixed) {
    switch (kind) {
    case SimilarityKind::NormalizedCrossCorrelation: return similarity_ncc(warped, fixed);
    case SimilarityKind::MeanSquaredError: break;
    }
    return similarity_mse(warped, fixed);
}

namespace {

// Residual planes of the six second-difference operators for one z slice,
// zero-padded by one voxel in x and y. Where a stencil does not fit the
// residual is zero, so the adjoint can read neighbours without bounds checks.
struct ResidualSlice {
    std::vector<double> r[6]; // xx, yy, zz, xy, xz, yz
};

class BendingStencils {
  public:
    explicit BendingStencils(const Dims &dims)
        : d_(dims), pw_(dims.nx + 2), plane_(static_cast<std::size_t>(dims.nx) * dims.ny),
          padded_(static_cast<std::size_t>(dims.nx + 2) * (dims.ny + 2)) {}

    // Adds the per-slice energy of component `u` into slice_sums and, when
    // `grad` is non-empty, writes scale * L^T L u into it.
    void run(std::span<const double> u, std::vector<double> &slice_sums, std::span<double> grad, double scale) const {
        const int threads = std::max(1, std::min(worker_threads(), d_.nz));
#pragma omp parallel for schedule(static) num_threads(threads)
        for (int chunk = 0; chunk < threads; ++chunk) {
            const int k0 = d_.nz * chunk / threads;
            const int k1 = d_.nz * (chunk + 1) / threads;
            ResidualSlice ring[3];
            for (auto &slot : ring) {
                for (auto &plane : slot.r) {
                    plane.assign(padded_, 0.0);
                }
            }
            const auto slot = [&](int k) -> ResidualSlice & { return ring[(k + 3) % 3]; };
            // slices k0-1 and k0 first; their energy belongs to other chunks or k0
            fill(u, k0 - 1, slot(k0 - 1));
            slice_sums[k0] += fill(u, k0, slot(k0));
            for (int k = k0; k < k1; ++k) {
                const double e = fill(u, k + 1, slot(k + 1));
                if (k + 1 < k1) {
                    slice_sums[k + 1] += e;
                }
                if (!grad.empty()) {
                    adjoint(slot(k - 1), slot(k), slot(k + 1), k, grad, scale);
                }
            }
        }
    }

  private:
    std::size_t pad(int i, int j) const noexcept {
        return static_cast<std::size_t>(j + 1) * pw_ + static_cast<std::size_t>(i + 1);
    }

    // Residuals of slice k (zeros outside [0, nz)); returns its energy.
    double fill(std::span<const double> u, int k, ResidualSlice &out) const {
        if (k < 0 || k >= d_.nz) {
            for (auto &plane : out.r) {
                std::fill(plane.begin(), plane.end(), 0.0);
            }
            return 0.0;
        }
        const std::ptrdiff_t sy = d_.nx;
        const std::ptrdiff_t sz = static_cast<std::ptrdiff_t>(plane_);
        const bool kin = k > 0 && k < d_.nz - 1;
        double energy = 0.0;
        for (int j = 0; j < d_.ny; ++j) {
            const bool jin = j > 0 && j < d_.ny - 1;
            std::size_t idx = k * plane_ + static_cast<std::size_t>(j) * d_.nx;
            std::size_t p = pad(0, j);
            for (int i = 0; i < d_.nx; ++i, ++idx, ++p) {
                const bool iin = i > 0 && i < d_.nx - 1;
                const double c2 = 2.0 * u[idx];
                const double xx = iin ? u[idx + 1] - c2 + u[idx - 1] : 0.0;
                const double yy = jin ? u[idx + sy] - c2 + u[idx - sy] : 0.0;
                const double zz = kin ? u[idx + sz] - c2 + u[idx - sz] : 0.0;
                const double xy = (iin && jin) ? cross(u, idx, 1, sy) : 0.0;
                const double xz = (iin && kin) ? cross(u, idx, 1, sz) : 0.0;
                const double yz = (jin && kin) ? cross(u, idx, sy, sz) : 0.0;
                out.r[0][p] = xx;
                out.r[1][p] = yy;
                out.r[2][p] = zz;
                out.r[3][p] = xy;
                out.r[4][p] = xz;
                out.r[5][p] = yz;
                energy += xx * xx + yy * yy + zz * zz + 2.0 * (xy * xy + xz * xz + yz * yz);
            }
        }
        return energy;
    }

    static double cross(std::span<const double> u, std::size_t idx, std::ptrdiff_t sa, std::ptrdiff_t sb) noexcept {
        return 0.25 * (u[idx + sa + sb] - u[idx + sa - sb] - u[idx - sa + sb] + u[idx - sa - sb]);
    }

    // Every stencil is symmetric under o -> -o, so the adjoint is the same
    // stencil applied to the zero-extended residuals.
    void adjoint(const ResidualSlice &prev, const ResidualSlice &cur, const ResidualSlice &next, int k,
                 std::span<double> grad, double scale) const {
        const std::ptrdiff_t row = pw_;
        for (int j = 0; j < d_.ny; ++j) {
            std::size_t idx = k * plane_ + static_cast<std::size_t>(j) * d_.nx;
            std::size_t p = pad(0, j);
            for (int i = 0; i < d_.nx; ++i, ++idx, ++p) {
                const double xx = cur.r[0][p + 1] - 2.0 * cur.r[0][p] + cur.r[0][p - 1];
                const double yy = cur.r[1][p + row] - 2.0 * cur.r[1][p] + cur.r[1][p - row];
                const double zz = next.r[2][p] - 2.0 * cur.r[2][p] + prev.r[2][p];
                const auto &rxy = cur.r[3];
                const double xy = rxy[p + 1 + row] - rxy[p + 1 - row] - rxy[p - 1 + row] + rxy[p - 1 - row];
                const double xz = next.r[4][p + 1] - prev.r[4][p + 1] - next.r[4][p - 1] + prev.r[4][p - 1];
                const double yz = next.r[5][p + row] - prev.r[5][p + row] - next.r[5][p - row] + prev.r[5][p - row];
                grad[idx] = scale * (xx + yy + zz + 0.5 * (xy + xz + yz));
            }
        }
    }

    Dims d_;
    std::size_t pw_;
    std::size_t plane_;
    std::size_t padded_;
};

void require_stencil_fit(const Dims &d) {
    if (d.nx < 3 || d.ny < 3 || d.nz < 3) {
        throw Error(ErrorCode::TooSmall, "bending energy needs at least 3 voxels per axis");
    }
}

// Energy of `field`; when `grad` is non-empty it receives
// grad_scale * L^T L u (the energy gradient is 2 L^T L u / N).
double bending_into(const DisplacementField &field, DisplacementField *grad, double grad_scale) {
    const Dims d = field.dims();
    require_stencil_fit(d);
    const BendingStencils stencils(d);
    const double n = static_cast<double>(d.count());
    std::vector<double> slice_sums(static_cast<std::size_t>(d.nz), 0.0);
    for (int c = 0; c < 3; ++c) {
        stencils.run(field.component(c), slice_sums, grad ? grad->component(c) : std::span<double>{}, grad_scale);
    }
    return ordered_sum(slice_sums) / n;
}

} // namespace

FieldTermResult bending_energy(const DisplacementField &field) {
    FieldTermResult out;
    out.gradient = DisplacementField(field.geometry());
    out.value = bending_into(field, &out.gradient, 2.0 / static_cast<double>(field.voxel_count()));
    return out;
}

double bending_energy_value(const DisplacementField &field) { return bending_into(field, nullptr, 0.0); }

LossResult total_loss(const Volume3 &moving, const Volume3 &fixed, const DisplacementField &field, double lambda,
                      SimilarityKind kind) {
    LossResult out;
    total_loss_into(moving, fixed, field, lambda, kind, out);
    return out;
}

void total_loss_into(const Volume3 &moving, const Volume3 &fixed, const DisplacementField &field, double lambda,
                     SimilarityKind kind, LossResult &out) {
    require_same_geometry(moving.geometry(), fixed.geometry(), "total_loss images");
    if (field.dims() != fixed.dims()) {
        throw Error(ErrorCode::GeometryMismatch, "total_loss: field and image dimensions differ");
    }
    if (!(lambda >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
    }
    const Dims d = fixed.dims();
    const std::size_t n = d.count();
    const double inv_n = 1.0 / static_cast<double>(n);
    if (out.gradient.dims() != d || out.gradient.geometry() != field.geometry()) {
        out.gradient = DisplacementField(field.geometry());
    }

    // regularizer gradient first; the similarity term is accumulated on top
    const double bend = bending_into(field, &out.gradient, 2.0 * lambda * inv_n);

    const auto ux = field.component(0), uy = field.component(1), uz = field.component(2);
    auto gx = out.gradient.component(0), gy = out.gradient.component(1), gz = out.gradient.component(2);
    const auto f = fixed.data();
    double sim = 0.0;
    if (kind == SimilarityKind::MeanSquaredError) {
        sim = sum_over_slices(d.nz, [&](int k) {
                  double s = 0.0;
                  for (int j = 0; j < d.ny; ++j) {
                      std::size_t idx = d.index(0, j, k);
                      for (int i = 0; i < d.nx; ++i, ++idx) {
                          const TrilinearSample smp =
                              sample_trilinear_with_gradient(moving, {i + ux[idx], j + uy[idx], k + uz[idx]});
                          const double r = smp.value - f[idx];
                          s += r * r;
                          const double w = 2.0 * r * inv_n;
                          gx[idx] += w * smp.gradient[0];
                          gy[idx] += w * smp.gradient[1];
                          gz[idx] += w * smp.gradient[2];
                      }
                  }
                  return s;
              }) *
              inv_n;
    } else {
        Volume3 warped(fixed.geometry());
        std::vector<double> dm(3 * n);
        auto w = warped.data();
#pragma omp parallel for schedule(static) num_threads(worker_threads())
        for (int k = 0; k < d.nz; ++k) {
            for (int j = 0; j < d.ny; ++j) {
                std::size_t idx = d.index(0, j, k);
                for (int i = 0; i < d.nx; ++i, ++idx) {
                    const TrilinearSample smp =
                        sample_trilinear_with_gradient(moving, {i + ux[idx], j + uy[idx], k + uz[idx]});
                    w[idx] = smp.value;
                    dm[idx] = smp.gradient[0];
                    dm[n + idx] = smp.gradient[1];
                    dm[2 * n + idx] = smp.gradient[2];
                }
            }
        }
        const ImageTermResult term = similarity(kind, warped, fixed);
        sim = term.value;
        const auto gw = term.gradient.data();
        for (std::size_t idx = 0; idx < n; ++idx) {
            gx[idx] += gw[idx] * dm[idx];
            gy[idx] += gw[idx] * dm[n + idx];
            gz[idx] += gw[idx] * dm[2 * n + idx];
        }
    }
    out.loss = LossBreakdown::compose(sim, bend, lambda);
}

} // namespace atriareg
