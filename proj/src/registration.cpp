#include "atriareg/registration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "atriareg/error.hpp"
#include "atriareg/parallel.hpp"

namespace atriareg {

void RegistrationConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorCode::ConfigInvalid, "lambda must be finite and non-negative");
    }
    if (levels.empty() || levels.back() != 1) {
        throw Error(ErrorCode::ConfigInvalid, "levels must end with factor 1");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 1 || (i > 0 && levels[i] >= levels[i - 1])) {
            throw Error(ErrorCode::ConfigInvalid, "levels must be positive and strictly decreasing");
        }
    }
    if (max_iters_per_level < 1 || stop_window < 1) {
        throw Error(ErrorCode::ConfigInvalid, "iteration limits must be positive");
    }
    if (!(step_size > 0.0) || !(adam_eps > 0.0) || !(stop_rel_tol >= 0.0)) {
        throw Error(ErrorCode::ConfigInvalid, "step size and eps must be positive, tolerance non-negative");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "Adam betas must lie in [0, 1)");
    }
}

namespace {

Geometry pooled_geometry(const Geometry &g, int factor) {
    Geometry out = g;
    for (int a = 0; a < 3; ++a) {
        out.spacing[a] = g.spacing[a] * factor;
        out.origin[a] = g.origin[a] + 0.5 * (factor - 1) * g.spacing[a];
    }
    const auto up = [factor](int n) { return (n + factor - 1) / factor; };
    out.dims = Dims{up(g.dims.nx), up(g.dims.ny), up(g.dims.nz)};
    return out;
}

// Block means of `src`. With `zero_pad`, out-of-range voxels count as zeros;
// otherwise only in-range voxels are averaged.
void pool(std::span<const double> src, const Dims &fine, const Dims &coarse, int factor, bool zero_pad,
          std::span<double> dst) {
    const double full = static_cast<double>(factor) * factor * factor;
    for (int k = 0; k < coarse.nz; ++k) {
        for (int j = 0; j < coarse.ny; ++j) {
            for (int i = 0; i < coarse.nx; ++i) {
                double s = 0.0;
                int n = 0;
                for (int z = k * factor; z < std::min((k + 1) * factor, fine.nz); ++z) {
                    for (int y = j * factor; y < std::min((j + 1) * factor, fine.ny); ++y) {
                        for (int x = i * factor; x < std::min((i + 1) * factor, fine.nx); ++x) {
                            s += src[fine.index(x, y, z)];
                            ++n;
                        }
                    }
                }
                dst[coarse.index(i, j, k)] = zero_pad ? s / full : s / n;
            }
        }
    }
}

double clamped_trilinear(std::span<const double> c, const Dims &d, double x, double y, double z) {
    x = std::clamp(x, 0.0, d.nx - 1.0);
    y = std::clamp(y, 0.0, d.ny - 1.0);
    z = std::clamp(z, 0.0, d.nz - 1.0);
    const int i0 = std::min(static_cast<int>(x), d.nx - 1), j0 = std::min(static_cast<int>(y), d.ny - 1),
              k0 = std::min(static_cast<int>(z), d.nz - 1);
    const int i1 = std::min(i0 + 1, d.nx - 1), j1 = std::min(j0 + 1, d.ny - 1), k1 = std::min(k0 + 1, d.nz - 1);
    const double fx = x - i0, fy = y - j0, fz = z - k0;
    const auto v = [&](int i, int j, int k) { return c[d.index(i, j, k)]; };
    const double c00 = v(i0, j0, k0) * (1 - fx) + v(i1, j0, k0) * fx;
    const double c10 = v(i0, j1, k0) * (1 - fx) + v(i1, j1, k0) * fx;
    const double c01 = v(i0, j0, k1) * (1 - fx) + v(i1, j0, k1) * fx;
    const double c11 = v(i0, j1, k1) * (1 - fx) + v(i1, j1, k1) * fx;
    return (c00 * (1 - fy) + c10 * fy) * (1 - fz) + (c01 * (1 - fy) + c11 * fy) * fz;
}

} // namespace

Volume3 downsample(const Volume3 &v, int factor) {
    if (factor < 1) {
        throw Error(ErrorCode::ConfigInvalid, "downsample factor must be positive");
    }
    if (factor == 1) {
        return v;
    }
    Volume3 out(pooled_geometry(v.geometry(), factor));
    pool(v.data(), v.dims(), out.dims(), factor, true, out.data());
    return out;
}

DisplacementField restrict_field(const DisplacementField &fine, int factor) {
    if (factor < 1) {
        throw Error(ErrorCode::ConfigInvalid, "restriction factor must be positive");
    }
    if (factor == 1) {
        return fine;
    }
    DisplacementField out(pooled_geometry(fine.geometry(), factor), fine.units());
    for (int c = 0; c < 3; ++c) {
        pool(fine.component(c), fine.dims(), out.dims(), factor, false, out.component(c));
        for (double &u : out.component(c)) {
            u /= factor;
        }
    }
    return out;
}

DisplacementField prolong_field(const DisplacementField &coarse, const Geometry &fine, double ratio) {
    DisplacementField out(fine, coarse.units());
    const Dims fd = fine.dims;
    const Dims cd = coarse.dims();
    const double half = 0.5 * (ratio - 1.0);
    for (int c = 0; c < 3; ++c) {
        const auto src = coarse.component(c);
        auto dst = out.component(c);
        for (int k = 0; k < fd.nz; ++k) {
            const double z = (k - half) / ratio;
            for (int j = 0; j < fd.ny; ++j) {
                const double y = (j - half) / ratio;
                for (int i = 0; i < fd.nx; ++i) {
                    const double x = (i - half) / ratio;
                    dst[fd.index(i, j, k)] = ratio * clamped_trilinear(src, cd, x, y, z);
                }
            }
        }
    }
    return out;
}

namespace {

struct LevelOutcome {
    int iterations = 0;
    bool converged = false;
};

void require_finite(const LossBreakdown &loss) {
    if (!std::isfinite(loss.total)) {
        throw Error(ErrorCode::NonFiniteLoss, "registration loss diverged (check step size and lambda)");
    }
}

// Relative improvement of the total over the last stop_window iterations of
// this level is below the tolerance.
bool window_converged(const std::vector<LossBreakdown> &trace, std::size_t first, const RegistrationConfig &cfg) {
    const std::size_t done = trace.size() - first;
    if (done <= static_cast<std::size_t>(cfg.stop_window)) {
        return false;
    }
    const double before = trace[trace.size() - 1 - cfg.stop_window].total;
    const double now = trace.back().total;
    return (before - now) / std::max(std::abs(before), 1e-300) < cfg.stop_rel_tol;
}

LevelOutcome optimize_level(const Volume3 &moving, const Volume3 &fixed, DisplacementField &field,
                            const RegistrationConfig &cfg, std::vector<LossBreakdown> &trace) {
    constexpr int kMaxHalvings = 8;
    constexpr double kRecovery = 1.25;

    LossResult current = total_loss(moving, fixed, field, cfg.lambda, cfg.similarity);
    require_finite(current.loss);

    const std::size_t n = field.data().size();
    std::vector<double> m(n, 0.0), v(n, 0.0);
    DisplacementField candidate = field;
    LossResult trial;
    double lr = cfg.step_size;
    double b1t = 1.0, b2t = 1.0;
    const std::size_t first = trace.size();

    LevelOutcome outcome;
    for (int it = 0; it < cfg.max_iters_per_level; ++it) {
        if (current.loss.total == 0.0) {
            outcome.converged = true;
            break;
        }
        const auto g = current.gradient.data();
        b1t *= cfg.adam_beta1;
        b2t *= cfg.adam_beta2;
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
        }
        const double c1 = 1.0 / (1.0 - b1t), c2 = 1.0 / (1.0 - b2t);

        bool accepted = false;
        for (int attempt = 0; attempt <= kMaxHalvings; ++attempt) {
            const auto u = field.data();
            auto cu = candidate.data();
            for (std::size_t i = 0; i < n; ++i) {
                cu[i] = u[i] - lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + cfg.adam_eps);
            }
            total_loss_into(moving, fixed, candidate, cfg.lambda, cfg.similarity, trial);
            require_finite(trial.loss);
            if (trial.loss.total <= current.loss.total) {
                std::swap(field, candidate);
                std::swap(current, trial);
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if (!accepted) {
            // no descent along the Adam direction at any tried step length
            outcome.converged = true;
            break;
        }
        lr = std::min(cfg.step_size, lr * kRecovery);
        trace.push_back(current.loss);
        ++outcome.iterations;

        if (window_converged(trace, first, cfg)) {
            outcome.converged = true;
            break;
        }
    }
    return outcome;
}

} // namespace

RegistrationResult register_pair(const Volume3 &moving, const Volume3 &fixed,
                                 const std::optional<DisplacementField> &init, const RegistrationConfig &cfg) {
    cfg.validate();
    require_same_geometry(moving.geometry(), fixed.geometry(), "register_pair");
    if (init && init->dims() != fixed.dims()) {
        throw Error(ErrorCode::GeometryMismatch, "initial field dimensions differ from the images");
    }
    if (init && init->units() != FieldUnits::Voxel) {
        throw Error(ErrorCode::InvalidArgument, "initial field must be in voxel units");
    }

    RegistrationResult result;
    result.converged = true;
    DisplacementField field;
    int previous_factor = 0;
    for (const int factor : cfg.levels) {
        const Volume3 level_moving = downsample(moving, factor);
        const Volume3 level_fixed = downsample(fixed, factor);
        if (previous_factor == 0) {
            field = init ? restrict_field(*init, factor) : DisplacementField(level_fixed.geometry());
        } else {
            field = prolong_field(field, level_fixed.geometry(),
                                  static_cast<double>(previous_factor) / static_cast<double>(factor));
        }
        const LevelOutcome outcome = optimize_level(level_moving, level_fixed, field, cfg, result.loss_trace);
        result.iterations_used.push_back(outcome.iterations);
        result.converged = result.converged && outcome.converged;
        previous_factor = factor;
    }
    // keep the caller's geometry exactly (pooling may round spacing/origin)
    result.field = DisplacementField(fixed.geometry(), std::vector<double>(field.data().begin(), field.data().end()));
    return result;
}

std::vector<RegistrationResult> track_cycle(const CineSeries &series, const RegistrationConfig &cfg) {
    series.validate();
    cfg.validate();
    const Volume3 &moving = series.phases[series.reference_phase];
    const int phases = static_cast<int>(series.phase_count());
    std::vector<RegistrationResult> results(series.phase_count());

    const auto run = [&](int t, const std::optional<DisplacementField> &init) {
        try {
            results[t] = register_pair(moving, series.phases[t], init, cfg);
        } catch (const Error &e) {
            throw Error(e.code(), "phase " + std::to_string(t) + ": " + e.detail());
        }
    };

    if (cfg.warm_start) {
        for (int t = 0; t < phases; ++t) {
            run(t, t > 0 ? std::optional<DisplacementField>(results[t - 1].field) : std::nullopt);
        }
    } else {
        for (int t = 0; t < phases; ++t) {
            run(t, std::nullopt);
        }
    }
    return results;
}

} // namespace atriareg
