#include "atriareg/dataset.hpp"

#include <cstdio>
#include <system_error>

#include <json.hpp>

#include "atriareg/error.hpp"
#include "atriareg/fileio.hpp"
#include "atriareg/nifti.hpp"
#include "atriareg/report.hpp"

namespace atriareg {

using nlohmann::json;

namespace {

void ensure_dir(const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw Error(ErrorCode::IoFailure, "cannot create directory " + dir.string());
    }
}

void write_json(const json &doc, const std::filesystem::path &path) { write_file_atomic(path, doc.dump(2) + "\n"); }

json read_json(const std::filesystem::path &path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception &e) {
        throw Error(ErrorCode::IoFailure, path.string() + ": " + e.what());
    }
}

json vec_json(const Vec3 &v) { return json::array({v[0], v[1], v[2]}); }
json index_json(const Index3 &v) { return json::array({v[0], v[1], v[2]}); }

} // namespace

std::string phase_stem(int phase) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "phase_%02d", phase);
    return buf;
}

std::filesystem::path volume_path(const std::filesystem::path &dir, int phase) {
    return dir / (phase_stem(phase) + ".nii");
}
std::filesystem::path mask_path(const std::filesystem::path &dir, int phase) {
    return dir / (phase_stem(phase) + "_mask.nii");
}
std::filesystem::path truth_path(const std::filesystem::path &dir, int phase) {
    return dir / (phase_stem(phase) + "_truth.nii");
}
std::filesystem::path field_path(const std::filesystem::path &dir, int phase) {
    return dir / (phase_stem(phase) + "_field.nii");
}

void write_series_dir(const CineSeries &series, const std::filesystem::path &dir) {
    series.validate();
    ensure_dir(dir);
    for (std::size_t t = 0; t < series.phase_count(); ++t) {
        write_nifti(series.phases[t], volume_path(dir, static_cast<int>(t)));
        if (series.masks) {
            write_nifti((*series.masks)[t], mask_path(dir, static_cast<int>(t)));
        }
    }
    write_json({{"phases", series.phase_count()},
                {"reference_phase", series.reference_phase},
                {"masks", series.masks.has_value()}},
               dir / "series.json");
}

CineSeries read_series_dir(const std::filesystem::path &dir) {
    const json meta = read_json(dir / "series.json");
    CineSeries series;
    int phases = 0;
    bool masks = false;
    try {
        phases = meta.at("phases").get<int>();
        series.reference_phase = meta.at("reference_phase").get<int>();
        masks = meta.at("masks").get<bool>();
    } catch (const json::exception &e) {
        throw Error(ErrorCode::IoFailure, (dir / "series.json").string() + ": " + e.what());
    }
    if (phases < 1) {
        throw Error(ErrorCode::IoFailure, (dir / "series.json").string() + ": no phases");
    }
    if (masks) {
        series.masks.emplace();
    }
    for (int t = 0; t < phases; ++t) {
        series.phases.push_back(read_volume(volume_path(dir, t)));
        if (masks) {
            series.masks->push_back(read_mask(mask_path(dir, t)));
        }
    }
    series.validate();
    return series;
}

void write_phantom_dataset(const Phantom &phantom, const PhantomConfig &cfg, const std::filesystem::path &dir) {
    write_series_dir(phantom.series, dir);
    for (std::size_t t = 0; t < phantom.truth.size(); ++t) {
        write_nifti(phantom.truth[t], truth_path(dir, static_cast<int>(t)));
    }
    write_json({{"dims", json::array({cfg.dims.nx, cfg.dims.ny, cfg.dims.nz})},
                {"spacing", vec_json(cfg.spacing)},
                {"phases", cfg.phases},
                {"base_radii_voxels", vec_json(cfg.base_radii_voxels)},
                {"center", vec_json(cfg.resolved_center())},
                {"peak_scale", cfg.peak_scale},
                {"peak_phase", cfg.peak_phase},
                {"noise_sigma", cfg.noise_sigma},
                {"falloff_voxels", cfg.falloff_voxels},
                {"seed", cfg.seed},
                {"scales", phantom.scales}},
               dir / "phantom.json");
}

std::vector<DisplacementField> read_truth_fields(const std::filesystem::path &dir, std::size_t count) {
    std::vector<DisplacementField> out;
    for (std::size_t t = 0; t < count; ++t) {
        out.push_back(read_field(truth_path(dir, static_cast<int>(t))));
    }
    return out;
}

void write_preprocessed_dataset(const PreprocessedSeries &pre, const PreprocessOptions &options,
                                const std::filesystem::path &dir) {
    write_series_dir(pre.series, dir);
    json shifts = json::array();
    for (const Index3 &s : pre.shifts) {
        shifts.push_back(index_json(s));
    }
    write_json({{"crop_size", index_json(options.crop_size)},
                {"crop_center", index_json(pre.crop_center)},
                {"band_radius", options.band_radius},
                {"shifts", std::move(shifts)}},
               dir / "preprocess.json");
}

void write_tracking_dataset(std::span<const RegistrationResult> results, const RegistrationConfig &cfg,
                            const std::filesystem::path &dir) {
    ensure_dir(dir);
    for (std::size_t t = 0; t < results.size(); ++t) {
        write_nifti(results[t].field, field_path(dir, static_cast<int>(t)));
    }
    write_loss_trace(results, cfg, dir / "loss_trace.json");
}

std::vector<DisplacementField> read_fields_dir(const std::filesystem::path &dir, std::size_t count) {
    std::vector<DisplacementField> out;
    for (std::size_t t = 0; t < count; ++t) {
        out.push_back(read_field(field_path(dir, static_cast<int>(t))));
    }
    return out;
}

} // namespace atriareg
