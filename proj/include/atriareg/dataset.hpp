#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atriareg/phantom.hpp"
#include "atriareg/pipeline.hpp"
#include "atriareg/registration.hpp"

namespace atriareg {

// Dataset directory layout, one file per phase:
//   phase_00.nii        intensities
//   phase_00_mask.nii   segmentation
//   phase_00_truth.nii  analytic field (phantom datasets)
//   phase_00_field.nii  estimated field (tracking output)
//   series.json         phase count, reference phase, mask presence
// plus phantom.json, preprocess.json or loss_trace.json as metadata.

std::string phase_stem(int phase); // "phase_07"
std::filesystem::path volume_path(const std::filesystem::path &dir, int phase);
std::filesystem::path mask_path(const std::filesystem::path &dir, int phase);
std::filesystem::path truth_path(const std::filesystem::path &dir, int phase);
std::filesystem::path field_path(const std::filesystem::path &dir, int phase);

// Creates `dir` if needed. Throws IoFailure.
void write_series_dir(const CineSeries &series, const std::filesystem::path &dir);
// Throws IoFailure when series.json or a listed phase file is missing.
CineSeries read_series_dir(const std::filesystem::path &dir);

void write_phantom_dataset(const Phantom &phantom, const PhantomConfig &cfg, const std::filesystem::path &dir);
std::vector<DisplacementField> read_truth_fields(const std::filesystem::path &dir, std::size_t count);

void write_preprocessed_dataset(const PreprocessedSeries &pre, const PreprocessOptions &options,
                                const std::filesystem::path &dir);

void write_tracking_dataset(std::span<const RegistrationResult> results, const RegistrationConfig &cfg,
                            const std::filesystem::path &dir);
std::vector<DisplacementField> read_fields_dir(const std::filesystem::path &dir, std::size_t count);

} // namespace atriareg
