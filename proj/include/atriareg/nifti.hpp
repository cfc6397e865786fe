#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "atriareg/field.hpp"
#include "atriareg/volume.hpp"

namespace atriareg {

// Single-file NIfTI-1 (.nii, or .nii.gz), little-endian only.
//
// Supported datatypes: 2 (uint8), 4 (int16), 16 (float32). Volumes and fields
// are written as float32, masks as uint8. Displacement fields are 4D with
// dim[4] = 3, intent code 1006 and intent_name "disp_voxel" or "disp_mm".
// Any other 4D file is a cine series (one phase per dim[4] index).
//
// Origin is stored in qoffset and srow; spacing in pixdim[1..3].

inline constexpr std::int16_t kNiftiUint8 = 2;
inline constexpr std::int16_t kNiftiInt16 = 4;
inline constexpr std::int16_t kNiftiFloat32 = 16;
inline constexpr std::int16_t kNiftiIntentDispVect = 1006;

using NiftiImage = std::variant<Volume3, Mask3, CineSeries, DisplacementField>;

// uint8 data whose scaled values are all 0 or 1 loads as a Mask3.
// Throws BadMagic, UnsupportedDatatype, TruncatedFile, NonFiniteData, IoFailure.
NiftiImage read_nifti(const std::filesystem::path &path);
NiftiImage parse_nifti(std::string_view bytes);

// Typed readers. read_volume accepts masks (as 0/1 intensities).
// Throw InvalidArgument when the file holds another kind of image.
Volume3 read_volume(const std::filesystem::path &path);
Mask3 read_mask(const std::filesystem::path &path);
DisplacementField read_field(const std::filesystem::path &path);
CineSeries read_series(const std::filesystem::path &path);

// A ".gz" extension selects gzip output. Throws IoFailure.
void write_nifti(const Volume3 &v, const std::filesystem::path &path);
void write_nifti(const Mask3 &m, const std::filesystem::path &path);
void write_nifti(const DisplacementField &f, const std::filesystem::path &path);
void write_nifti(const CineSeries &s, const std::filesystem::path &path); // phases only

std::string encode_nifti(const Volume3 &v);
std::string encode_nifti(const Mask3 &m);
std::string encode_nifti(const DisplacementField &f);
std::string encode_nifti(const CineSeries &s);

} // namespace atriareg
