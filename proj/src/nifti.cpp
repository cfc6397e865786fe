#include "atriareg/nifti.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include <zlib.h>

#include "atriareg/error.hpp"
#include "atriareg/fileio.hpp"

namespace atriareg {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kDataOffset = 352; // header + empty extension flag
constexpr std::int16_t kUnitsMm = 2;
constexpr const char *kFieldVoxelName = "disp_voxel";
constexpr const char *kFieldMmName = "disp_mm";

// Little-endian accessors, independent of host byte order.
void put_u16(std::string &b, std::size_t off, std::uint16_t v) {
    b[off] = static_cast<char>(v & 0xff);
    b[off + 1] = static_cast<char>(v >> 8);
}
void put_u32(std::string &b, std::size_t off, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        b[off + i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
}
void put_i16(std::string &b, std::size_t off, std::int16_t v) { put_u16(b, off, static_cast<std::uint16_t>(v)); }
void put_i32(std::string &b, std::size_t off, std::int32_t v) { put_u32(b, off, static_cast<std::uint32_t>(v)); }
void put_f32(std::string &b, std::size_t off, float v) { put_u32(b, off, std::bit_cast<std::uint32_t>(v)); }

std::uint16_t get_u16(std::string_view b, std::size_t off) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                      (static_cast<unsigned char>(b[off + 1]) << 8));
}
std::uint32_t get_u32(std::string_view b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + i])) << (8 * i);
    }
    return v;
}
std::int16_t get_i16(std::string_view b, std::size_t off) { return static_cast<std::int16_t>(get_u16(b, off)); }
std::int32_t get_i32(std::string_view b, std::size_t off) { return static_cast<std::int32_t>(get_u32(b, off)); }
float get_f32(std::string_view b, std::size_t off) { return std::bit_cast<float>(get_u32(b, off)); }

bool is_gzip(std::string_view bytes) {
    return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
           static_cast<unsigned char>(bytes[1]) == 0x8b;
}

bool wants_gzip(const std::filesystem::path &path) { return path.extension() == ".gz"; }

std::string gunzip(std::string_view in) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
        throw Error(ErrorCode::IoFailure, "zlib initialisation failed");
    }
    zs.next_in = reinterpret_cast<Bytef *>(const_cast<char *>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    std::string out;
    std::array<char, 1 << 16> chunk{};
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef *>(chunk.data());
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            if (rc == Z_BUF_ERROR) {
                throw Error(ErrorCode::TruncatedFile, "gzip stream ends early");
            }
            throw Error(ErrorCode::IoFailure, "corrupt gzip stream");
        }
        out.append(chunk.data(), chunk.size() - zs.avail_out);
    }
    inflateEnd(&zs);
    return out;
}

std::string gzip(std::string_view in) {
    z_stream zs{};
    // the default gzip header carries mtime 0, so output is reproducible
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw Error(ErrorCode::IoFailure, "zlib initialisation failed");
    }
    std::string out(deflateBound(&zs, static_cast<uLong>(in.size())), '\0');
    zs.next_in = reinterpret_cast<Bytef *>(const_cast<char *>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef *>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) {
        throw Error(ErrorCode::IoFailure, "gzip compression failed");
    }
    out.resize(zs.total_out);
    return out;
}

struct HeaderSpec {
    Geometry geom;
    int frames = 1; // dim[4]; 0 means a plain 3D image
    std::int16_t datatype = kNiftiFloat32;
    std::int16_t intent = 0;
    std::string intent_name;
    std::string descrip;
};

int bytes_per_voxel(std::int16_t datatype) {
    switch (datatype) {
    case kNiftiUint8: return 1;
    case kNiftiInt16: return 2;
    case kNiftiFloat32: return 4;
    default: return 0;
    }
}

std::string make_header(const HeaderSpec &h) {
    std::string b(kDataOffset, '\0');
    put_i32(b, 0, static_cast<std::int32_t>(kHeaderSize));
    const bool four_d = h.frames > 0;
    put_i16(b, 40, four_d ? 4 : 3);
    put_i16(b, 42, static_cast<std::int16_t>(h.geom.dims.nx));
    put_i16(b, 44, static_cast<std::int16_t>(h.geom.dims.ny));
    put_i16(b, 46, static_cast<std::int16_t>(h.geom.dims.nz));
    for (int d = 4; d <= 7; ++d) {
        put_i16(b, 40 + 2 * d, static_cast<std::int16_t>(d == 4 && four_d ? h.frames : 1));
    }
    put_i16(b, 68, h.intent);
    put_i16(b, 70, h.datatype);
    put_i16(b, 72, static_cast<std::int16_t>(8 * bytes_per_voxel(h.datatype)));
    put_f32(b, 76, 1.0f); // qfac
    for (int d = 0; d < 3; ++d) {
        put_f32(b, 80 + 4 * d, static_cast<float>(h.geom.spacing[d]));
    }
    if (four_d) {
        put_f32(b, 92, 1.0f);
    }
    put_f32(b, 108, static_cast<float>(kDataOffset));
    put_f32(b, 112, 1.0f);
    put_f32(b, 116, 0.0f);
    b[123] = static_cast<char>(kUnitsMm);
    std::memcpy(b.data() + 148, h.descrip.data(), std::min<std::size_t>(h.descrip.size(), 79));
    put_i16(b, 252, 1);
    put_i16(b, 254, 1);
    for (int d = 0; d < 3; ++d) {
        put_f32(b, 268 + 4 * d, static_cast<float>(h.geom.origin[d]));
        const std::size_t row = 280 + 16 * static_cast<std::size_t>(d);
        put_f32(b, row + 4 * d, static_cast<float>(h.geom.spacing[d]));
        put_f32(b, row + 12, static_cast<float>(h.geom.origin[d]));
    }
    std::memcpy(b.data() + 328, h.intent_name.data(), std::min<std::size_t>(h.intent_name.size(), 15));
    std::memcpy(b.data() + 344, "n+1\0", 4);
    return b;
}

void check_dims_fit(const Dims &d) {
    constexpr int kMax = 32767;
    if (d.nx > kMax || d.ny > kMax || d.nz > kMax) {
        throw Error(ErrorCode::IoFailure, "dimensions exceed the NIfTI-1 limit of 32767");
    }
}

void append_f32(std::string &b, std::span<const double> values) {
    const std::size_t at = b.size();
    b.resize(at + 4 * values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        put_f32(b, at + 4 * i, static_cast<float>(values[i]));
    }
}

std::string finish(std::string bytes, const std::filesystem::path &path) {
    return wants_gzip(path) ? gzip(bytes) : bytes;
}

struct ParsedHeader {
    Geometry geom;
    int dim0 = 3;
    int frames = 1;
    std::int16_t datatype = 0;
    std::int16_t intent = 0;
    std::string intent_name;
    std::size_t offset = kDataOffset;
    double slope = 1.0;
    double inter = 0.0;
};

ParsedHeader parse_header(std::string_view b) {
    if (b.size() < 4) {
        throw Error(ErrorCode::TruncatedFile, "file shorter than the header size field");
    }
    const std::int32_t sizeof_hdr = get_i32(b, 0);
    if (sizeof_hdr != static_cast<std::int32_t>(kHeaderSize)) {
        const std::uint32_t big = (static_cast<std::uint32_t>(static_cast<unsigned char>(b[0])) << 24) |
                                 (static_cast<std::uint32_t>(static_cast<unsigned char>(b[1])) << 16) |
                                 (static_cast<std::uint32_t>(static_cast<unsigned char>(b[2])) << 8) |
                                 static_cast<unsigned char>(b[3]);
        if (big == kHeaderSize) {
            throw Error(ErrorCode::BadMagic, "big-endian NIfTI files are not supported");
        }
        throw Error(ErrorCode::BadMagic, "header size field is " + std::to_string(sizeof_hdr) + ", expected 348");
    }
    if (b.size() < kHeaderSize) {
        throw Error(ErrorCode::TruncatedFile, "file shorter than the 348-byte header");
    }
    if (std::memcmp(b.data() + 344, "n+1\0", 4) != 0) {
        throw Error(ErrorCode::BadMagic, "magic is not \"n+1\" (only single-file NIfTI-1 is supported)");
    }

    ParsedHeader h;
    h.dim0 = get_i16(b, 40);
    if (h.dim0 < 1 || h.dim0 > 7) {
        throw Error(ErrorCode::BadMagic, "dim[0] = " + std::to_string(h.dim0) + " is out of range");
    }
    std::array<int, 8> dim{};
    for (int d = 1; d <= 7; ++d) {
        dim[d] = d <= h.dim0 ? get_i16(b, 40 + 2 * d) : 1;
        if (dim[d] < 1) {
            throw Error(ErrorCode::BadMagic, "dim[" + std::to_string(d) + "] is not positive");
        }
    }
    if (dim[5] > 1 || dim[6] > 1 || dim[7] > 1) {
        throw Error(ErrorCode::UnsupportedDatatype, "images with more than four dimensions are not supported");
    }
    h.frames = dim[4];
    h.geom.dims = Dims{dim[1], dim[2], dim[3]};
    h.intent = get_i16(b, 68);
    h.datatype = get_i16(b, 70);
    if (bytes_per_voxel(h.datatype) == 0) {
        throw Error(ErrorCode::UnsupportedDatatype,
                    "datatype code " + std::to_string(h.datatype) + " (supported: 2 uint8, 4 int16, 16 float32)");
    }
    for (int d = 0; d < 3; ++d) {
        h.geom.spacing[d] = std::abs(static_cast<double>(get_f32(b, 80 + 4 * d)));
    }
    const float vox_offset = get_f32(b, 108);
    if (!(vox_offset >= static_cast<float>(kHeaderSize))) {
        throw Error(ErrorCode::BadMagic, "vox_offset lies inside the header");
    }
    h.offset = static_cast<std::size_t>(vox_offset);
    const double slope = get_f32(b, 112);
    const double inter = get_f32(b, 116);
    if (slope != 0.0 && std::isfinite(slope) && std::isfinite(inter)) {
        h.slope = slope;
        h.inter = inter;
    }
    const std::int16_t qform = get_i16(b, 252);
    const std::int16_t sform = get_i16(b, 254);
    for (int d = 0; d < 3; ++d) {
        if (qform > 0) {
            h.geom.origin[d] = get_f32(b, 268 + 4 * d);
        } else if (sform > 0) {
            h.geom.origin[d] = get_f32(b, 280 + 16 * static_cast<std::size_t>(d) + 12);
        }
    }
    const char *name = b.data() + 328;
    h.intent_name.assign(name, strnlen(name, 16));
    h.geom.validate();
    return h;
}

std::vector<double> decode_values(std::string_view b, const ParsedHeader &h) {
    const std::size_t count = h.geom.dims.count() * static_cast<std::size_t>(h.frames);
    const std::size_t bpv = static_cast<std::size_t>(bytes_per_voxel(h.datatype));
    if (b.size() < h.offset || (b.size() - h.offset) / bpv < count) {
        throw Error(ErrorCode::TruncatedFile, "image data shorter than the header declares");
    }
    std::vector<double> out(count);
    const std::size_t base = h.offset;
    for (std::size_t i = 0; i < count; ++i) {
        double raw = 0.0;
        switch (h.datatype) {
        case kNiftiUint8: raw = static_cast<unsigned char>(b[base + i]); break;
        case kNiftiInt16: raw = get_i16(b, base + 2 * i); break;
        default: raw = get_f32(b, base + 4 * i); break;
        }
        const double v = h.slope * raw + h.inter;
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteData, "voxel " + std::to_string(i) + " is NaN or Inf");
        }
        out[i] = v;
    }
    return out;
}

template <class T> T expect(NiftiImage img, const std::filesystem::path &path, const char *kind) {
    if (auto *p = std::get_if<T>(&img)) {
        return std::move(*p);
    }
    throw Error(ErrorCode::InvalidArgument, path.string() + " does not hold a " + kind);
}

} // namespace

NiftiImage parse_nifti(std::string_view bytes) {
    std::string inflated;
    if (is_gzip(bytes)) {
        inflated = gunzip(bytes);
        bytes = inflated;
    }
    const ParsedHeader h = parse_header(bytes);
    std::vector<double> values = decode_values(bytes, h);

    if (h.dim0 >= 4 && h.intent == kNiftiIntentDispVect && h.frames == 3) {
        const FieldUnits units = h.intent_name == kFieldMmName ? FieldUnits::Millimetre : FieldUnits::Voxel;
        return DisplacementField(h.geom, std::move(values), units);
    }
    if (h.dim0 >= 4 && h.frames > 1) {
        CineSeries series;
        const std::size_t n = h.geom.dims.count();
        series.phases.reserve(static_cast<std::size_t>(h.frames));
        for (int t = 0; t < h.frames; ++t) {
            const auto first = values.begin() + static_cast<std::ptrdiff_t>(n * t);
            series.phases.emplace_back(h.geom, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
        }
        return series;
    }
    if (h.datatype == kNiftiUint8 &&
        std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0 || v == 1.0; })) {
        std::vector<std::uint8_t> bits(values.size());
        std::transform(values.begin(), values.end(), bits.begin(), [](double v) { return v != 0.0 ? 1 : 0; });
        return Mask3(h.geom, std::move(bits));
    }
    return Volume3(h.geom, std::move(values));
}

NiftiImage read_nifti(const std::filesystem::path &path) {
    const std::string bytes = read_file(path);
    try {
        return parse_nifti(bytes);
    } catch (const Error &e) {
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

Volume3 read_volume(const std::filesystem::path &path) {
    NiftiImage img = read_nifti(path);
    if (auto *m = std::get_if<Mask3>(&img)) {
        return to_volume(*m);
    }
    return expect<Volume3>(std::move(img), path, "3D volume");
}

Mask3 read_mask(const std::filesystem::path &path) { return expect<Mask3>(read_nifti(path), path, "binary mask"); }

DisplacementField read_field(const std::filesystem::path &path) {
    return expect<DisplacementField>(read_nifti(path), path, "displacement field");
}

CineSeries read_series(const std::filesystem::path &path) {
    return expect<CineSeries>(read_nifti(path), path, "4D series");
}

std::string encode_nifti(const Volume3 &v) {
    check_dims_fit(v.dims());
    std::string b = make_header({v.geometry(), 0, kNiftiFloat32, 0, "", "atriareg volume"});
    append_f32(b, v.data());
    return b;
}

std::string encode_nifti(const Mask3 &m) {
    check_dims_fit(m.dims());
    std::string b = make_header({m.geometry(), 0, kNiftiUint8, 0, "", "atriareg mask"});
    const auto bits = m.bits();
    b.append(reinterpret_cast<const char *>(bits.data()), bits.size());
    return b;
}

std::string encode_nifti(const DisplacementField &f) {
    check_dims_fit(f.dims());
    const bool mm = f.units() == FieldUnits::Millimetre;
    std::string b = make_header({f.geometry(), 3, kNiftiFloat32, kNiftiIntentDispVect,
                                 mm ? kFieldMmName : kFieldVoxelName,
                                 mm ? "displacement, mm units" : "displacement, voxel units"});
    append_f32(b, f.data());
    return b;
}

std::string encode_nifti(const CineSeries &s) {
    s.validate();
    check_dims_fit(s.geometry().dims);
    if (s.phase_count() > 32767) {
        throw Error(ErrorCode::IoFailure, "too many phases for NIfTI-1");
    }
    std::string b = make_header({s.geometry(), static_cast<int>(s.phase_count()), kNiftiFloat32, 0, "",
                                 "atriareg cine series"});
    for (const Volume3 &v : s.phases) {
        append_f32(b, v.data());
    }
    return b;
}

void write_nifti(const Volume3 &v, const std::filesystem::path &path) {
    write_file_atomic(path, finish(encode_nifti(v), path));
}
void write_nifti(const Mask3 &m, const std::filesystem::path &path) {
    write_file_atomic(path, finish(encode_nifti(m), path));
}
void write_nifti(const DisplacementField &f, const std::filesystem::path &path) {
    write_file_atomic(path, finish(encode_nifti(f), path));
}
void write_nifti(const CineSeries &s, const std::filesystem::path &path) {
    write_file_atomic(path, finish(encode_nifti(s), path));
}

} // namespace atriareg
