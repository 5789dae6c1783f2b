#include "ppct/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

namespace ppct {
namespace {

constexpr char kMagic[5] = {'P', 'P', 'C', 'T', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    void need(std::size_t count) const {
        if (bytes_.size() - pos_ < count)
            throw FormatError("truncated PPCT1 file");
    }
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return std::bit_cast<double>(v);
    }
    std::vector<double> f64s(std::size_t count) {
        if (count > (bytes_.size() - pos_) / 8)
            throw FormatError("truncated PPCT1 file");
        std::vector<double> out(count);
        for (auto& v : out)
            v = f64();
        return out;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

std::size_t product(const std::vector<std::uint32_t>& dims) {
    std::size_t p = 1;
    for (auto d : dims) {
        if (d != 0 && p > (std::size_t{1} << 40) / d)
            throw FormatError("PPCT1 dimensions too large");
        p *= d;
    }
    return p;
}

std::size_t geometry_length(FileKind kind, const std::vector<std::uint32_t>& dims) {
    switch (kind) {
    case FileKind::Image:
        return 2;
    case FileKind::Parallel:
        return dims.size() == 2 ? std::size_t{dims[0]} + dims[1] : 0;
    case FileKind::Fan:
        return dims.empty() ? 0 : 2 + std::size_t{dims[0]};
    case FileKind::Cone:
        return dims.empty() ? 0 : 5 + std::size_t{dims[0]};
    case FileKind::PPData:
    case FileKind::Weights:
        return 0;
    }
    throw FormatError("unknown PPCT1 kind");
}

std::size_t payload_length(const PpctFile& f) {
    return product(f.dims) * (f.kind == FileKind::PPData ? 2 : 1);
}

void expect(const PpctFile& f, FileKind kind, std::size_t rank, const char* what) {
    if (f.kind != kind)
        throw FormatError(std::string("expected a ") + what + " file");
    if (f.dims.size() != rank)
        throw FormatError(std::string("bad dimensions for a ") + what + " file");
    if (f.payload.size() != payload_length(f) || f.geometry.size() != geometry_length(f.kind, f.dims))
        throw FormatError(std::string("inconsistent ") + what + " file");
}

int pp_side(const PpctFile& f, FileKind kind, const char* what) {
    expect(f, kind, 3, what);
    const auto n = f.dims[2];
    if (f.dims[0] != 2 || f.dims[1] != 2 * n || n < 2 || n % 2 != 0)
        throw FormatError(std::string("bad dimensions for a ") + what + " file");
    return static_cast<int>(n);
}

std::uint32_t dim(std::size_t v) {
    if (v > 0xffffffffu)
        throw std::invalid_argument("dimension does not fit in u32");
    return static_cast<std::uint32_t>(v);
}

void append(std::vector<double>& out, const std::vector<double>& v) { out.insert(out.end(), v.begin(), v.end()); }

} // namespace

std::vector<std::uint8_t> encode(const PpctFile& f) {
    if (f.geometry.size() != geometry_length(f.kind, f.dims) || f.payload.size() != payload_length(f))
        throw std::invalid_argument("PPCT1 file is inconsistent with its dimensions");
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.reserve(16 + 4 * f.dims.size() + 8 * (f.geometry.size() + f.payload.size()));
    out.push_back(static_cast<std::uint8_t>(f.kind));
    put_u32(out, dim(f.dims.size()));
    for (auto d : f.dims)
        put_u32(out, d);
    for (double g : f.geometry)
        put_f64(out, g);
    for (double v : f.payload)
        put_f64(out, v);
    return out;
}

PpctFile decode(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 5) != 0)
        throw FormatError("not a PPCT1 file (bad magic)");
    Reader in(bytes);
    for (int i = 0; i < 5; ++i)
        in.u8();
    PpctFile f;
    const auto kind = in.u8();
    if (kind < 1 || kind > 6)
        throw FormatError("unknown PPCT1 kind " + std::to_string(kind));
    f.kind = static_cast<FileKind>(kind);
    const auto rank = in.u32();
    if (rank == 0 || rank > 8)
        throw FormatError("bad PPCT1 rank " + std::to_string(rank));
    for (std::uint32_t i = 0; i < rank; ++i)
        f.dims.push_back(in.u32());
    f.geometry = in.f64s(geometry_length(f.kind, f.dims));
    f.payload = in.f64s(payload_length(f));
    if (!in.done())
        throw FormatError("trailing bytes after PPCT1 payload");
    return f;
}

void write_ppct(const std::string& path, const PpctFile& f) {
    const auto bytes = encode(f);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

PpctFile read_ppct(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode(bytes);
}

PpctFile to_file(const Image& img) {
    validate(img);
    PpctFile f;
    f.kind = FileKind::Image;
    f.dims = {dim(img.n), dim(img.n)};
    f.geometry = {img.pixel_size, 0.0};
    f.payload = img.pixels;
    return f;
}

PpctFile to_file(const Volume& vol) {
    validate(vol);
    PpctFile f;
    f.kind = FileKind::Image;
    f.dims = {dim(vol.slices.size()), dim(vol.n()), dim(vol.n())};
    f.geometry = {vol.slices.front().pixel_size, vol.z_spacing};
    for (const auto& s : vol.slices)
        append(f.payload, s.pixels);
    return f;
}

PpctFile to_file(const ParallelSinogram& ps) {
    if (ps.data.size() != ps.angles.size() * ps.offsets.size())
        throw std::invalid_argument("parallel sinogram size mismatch");
    PpctFile f;
    f.kind = FileKind::Parallel;
    f.dims = {dim(ps.angles.size()), dim(ps.offsets.size())};
    f.geometry = ps.angles;
    append(f.geometry, ps.offsets);
    f.payload = ps.data;
    return f;
}

PpctFile to_file(const FanSinogram& fan) {
    validate(fan.geometry);
    const auto& g = fan.geometry;
    if (fan.data.size() != g.betas.size() * static_cast<std::size_t>(g.n_detectors))
        throw std::invalid_argument("fan sinogram size mismatch");
    PpctFile f;
    f.kind = FileKind::Fan;
    f.dims = {dim(g.betas.size()), dim(g.n_detectors)};
    f.geometry = {g.R, g.gamma_max};
    append(f.geometry, g.betas);
    f.payload = fan.data;
    return f;
}

PpctFile to_file(const ConeSinogram& cone) {
    validate(cone.geometry);
    const auto& g = cone.geometry;
    if (cone.data.size() != g.phis.size() * cone.view_size())
        throw std::invalid_argument("cone sinogram size mismatch");
    PpctFile f;
    f.kind = FileKind::Cone;
    f.dims = {dim(g.phis.size()), dim(g.n_rows), dim(g.n_cols)};
    f.geometry = {g.R, g.D, g.P, g.du, g.dv};
    append(f.geometry, g.phis);
    f.payload = cone.data;
    return f;
}

PpctFile to_file(const PPData& pp) {
    if (pp.values.size() != 4 * static_cast<std::size_t>(pp.n) * pp.n)
        throw std::invalid_argument("pseudo-polar data size mismatch");
    PpctFile f;
    f.kind = FileKind::PPData;
    f.dims = {2, dim(2 * pp.n), dim(pp.n)};
    f.payload.reserve(2 * pp.values.size());
    for (const cplx& v : pp.values) {
        f.payload.push_back(v.real());
        f.payload.push_back(v.imag());
    }
    return f;
}

PpctFile to_file(const Weights& w) {
    if (w.c.size() != 4 * static_cast<std::size_t>(w.n) * w.n)
        throw std::invalid_argument("weights size mismatch");
    PpctFile f;
    f.kind = FileKind::Weights;
    f.dims = {2, dim(2 * w.n), dim(w.n)};
    f.payload = w.c;
    return f;
}

Image image_from(const PpctFile& f) {
    expect(f, FileKind::Image, 2, "image");
    if (f.dims[0] != f.dims[1])
        throw FormatError("image file is not square");
    Image img(static_cast<int>(f.dims[0]));
    img.pixels = f.payload;
    img.pixel_size = f.geometry[0];
    try {
        validate(img);
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    return img;
}

Volume volume_from(const PpctFile& f) {
    if (f.kind == FileKind::Image && f.dims.size() == 2) {
        Volume v;
        v.slices.push_back(image_from(f));
        v.z_spacing = f.geometry[1] > 0.0 ? f.geometry[1] : v.slices.front().spacing();
        return v;
    }
    expect(f, FileKind::Image, 3, "volume");
    if (f.dims[1] != f.dims[2] || f.dims[0] == 0)
        throw FormatError("volume slices are not square");
    const int n = static_cast<int>(f.dims[1]);
    const std::size_t slice = static_cast<std::size_t>(n) * n;
    Volume v;
    v.z_spacing = f.geometry[1];
    for (std::uint32_t k = 0; k < f.dims[0]; ++k) {
        Image img(n);
        img.pixel_size = f.geometry[0];
        std::copy_n(f.payload.begin() + static_cast<std::ptrdiff_t>(k * slice), slice, img.pixels.begin());
        v.slices.push_back(std::move(img));
    }
    try {
        validate(v);
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    return v;
}

ParallelSinogram parallel_from(const PpctFile& f) {
    expect(f, FileKind::Parallel, 2, "parallel sinogram");
    ParallelSinogram ps;
    ps.angles.assign(f.geometry.begin(), f.geometry.begin() + f.dims[0]);
    ps.offsets.assign(f.geometry.begin() + f.dims[0], f.geometry.end());
    ps.data = f.payload;
    return ps;
}

FanSinogram fan_from(const PpctFile& f) {
    expect(f, FileKind::Fan, 2, "fan sinogram");
    FanSinogram fan;
    fan.geometry.R = f.geometry[0];
    fan.geometry.gamma_max = f.geometry[1];
    fan.geometry.n_detectors = static_cast<int>(f.dims[1]);
    fan.geometry.betas.assign(f.geometry.begin() + 2, f.geometry.end());
    fan.data = f.payload;
    try {
        validate(fan.geometry);
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    return fan;
}

ConeSinogram cone_from(const PpctFile& f) {
    expect(f, FileKind::Cone, 3, "cone sinogram");
    ConeSinogram cone;
    auto& g = cone.geometry;
    g.R = f.geometry[0];
    g.D = f.geometry[1];
    g.P = f.geometry[2];
    g.du = f.geometry[3];
    g.dv = f.geometry[4];
    g.phis.assign(f.geometry.begin() + 5, f.geometry.end());
    g.n_rows = static_cast<int>(f.dims[1]);
    g.n_cols = static_cast<int>(f.dims[2]);
    cone.data = f.payload;
    try {
        validate(g);
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    return cone;
}

PPData ppdata_from(const PpctFile& f) {
    PPData pp(pp_side(f, FileKind::PPData, "pseudo-polar data"));
    for (std::size_t i = 0; i < pp.values.size(); ++i)
        pp.values[i] = cplx(f.payload[2 * i], f.payload[2 * i + 1]);
    return pp;
}

Weights weights_from(const PpctFile& f) {
    Weights w;
    w.n = pp_side(f, FileKind::Weights, "weights");
    w.c = f.payload;
    return w;
}

void write_png(const std::string& path, const Image& img, double lo, double hi) {
    if (!(hi > lo))
        throw std::invalid_argument("png window needs hi > lo");
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng initialisation failed");
    }
    std::vector<png_byte> rows(static_cast<std::size_t>(img.n) * img.n);
    for (int r = 0; r < img.n; ++r)
        for (int c = 0; c < img.n; ++c) {
            const double t = std::clamp((img(r, c) - lo) / (hi - lo), 0.0, 1.0);
            rows[static_cast<std::size_t>(img.n - 1 - r) * img.n + c] = static_cast<png_byte>(std::lround(255.0 * t));
        }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng failed writing '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.n), static_cast<png_uint_32>(img.n), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < img.n; ++r)
        png_write_row(png, &rows[static_cast<std::size_t>(r) * img.n]);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace ppct
