#pragma once

#include "ppct/ppfft.hpp"
#include "ppct/projector.hpp"
#include "ppct/weights.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppct {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FileKind : std::uint8_t { Image = 1, Parallel = 2, Fan = 3, Cone = 4, PPData = 5, Weights = 6 };

/// In-memory PPCT1 file. Layout on disk:
///   "PPCT1", kind byte, u32 rank, u32 dims[rank], f64 geometry[], f64 payload[]
/// all little-endian. Geometry by kind:
///   image     pixel_size, z_spacing             dims [n, n] or [slices, n, n]
///   parallel  angles[A], offsets[J]             dims [A, J]
///   fan       R, gamma_max, betas[B]            dims [B, detectors]
///   cone      R, D, P, du, dv, phis[V]          dims [V, rows, cols]
///   ppdata    (none), payload re/im pairs       dims [2, 2n, n]
///   weights   (none)                            dims [2, 2n, n]
struct PpctFile {
    FileKind kind = FileKind::Image;
    std::vector<std::uint32_t> dims;
    std::vector<double> geometry;
    std::vector<double> payload;
};

std::vector<std::uint8_t> encode(const PpctFile& f);
PpctFile decode(const std::vector<std::uint8_t>& bytes);

void write_ppct(const std::string& path, const PpctFile& f);
PpctFile read_ppct(const std::string& path);

PpctFile to_file(const Image& img);
PpctFile to_file(const Volume& vol);
PpctFile to_file(const ParallelSinogram& ps);
PpctFile to_file(const FanSinogram& fan);
PpctFile to_file(const ConeSinogram& cone);
PpctFile to_file(const PPData& pp);
PpctFile to_file(const Weights& w);

Image image_from(const PpctFile& f);
Volume volume_from(const PpctFile& f);  // accepts 2-D images as one slice
ParallelSinogram parallel_from(const PpctFile& f);
FanSinogram fan_from(const PpctFile& f);
ConeSinogram cone_from(const PpctFile& f);
PPData ppdata_from(const PpctFile& f);
Weights weights_from(const PpctFile& f);

/// 8-bit grayscale PNG; values map linearly from [lo, hi] to [0, 255] and clip.
/// Row 0 of the image (bottom) becomes the last PNG row.
void write_png(const std::string& path, const Image& img, double lo, double hi);

} // namespace ppct
