#pragma once

#include "ppct/ppfft.hpp"
#include "ppct/projector.hpp"

#include <span>
#include <vector>

namespace ppct {

/// Upper bound standing in for an infinite interpolation error.
inline constexpr double kEpsilonCap = 1e6;

/// The 2N equally-sloped line angles, sorted. Index i < N is the BH line
/// m = i - N/2 (angle atan(2m/N)); index i >= N is the BV line m = i - 3N/2
/// (angle pi/2 + atan(2m/N)). Together they cover [-pi/4, 3pi/4).
struct AngleSet {
    int n = 0;
    std::vector<double> angles;

    int block(std::size_t i) const { return i < static_cast<std::size_t>(n) ? 0 : 1; }
    int slope_index(std::size_t i) const {
        return static_cast<int>(i < static_cast<std::size_t>(n) ? i : i - n) - n / 2;
    }
};

AngleSet equally_sloped_angles(int n);

/// Per pseudo-polar sample interpolation error, PPData layout, values in [0, kEpsilonCap].
struct ErrorMap {
    int n = 0;
    std::vector<double> epsilon;
};

/// Delta / (H - Delta), 0 at a node, kEpsilonCap at (or beyond) the midpoint.
double epsilon_from_distance(double delta, double half_spacing);

/// Same line error for every sample of each of the 2N lines.
ErrorMap broadcast_line_error(std::span<const double> line_epsilon, int n);

/// Elementwise sum, capped.
ErrorMap combine(const ErrorMap& a, const ErrorMap& b);

struct RebinResult {
    ParallelSinogram sinogram;
    std::vector<double> epsilon;  // per ray, same layout as sinogram.data
};

/// Fan -> parallel by inverting l = R sin(gamma), phi = beta + gamma and
/// interpolating bilinearly in (gamma, beta). Each target ray uses whichever of
/// the direct and conjugate fan rays sits closer to a measured view. fan_epsilon
/// (optional, fan layout) is interpolated alongside and added.
RebinResult rebin_fan_to_parallel(const FanSinogram& fan, std::span<const double> target_angles, int n_offsets,
                                  std::span<const double> fan_epsilon = {});

/// Parallel data on arbitrary angles -> target angles by linear interpolation in
/// angle (period pi with the offset flip). Offsets must be symmetric.
RebinResult resample_parallel(const ParallelSinogram& measured, std::span<const double> target_angles);

/// Per-line error: |g|-weighted mean of 1/(1+eps) along each profile, mapped back to eps.
std::vector<double> line_epsilon(const ParallelSinogram& ps, std::span<const double> ray_epsilon);

/// Line-wise map from angular distances to the nearest measured angle (mod pi).
ErrorMap interpolation_error(std::span<const double> measured_angles, const AngleSet& target, int n);

/// Weight for a fan projection at short-scan position phi_ss and fan angle gamma.
double ssrb_weight(double phi_ss, double gamma, double gamma_T);

struct SsrbResult {
    FanSinogram fan;
    std::vector<double> epsilon;  // per fan sample
};

/// Single-slice rebinning of helical cone-beam data to one full turn of fan data at
/// height z. Requires equiangular source angles with a whole number per turn.
SsrbResult cb_ssrb(const ConeSinogram& cone, double z);

struct PPResult {
    PPData data;
    ErrorMap radial;
};

/// Central-slice regridding: zero-pad each profile by `oversample`, FFT, and
/// interpolate linearly in radius onto the pseudo-polar samples of its line.
/// The bilinear pixel basis is divided out so the result matches ppft_forward.
PPResult parallel_to_ppdata(const ParallelSinogram& ps, int oversample = 8);

} // namespace ppct
