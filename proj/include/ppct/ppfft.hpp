#pragma once

#include "ppct/image.hpp"

#include <span>
#include <vector>

namespace ppct {

/// Samples of the image spectrum on the pseudo-polar grid.
///
/// Two blocks of 2N x N samples, basically-horizontal (BH) first, each indexed by
/// the radial index l in [-N, N) and the slope index m in [-N/2, N/2). With pixel
/// (row r, col c) at centered coordinates u = c - N/2, v = r - N/2 the samples are
///
///   F(wx, wy) = sum_{u,v} f[v,u] exp(-i (wx u + wy v))
///
///   BH: wx = pi l / N,  wy =  wx * 2m / N   (line angle atan(2m/N))
///   BV: wy = pi l / N,  wx = -wy * 2m / N   (line angle pi/2 + atan(2m/N))
///
/// so the 2N lines sit exactly on the equally-sloped angles, each once.
struct PPCoefficients {
    int n = 0;
    std::vector<cplx> values;

    PPCoefficients() = default;
    explicit PPCoefficients(int side) : n(side), values(4 * static_cast<std::size_t>(side) * side) {}

    /// block 0 = BH, 1 = BV.
    std::size_t index(int block, int l, int m) const {
        return (static_cast<std::size_t>(block) * 2 * n + (l + n)) * n + (m + n / 2);
    }
    cplx& at(int block, int l, int m) { return values[index(block, l, m)]; }
    cplx at(int block, int l, int m) const { return values[index(block, l, m)]; }
    std::size_t size() const { return values.size(); }
};

/// Measured data lives on the same grid as the transform output.
using PPData = PPCoefficients;

struct Frequency {
    double wx = 0.0;
    double wy = 0.0;
};

/// Digital frequency (radians per pixel) of sample (block, l, m).
Frequency pp_frequency(int n, int block, int l, int m);

/// Angle of the pseudo-polar line (block, m).
double pp_line_angle(int n, int block, int m);

/// Signed radius |w| of sample (block, l, m), sign of l.
double pp_radius(int n, int block, int l, int m);

/// y[m] = sum_k x[k] exp(-2 pi i k m slope / K), chirp-z in O(K log K).
std::vector<cplx> frac_dft(std::span<const cplx> x, double slope);

/// Same with indices shifted by `offset` on both sides: k -> k + offset, m -> m + offset.
std::vector<cplx> frac_dft(std::span<const cplx> x, double slope, int offset);

/// Pseudo-polar Fourier transform, O(N^2 log N). Requires even n.
PPCoefficients ppft_forward(const Image& img);

/// Exact adjoint of ppft_forward as a map from C^{4N^2} to R^{N^2}:
/// <A x, y> = <x, A^T y> with the real inner product Re(sum conj(a) b).
Image ppft_adjoint(const PPCoefficients& c);

struct LsResult {
    Image image;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Least-squares inverse by conjugate gradients on A^T W A x = A^T W c with the
/// radial density weight W = max(|l|, 1).
LsResult ppft_ls_inverse(const PPCoefficients& c, double tol, int maxiter);

/// Largest eigenvalue of A^T A by power iteration (cached per n).
double ppft_sigma_max(int n);

} // namespace ppct
