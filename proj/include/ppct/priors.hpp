#pragma once

#include "ppct/image.hpp"

#include <vector>

namespace ppct {

/// Multilevel 2-D Daubechies-4 coefficients in Mallat layout: the coarsest
/// approximation sits in the top-left (n >> levels)^2 block.
struct WaveletCoeffs {
    int n = 0;
    int levels = 0;
    std::vector<double> values;  // n x n row-major
};

/// Largest depth <= wanted that divides n.
int wavelet_levels(int n, int wanted = 4);

/// Orthonormal periodic transform. Throws unless n is divisible by 2^levels.
WaveletCoeffs dwt_forward(const Image& img, int levels = 4);
Image dwt_inverse(const WaveletCoeffs& c);

double soft_threshold(double v, double tau);

/// W soft(W^T z, tau); every band, approximation included, is thresholded.
Image soft_threshold_prox(const Image& z, double tau, int levels = 4);

/// sum |W^T x|.
double wavelet_l1(const Image& x, int levels = 4);

/// Isotropic TV with forward differences; the difference across the last
/// row/column is zero, so constants have zero TV.
double tv_value(const Image& img);

/// argmin_x 0.5 ||x - z||^2 + tau TV(x) by split Bregman. The returned iterate
/// is the best one seen (z included), so the objective never exceeds its value at z.
Image tv_prox(const Image& z, double tau, int inner_iters = 10);

} // namespace ppct
