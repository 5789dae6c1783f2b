#pragma once

#include "ppct/image.hpp"

#include <span>

// Thin wrapper over FFTW. Plans are created once per size under a lock and
// executed through the new-array interface, so every call is thread-safe and
// bit-reproducible regardless of buffer alignment.
namespace ppct::fft {

/// In-place unnormalized DFT, X[k] = sum_j x[j] exp(-2 pi i j k / n).
void forward(std::span<cplx> data);

/// In-place unnormalized inverse DFT (exponent sign +).
void inverse(std::span<cplx> data);

/// Contiguous batch of transforms of the given length, in place.
void forward_many(std::span<cplx> data, int length);
void inverse_many(std::span<cplx> data, int length);

/// In-place 2-D DCT-II of an n x n row-major array (FFTW REDFT10, unnormalized).
void dct2(std::span<double> data, int n);

/// Contiguous batch of transforms of the given length, in place.
void forward_many(std::span<cplx> data, int length);
void inverse_many(std::span<cplx> data, int length);

/// In-place 2-D DCT-III (REDFT01); dct3(dct2(x)) = (2n)^2 x.
void dct3(std::span<double> data, int n);

/// Smallest power of two >= n.
int next_pow2(int n);

} // namespace ppct::fft
