#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ppct {

using cplx = std::complex<double>;

/// Square attenuation image covering the normalized square [-1,1]^2.
///
/// Row r, column c has its center at x = -1 + (c + 0.5) h, y = -1 + (r + 0.5) h
/// with h = 2 / n. Pixels are stored row-major.
struct Image {
    int n = 0;
    std::vector<double> pixels;
    double pixel_size = 1.0;

    Image() = default;
    explicit Image(int side, double value = 0.0);

    double& operator()(int row, int col) { return pixels[static_cast<std::size_t>(row) * n + col]; }
    double operator()(int row, int col) const { return pixels[static_cast<std::size_t>(row) * n + col]; }

    std::size_t size() const { return pixels.size(); }
    double spacing() const { return 2.0 / n; }
    double x_center(int col) const { return -1.0 + (col + 0.5) * spacing(); }
    double y_center(int row) const { return -1.0 + (row + 0.5) * spacing(); }
};

/// Throws std::invalid_argument unless n is even, >= 2 and every pixel is finite.
void validate(const Image& img);

/// Stack of equally sized slices; slice k sits at z = (k - (count-1)/2) * z_spacing.
struct Volume {
    std::vector<Image> slices;
    double z_spacing = 1.0;

    int n() const { return slices.empty() ? 0 : slices.front().n; }
    int count() const { return static_cast<int>(slices.size()); }
    double z_of(int k) const { return (k - 0.5 * (count() - 1)) * z_spacing; }
};

void validate(const Volume& vol);

// Elementwise helpers used across the solver and metrics.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm2(std::span<const cplx> a);
/// Real part of sum conj(a_i) b_i.
double real_dot(std::span<const cplx> a, std::span<const cplx> b);

} // namespace ppct
