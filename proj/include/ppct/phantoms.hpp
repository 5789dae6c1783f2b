#pragma once

#include "ppct/image.hpp"

#include <span>

namespace ppct {

struct Ellipse {
    double x0 = 0.0;
    double y0 = 0.0;
    double a = 1.0;       // semi-axis along the rotated x direction
    double b = 1.0;       // semi-axis along the rotated y direction
    double angle = 0.0;   // radians, counter-clockwise
    double intensity = 0.0;

    bool contains(double x, double y) const;
};

/// The classic ten-ellipse Shepp-Logan table (unmodified intensities).
std::span<const Ellipse> shepp_logan_ellipses();

/// Sum of intensities of all ellipses containing (x, y), clipped at zero.
double ellipse_value(std::span<const Ellipse> ellipses, double x, double y);

/// Pixel-center rasterization of an ellipse list (no anti-aliasing).
Image rasterize(std::span<const Ellipse> ellipses, int n);

/// Requires n even and n >= 8.
Image shepp_logan(int n);

/// Pixels whose center lies within radius r (normalized units) get value v.
Image disk(int n, double r, double v);

/// Cylinder phantom for helical tests: an outer disk in every slice and two
/// smaller off-axis cylinders occupying slices [n_slices/4, n_slices - n_slices/4).
/// z_spacing <= 0 selects isotropic voxels (2 / n).
Volume helical_test_volume(int n, int n_slices, double z_spacing = 0.0);

} // namespace ppct
