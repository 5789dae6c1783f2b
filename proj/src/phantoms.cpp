#include "ppct/phantoms.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ppct {
namespace {

constexpr double deg = std::numbers::pi / 180.0;

const std::array<Ellipse, 10> kSheppLogan = {{
    {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
    {0.0, -0.0184, 0.6624, 0.8740, 0.0, -0.98},
    {0.22, 0.0, 0.11, 0.31, -18.0 * deg, -0.02},
    {-0.22, 0.0, 0.16, 0.41, 18.0 * deg, -0.02},
    {0.0, 0.35, 0.21, 0.25, 0.0, 0.01},
    {0.0, 0.1, 0.046, 0.046, 0.0, 0.01},
    {0.0, -0.1, 0.046, 0.046, 0.0, 0.01},
    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.01},
    {0.0, -0.606, 0.023, 0.023, 0.0, 0.01},
    {0.06, -0.605, 0.023, 0.046, 0.0, 0.01},
}};

void require_even(int n, int minimum, const char* what) {
    if (n < minimum || n % 2 != 0)
        throw std::invalid_argument(std::string(what) + ": n must be even and >= " + std::to_string(minimum) +
                                    ", got " + std::to_string(n));
}

} // namespace

bool Ellipse::contains(double x, double y) const {
    const double dx = x - x0;
    const double dy = y - y0;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double u = dx * c + dy * s;
    const double v = -dx * s + dy * c;
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
}

std::span<const Ellipse> shepp_logan_ellipses() { return kSheppLogan; }

double ellipse_value(std::span<const Ellipse> ellipses, double x, double y) {
    double v = 0.0;
    for (const auto& e : ellipses)
        if (e.contains(x, y))
            v += e.intensity;
    return std::max(v, 0.0);
}

Image rasterize(std::span<const Ellipse> ellipses, int n) {
    for (const auto& e : ellipses)
        if (!(e.a > 0.0) || !(e.b > 0.0))
            throw std::invalid_argument("ellipse semi-axes must be positive");
    Image img(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            img(r, c) = ellipse_value(ellipses, img.x_center(c), img.y_center(r));
    return img;
}

Image shepp_logan(int n) {
    require_even(n, 8, "shepp_logan");
    return rasterize(kSheppLogan, n);
}

Image disk(int n, double r, double v) {
    require_even(n, 2, "disk");
    if (!(r > 0.0) || r > 1.0)
        throw std::invalid_argument("disk: radius must lie in (0, 1]");
    Image img(n);
    for (int row = 0; row < n; ++row)
        for (int c = 0; c < n; ++c) {
            const double x = img.x_center(c);
            const double y = img.y_center(row);
            if (x * x + y * y <= r * r)
                img(row, c) = v;
        }
    return img;
}

Volume helical_test_volume(int n, int n_slices, double z_spacing) {
    require_even(n, 2, "helical_test_volume");
    if (n_slices < 3)
        throw std::invalid_argument("helical_test_volume: need at least 3 slices");

    const std::array<Ellipse, 1> outer = {{{0.0, 0.0, 0.8, 0.8, 0.0, 1.0}}};
    const std::array<Ellipse, 3> inner = {{
        {0.0, 0.0, 0.8, 0.8, 0.0, 1.0},
        {0.3, 0.2, 0.18, 0.18, 0.0, 1.0},
        {-0.35, -0.15, 0.12, 0.12, 0.0, 0.5},
    }};

    Volume vol;
    vol.z_spacing = z_spacing > 0.0 ? z_spacing : 2.0 / n;
    const int lo = n_slices / 4;
    const int hi = n_slices - n_slices / 4;
    const Image plain = rasterize(outer, n);
    const Image featured = rasterize(inner, n);
    for (int k = 0; k < n_slices; ++k)
        vol.slices.push_back(k >= lo && k < hi && k > 0 && k < n_slices - 1 ? featured : plain);
    return vol;
}

} // namespace ppct
