#include "ppct/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ppct {

Image::Image(int side, double value)
    : n(side), pixels(static_cast<std::size_t>(side) * side, value) {}

void validate(const Image& img) {
    if (img.n < 2 || img.n % 2 != 0)
        throw std::invalid_argument("image side must be even and >= 2, got " + std::to_string(img.n));
    if (img.pixels.size() != static_cast<std::size_t>(img.n) * img.n)
        throw std::invalid_argument("image pixel buffer does not match its side length");
    for (double v : img.pixels)
        if (!std::isfinite(v))
            throw std::invalid_argument("image contains non-finite values");
}

void validate(const Volume& vol) {
    if (vol.slices.empty())
        throw std::invalid_argument("volume has no slices");
    for (const auto& s : vol.slices) {
        validate(s);
        if (s.n != vol.n())
            throw std::invalid_argument("volume slices differ in size");
    }
    if (!(vol.z_spacing > 0.0))
        throw std::invalid_argument("volume z spacing must be positive");
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm2(std::span<const cplx> a) {
    double s = 0.0;
    for (const auto& v : a)
        s += std::norm(v);
    return std::sqrt(s);
}

double real_dot(std::span<const cplx> a, std::span<const cplx> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
}

} // namespace ppct
