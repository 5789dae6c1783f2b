#include "ppct/fbp.hpp"

#include "ppct/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ppct {

RampFilter parse_filter(const std::string& name) {
    if (name == "ram-lak")
        return RampFilter::RamLak;
    if (name == "shepp-logan" || name == "shepp-logan-filter")
        return RampFilter::SheppLogan;
    if (name == "hann")
        return RampFilter::Hann;
    throw std::invalid_argument("unknown filter '" + name + "' (ram-lak, shepp-logan, hann)");
}

Image fbp_parallel(const ParallelSinogram& ps, RampFilter filter, int n) {
    constexpr double pi = std::numbers::pi;
    const std::size_t n_angles = ps.angles.size();
    const std::size_t n_off = ps.offsets.size();
    if (n < 2 || n % 2 != 0)
        throw std::invalid_argument("fbp: image size must be even");
    if (n_angles < 2)
        throw std::invalid_argument("fbp: need at least two angles");
    if (n_off < 2 || ps.data.size() != n_angles * n_off)
        throw std::invalid_argument("fbp: data size does not match angles x offsets");
    const auto [lo, hi] = std::minmax_element(ps.angles.begin(), ps.angles.end());
    const double span = (*hi - *lo) * static_cast<double>(n_angles) / static_cast<double>(n_angles - 1);
    if (span < pi - 1e-9)
        throw std::invalid_argument("fbp: angles must cover at least a half turn");
    const double ds = ps.offsets[1] - ps.offsets[0];
    for (std::size_t j = 1; j < n_off; ++j)
        if (std::abs(ps.offsets[j] - ps.offsets[j - 1] - ds) > 1e-9)
            throw std::invalid_argument("fbp: offsets must be uniform");

    // Band-limited ramp kernel sampled in space, so the DC term is handled exactly.
    const int len = fft::next_pow2(2 * static_cast<int>(n_off));
    std::vector<cplx> kernel(static_cast<std::size_t>(len));
    for (int k = -len / 2; k < len / 2; ++k) {
        double v = 0.0;
        if (k == 0)
            v = 1.0 / (4.0 * ds * ds);
        else if (k % 2 != 0)
            v = -1.0 / (pi * pi * k * k * ds * ds);
        kernel[(k + len) % len] = v;
    }
    fft::forward(kernel);
    for (int k = 0; k < len; ++k) {
        const double f = 2.0 * std::min(k, len - k) / static_cast<double>(len);  // fraction of Nyquist
        double w = 1.0;
        if (filter == RampFilter::SheppLogan)
            w = f > 0.0 ? std::sin(0.5 * pi * f) / (0.5 * pi * f) : 1.0;
        else if (filter == RampFilter::Hann)
            w = 0.5 * (1.0 + std::cos(pi * f));
        kernel[k] *= w * ds / len;
    }

    std::vector<double> filtered(n_angles * n_off);
    const auto rows = static_cast<long>(n_angles);
#pragma omp parallel
    {
        std::vector<cplx> buf(static_cast<std::size_t>(len));
#pragma omp for schedule(static)
        for (long a = 0; a < rows; ++a) {
            std::fill(buf.begin(), buf.end(), cplx{});
            for (std::size_t j = 0; j < n_off; ++j)
                buf[j] = ps.at(a, j);
            fft::forward(buf);
            for (int k = 0; k < len; ++k)
                buf[k] *= kernel[k];
            fft::inverse(buf);
            for (std::size_t j = 0; j < n_off; ++j)
                filtered[a * n_off + j] = buf[j].real();
        }
    }

    Image img(n);
    const double scale = pi / static_cast<double>(n_angles);
    std::vector<double> cs(n_angles);
    std::vector<double> sn(n_angles);
    for (std::size_t a = 0; a < n_angles; ++a) {
        cs[a] = std::cos(ps.angles[a]);
        sn[a] = std::sin(ps.angles[a]);
    }
#pragma omp parallel for schedule(static)
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double x = img.x_center(c);
            const double y = img.y_center(r);
            double sum = 0.0;
            for (std::size_t a = 0; a < n_angles; ++a) {
                const double pos = (x * cs[a] + y * sn[a] - ps.offsets[0]) / ds;
                const double p0 = std::floor(pos);
                const long j0 = static_cast<long>(p0);
                const double t = pos - p0;
                const double* row = &filtered[a * n_off];
                if (j0 >= 0 && j0 < static_cast<long>(n_off))
                    sum += (1.0 - t) * row[j0];
                if (j0 + 1 >= 0 && j0 + 1 < static_cast<long>(n_off))
                    sum += t * row[j0 + 1];
            }
            img(r, c) = sum * scale;
        }
    return img;
}

} // namespace ppct
