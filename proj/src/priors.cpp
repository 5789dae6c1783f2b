#include "ppct/priors.hpp"

#include "ppct/fft.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ppct {
namespace {

const std::array<double, 4> kLow = [] {
    const double s3 = std::sqrt(3.0);
    const double norm = 4.0 * std::sqrt(2.0);
    return std::array<double, 4>{(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm};
}();

const std::array<double, 4> kHigh = {kLow[3], -kLow[2], kLow[1], -kLow[0]};

// One analysis step on a strided signal of length len (even).
void analyze(double* x, std::size_t stride, int len, std::vector<double>& tmp) {
    tmp.assign(static_cast<std::size_t>(len), 0.0);
    const int half = len / 2;
    for (int i = 0; i < half; ++i) {
        double a = 0.0;
        double d = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double v = x[static_cast<std::size_t>((2 * i + k) % len) * stride];
            a += kLow[k] * v;
            d += kHigh[k] * v;
        }
        tmp[i] = a;
        tmp[half + i] = d;
    }
    for (int i = 0; i < len; ++i)
        x[static_cast<std::size_t>(i) * stride] = tmp[i];
}

void synthesize(double* x, std::size_t stride, int len, std::vector<double>& tmp) {
    tmp.assign(static_cast<std::size_t>(len), 0.0);
    const int half = len / 2;
    for (int i = 0; i < half; ++i) {
        const double a = x[static_cast<std::size_t>(i) * stride];
        const double d = x[static_cast<std::size_t>(half + i) * stride];
        for (int k = 0; k < 4; ++k)
            tmp[(2 * i + k) % len] += kLow[k] * a + kHigh[k] * d;
    }
    for (int i = 0; i < len; ++i)
        x[static_cast<std::size_t>(i) * stride] = tmp[i];
}

void check_levels(int n, int levels) {
    if (levels < 0 || levels > 30 || n % (1 << levels) != 0)
        throw std::invalid_argument("wavelet depth " + std::to_string(levels) + " does not divide n = " +
                                    std::to_string(n));
}

// Forward differences with the last difference in each direction set to zero.
void gradient(const std::vector<double>& x, int n, std::vector<double>& gx, std::vector<double>& gy) {
    gx.assign(x.size(), 0.0);
    gy.assign(x.size(), 0.0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * n + c;
            if (c + 1 < n)
                gx[i] = x[i + 1] - x[i];
            if (r + 1 < n)
                gy[i] = x[i + n] - x[i];
        }
}

// Adjoint of gradient().
void gradient_adjoint(const std::vector<double>& px, const std::vector<double>& py, int n, std::vector<double>& out) {
    out.assign(px.size(), 0.0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * n + c;
            double v = 0.0;
            if (c + 1 < n)
                v -= px[i];
            if (c > 0)
                v += px[i - 1];
            if (r + 1 < n)
                v -= py[i];
            if (r > 0)
                v += py[i - n];
            out[i] = v;
        }
}

double tv_of(const std::vector<double>& x, int n) {
    double sum = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * n + c;
            const double dx = c + 1 < n ? x[i + 1] - x[i] : 0.0;
            const double dy = r + 1 < n ? x[i + n] - x[i] : 0.0;
            sum += std::sqrt(dx * dx + dy * dy);
        }
    return sum;
}

void shrink(std::vector<double>& dx, std::vector<double>& dy, double tau) {
    for (std::size_t i = 0; i < dx.size(); ++i) {
        const double mag = std::sqrt(dx[i] * dx[i] + dy[i] * dy[i]);
        const double scale = mag > tau ? (mag - tau) / mag : 0.0;
        dx[i] *= scale;
        dy[i] *= scale;
    }
}

} // namespace

int wavelet_levels(int n, int wanted) {
    int levels = 0;
    while (levels < wanted && n % (1 << (levels + 1)) == 0)
        ++levels;
    return levels;
}

WaveletCoeffs dwt_forward(const Image& img, int levels) {
    const int n = img.n;
    if (n < 2 || img.pixels.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("dwt_forward: invalid image");
    check_levels(n, levels);
    WaveletCoeffs c;
    c.n = n;
    c.levels = levels;
    c.values = img.pixels;
    std::vector<double> tmp;
    int len = n;
    for (int lev = 0; lev < levels; ++lev, len /= 2) {
        for (int r = 0; r < len; ++r)
            analyze(&c.values[static_cast<std::size_t>(r) * n], 1, len, tmp);
        for (int col = 0; col < len; ++col)
            analyze(&c.values[col], static_cast<std::size_t>(n), len, tmp);
    }
    return c;
}

Image dwt_inverse(const WaveletCoeffs& c) {
    const int n = c.n;
    if (n < 2 || c.values.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("dwt_inverse: invalid coefficients");
    check_levels(n, c.levels);
    Image img(n);
    img.pixels = c.values;
    std::vector<double> tmp;
    for (int lev = c.levels - 1; lev >= 0; --lev) {
        const int len = n >> lev;
        for (int col = 0; col < len; ++col)
            synthesize(&img.pixels[col], static_cast<std::size_t>(n), len, tmp);
        for (int r = 0; r < len; ++r)
            synthesize(&img.pixels[static_cast<std::size_t>(r) * n], 1, len, tmp);
    }
    return img;
}

double soft_threshold(double v, double tau) {
    const double mag = std::abs(v) - tau;
    return mag > 0.0 ? std::copysign(mag, v) : 0.0;
}

Image soft_threshold_prox(const Image& z, double tau, int levels) {
    if (tau < 0.0)
        throw std::invalid_argument("soft_threshold_prox: tau must be >= 0");
    if (tau == 0.0)
        return z;
    WaveletCoeffs c = dwt_forward(z, levels);
    for (double& v : c.values)
        v = soft_threshold(v, tau);
    Image out = dwt_inverse(c);
    out.pixel_size = z.pixel_size;
    return out;
}

double wavelet_l1(const Image& x, int levels) {
    double sum = 0.0;
    for (double v : dwt_forward(x, levels).values)
        sum += std::abs(v);
    return sum;
}

double tv_value(const Image& img) { return tv_of(img.pixels, img.n); }

Image tv_prox(const Image& z, double tau, int inner_iters) {
    if (tau < 0.0)
        throw std::invalid_argument("tv_prox: tau must be >= 0");
    if (tau == 0.0 || inner_iters <= 0)
        return z;
    const int n = z.n;
    if (n < 2 || z.pixels.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("tv_prox: invalid image");
    // Penalty weight of the split.
    constexpr double mu = 1.0;
    const double thresh = tau / mu;

    std::vector<double> denom(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double er = 2.0 - 2.0 * std::cos(std::numbers::pi * r / n);
            const double ec = 2.0 - 2.0 * std::cos(std::numbers::pi * c / n);
            denom[static_cast<std::size_t>(r) * n + c] = (1.0 + mu * (er + ec)) * 4.0 * n * n;
        }

    auto objective = [&](const std::vector<double>& x) {
        double fit = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            fit += (x[i] - z.pixels[i]) * (x[i] - z.pixels[i]);
        return 0.5 * fit + tau * tv_of(x, n);
    };

    std::vector<double> x = z.pixels;
    std::vector<double> gx;
    std::vector<double> gy;
    gradient(x, n, gx, gy);
    std::vector<double> dx = gx;
    std::vector<double> dy = gy;
    shrink(dx, dy, thresh);
    std::vector<double> bx(x.size(), 0.0);
    std::vector<double> by(x.size(), 0.0);
    std::vector<double> px(x.size());
    std::vector<double> py(x.size());
    std::vector<double> rhs;

    std::vector<double> best = x;
    double best_obj = objective(x);
    for (int it = 0; it < inner_iters; ++it) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            px[i] = dx[i] - bx[i];
            py[i] = dy[i] - by[i];
        }
        gradient_adjoint(px, py, n, rhs);
        for (std::size_t i = 0; i < x.size(); ++i)
            rhs[i] = z.pixels[i] + mu * rhs[i];
        fft::dct2(rhs, n);
        for (std::size_t i = 0; i < rhs.size(); ++i)
            rhs[i] /= denom[i];
        fft::dct3(rhs, n);
        x = rhs;

        gradient(x, n, gx, gy);
        for (std::size_t i = 0; i < x.size(); ++i) {
            dx[i] = gx[i] + bx[i];
            dy[i] = gy[i] + by[i];
        }
        shrink(dx, dy, thresh);
        for (std::size_t i = 0; i < x.size(); ++i) {
            bx[i] += gx[i] - dx[i];
            by[i] += gy[i] - dy[i];
        }
        const double obj = objective(x);
        if (obj < best_obj) {
            best_obj = obj;
            best = x;
        }
    }
    Image out(n);
    out.pixels = std::move(best);
    out.pixel_size = z.pixel_size;
    return out;
}

} // namespace ppct
