#include "doctest.h"

#include "ppct/phantoms.hpp"
#include "ppct/priors.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace ppct;

namespace {

Image random_image(int n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, scale);
    Image img(n);
    for (auto& p : img.pixels)
        p = dist(rng);
    return img;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

double distance(const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a.pixels[i] - b.pixels[i]) * (a.pixels[i] - b.pixels[i]);
    return std::sqrt(s);
}

// Single-level periodic Daubechies-4 analysis of one sequence, from the filter definition.
std::vector<double> d4_step(const std::vector<double>& x) {
    const double s3 = std::sqrt(3.0);
    const double d = 4.0 * std::sqrt(2.0);
    const double h[4] = {(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d};
    const double g[4] = {h[3], -h[2], h[1], -h[0]};
    const std::size_t n = x.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n / 2; ++i)
        for (std::size_t k = 0; k < 4; ++k) {
            out[i] += h[k] * x[(2 * i + k) % n];
            out[n / 2 + i] += g[k] * x[(2 * i + k) % n];
        }
    return out;
}

// Neumann-boundary TV by direct summation.
double tv_oracle(const Image& x) {
    const int n = x.n;
    double s = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double dx = c + 1 < n ? x(r, c + 1) - x(r, c) : 0.0;
            const double dy = r + 1 < n ? x(r + 1, c) - x(r, c) : 0.0;
            s += std::hypot(dx, dy);
        }
    return s;
}

double tv_objective(const Image& x, const Image& z, double tau) {
    const double d = distance(x, z);
    return 0.5 * d * d + tau * tv_oracle(x);
}

// Gradient descent on a Huber-smoothed TV; reports the best true objective seen.
double gradient_descent_oracle(const Image& z, double tau, int iters) {
    const int n = z.n;
    const double mu = 1e-3;
    const double step = 1.0 / (1.0 + 8.0 * tau / mu);
    Image x = z;
    double best = tv_objective(x, z, tau);
    for (int it = 0; it < iters; ++it) {
        Image grad(n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const double dx = c + 1 < n ? x(r, c + 1) - x(r, c) : 0.0;
                const double dy = r + 1 < n ? x(r + 1, c) - x(r, c) : 0.0;
                const double m = std::max(std::hypot(dx, dy), mu);
                const double px = tau * dx / m;
                const double py = tau * dy / m;
                if (c + 1 < n) {
                    grad(r, c + 1) += px;
                    grad(r, c) -= px;
                }
                if (r + 1 < n) {
                    grad(r + 1, c) += py;
                    grad(r, c) -= py;
                }
            }
        for (std::size_t i = 0; i < x.size(); ++i)
            x.pixels[i] -= step * (x.pixels[i] - z.pixels[i] + grad.pixels[i]);
        best = std::min(best, tv_objective(x, z, tau));
    }
    return best;
}

} // namespace

TEST_CASE("wavelet transform is orthonormal with perfect reconstruction") {
    const Image x = random_image(64, 1);
    const WaveletCoeffs w = dwt_forward(x);
    CHECK(w.levels == 4);
    CHECK(norm(w.values) == doctest::Approx(norm(x.pixels)).epsilon(1e-12));
    const Image back = dwt_inverse(w);
    CHECK(distance(back, x) < 1e-10 * norm(x.pixels));

    const Image flat(64, 3.0);
    const WaveletCoeffs c = dwt_forward(flat);
    const int coarse = 64 >> 4;
    for (int r = 0; r < 64; ++r)
        for (int col = 0; col < 64; ++col)
            if (r >= coarse || col >= coarse)
                CHECK(std::abs(c.values[static_cast<std::size_t>(r) * 64 + col]) < 1e-12);

    CHECK_THROWS_AS(dwt_forward(x, 7), std::invalid_argument);
    CHECK_THROWS_AS(dwt_forward(Image(12), 3), std::invalid_argument);
    CHECK(wavelet_levels(64) == 4);
    CHECK(wavelet_levels(12) == 2);
}

TEST_CASE("one wavelet level matches the filter-bank definition") {
    const int n = 8;
    const Image x = random_image(n, 2);
    std::vector<double> work = x.pixels;
    for (int r = 0; r < n; ++r) {
        const std::vector<double> row(work.begin() + r * n, work.begin() + (r + 1) * n);
        const auto out = d4_step(row);
        std::copy(out.begin(), out.end(), work.begin() + r * n);
    }
    for (int c = 0; c < n; ++c) {
        std::vector<double> col(n);
        for (int r = 0; r < n; ++r)
            col[r] = work[r * n + c];
        const auto out = d4_step(col);
        for (int r = 0; r < n; ++r)
            work[r * n + c] = out[r];
    }
    const WaveletCoeffs w = dwt_forward(x, 1);
    for (std::size_t i = 0; i < work.size(); ++i)
        CHECK(w.values[i] == doctest::Approx(work[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("soft thresholding") {
    CHECK(soft_threshold(5.0, 2.0) == 3.0);
    CHECK(soft_threshold(-1.0, 2.0) == 0.0);
    CHECK(soft_threshold(-5.0, 2.0) == -3.0);
    CHECK(soft_threshold(2.0, 2.0) == 0.0);

    const Image z = random_image(32, 3);
    const Image same = soft_threshold_prox(z, 0.0);
    CHECK(same.pixels == z.pixels);

    double biggest = 0.0;
    for (double v : dwt_forward(z).values)
        biggest = std::max(biggest, std::abs(v));
    for (double v : soft_threshold_prox(z, biggest * 1.01).pixels)
        CHECK(std::abs(v) < 1e-12);

    const double tau = 0.5;
    const Image x = soft_threshold_prox(z, tau);
    const auto wz = dwt_forward(z).values;
    const auto wx = dwt_forward(x).values;
    for (std::size_t i = 0; i < wz.size(); ++i) {
        CHECK(std::abs(wx[i]) <= std::abs(wz[i]) + 1e-12);
        CHECK(wx[i] == doctest::Approx(soft_threshold(wz[i], tau)).epsilon(1e-10).scale(1.0));
    }
    CHECK_THROWS_AS(soft_threshold_prox(z, -1.0), std::invalid_argument);

    for (std::uint64_t s = 10; s < 15; ++s) {
        const Image a = random_image(32, s);
        const Image b = random_image(32, s + 100);
        CHECK(distance(soft_threshold_prox(a, 0.3), soft_threshold_prox(b, 0.3)) <= distance(a, b) + 1e-12);
    }
    double l1 = 0.0;
    for (double v : wz)
        l1 += std::abs(v);
    CHECK(wavelet_l1(z, 4) == doctest::Approx(l1));
}

TEST_CASE("total variation value") {
    CHECK(tv_value(Image(16, 2.5)) == 0.0);
    Image dot(8);
    dot(3, 4) = 1.0;
    CHECK(tv_value(dot) == doctest::Approx(tv_oracle(dot)));
    CHECK(tv_value(dot) == doctest::Approx(2.0 + std::sqrt(2.0)));
    const Image x = random_image(16, 4);
    CHECK(tv_value(x) == doctest::Approx(tv_oracle(x)));
    Image scaled = x;
    for (auto& p : scaled.pixels)
        p *= -3.0;
    CHECK(tv_value(scaled) == doctest::Approx(3.0 * tv_value(x)));
}

TEST_CASE("total variation prox") {
    const Image z = random_image(16, 5);
    CHECK(tv_prox(z, 0.0).pixels == z.pixels);
    const Image flat(16, 1.7);
    const Image fx = tv_prox(flat, 0.8);
    for (double v : fx.pixels)
        CHECK(v == doctest::Approx(1.7));
    CHECK_THROWS_AS(tv_prox(z, -1.0), std::invalid_argument);

    // Step profile along x with mild noise.
    Image step(32);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c)
            step(r, c) = (c < 16 ? 0.0 : 1.0) + noise(rng);
    for (double tau : {0.02, 0.05, 0.1}) {
        CAPTURE(tau);
        const Image x = tv_prox(step, tau, 10);
        const double obj = tv_objective(x, step, tau);
        CHECK(obj <= tv_objective(step, step, tau));
        CHECK(obj <= gradient_descent_oracle(step, tau, 200) + 1e-4);
    }

    for (std::uint64_t s = 20; s < 25; ++s) {
        const Image a = random_image(16, s, 0.3);
        const Image b = random_image(16, s + 100, 0.3);
        CHECK(tv_objective(tv_prox(a, 0.1), a, 0.1) <= tv_objective(a, a, 0.1));
        CHECK(distance(tv_prox(a, 0.1), tv_prox(b, 0.1)) <= distance(a, b) * (1.0 + 1e-6));
    }
}
