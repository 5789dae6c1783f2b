#include "doctest.h"

#include "ppct/priors.hpp"
#include "ppct/solver.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ppct;

namespace {

constexpr double pi = std::numbers::pi;

Image random_image(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    Image img(n);
    for (auto& p : img.pixels)
        p = dist(rng);
    return img;
}

// Piecewise constant on dyadic blocks, so few Haar-like wavelet coefficients.
Image blocks(int n) {
    Image img(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            if (r >= n / 4 && r < 3 * n / 4 && c >= n / 4 && c < 3 * n / 4)
                img(r, c) = 1.0;
            if (r >= n / 2 && r < 5 * n / 8 && c >= 3 * n / 8 && c < n / 2)
                img(r, c) = 2.0;
        }
    return img;
}

double rel_error(const Image& a, const Image& ref) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::pow(a.pixels[i] - ref.pixels[i], 2);
        den += ref.pixels[i] * ref.pixels[i];
    }
    return std::sqrt(num / den);
}

// Explicit pseudo-polar matrix row for (block, l, m), pixel order row-major.
std::vector<cplx> matrix_row(int n, int block, int l, int m) {
    std::vector<cplx> row(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double u = c - n / 2;
            const double v = r - n / 2;
            double wx = 0.0;
            double wy = 0.0;
            if (block == 0) {
                wx = pi * l / n;
                wy = wx * 2.0 * m / n;
            } else {
                wy = pi * l / n;
                wx = -wy * 2.0 * m / n;
            }
            row[static_cast<std::size_t>(r) * n + c] = std::polar(1.0, -(wx * u + wy * v));
        }
    return row;
}

double weighted_residual(const PPData& y, const Weights& w, const Image& x) {
    const PPCoefficients ax = ppft_forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.values.size(); ++i)
        s += w.c[i] * w.c[i] * std::norm(y.values[i] - ax.values[i]);
    return std::sqrt(s);
}

} // namespace

TEST_CASE("e_step with zero residual or zero weights returns r") {
    const int n = 8;
    const Image r = random_image(n, 1);
    const PPData y = ppft_forward(r);
    Weights w = unit_weights(n);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& c : w.c)
        c = u(rng);
    const double alpha = 1.0 / std::sqrt(ppft_sigma_max(n));
    const Image z = e_step(r, y, w, alpha);
    for (std::size_t i = 0; i < r.size(); ++i)
        CHECK(z.pixels[i] == doctest::Approx(r.pixels[i]).epsilon(1e-12));

    Weights zero = unit_weights(n);
    std::fill(zero.c.begin(), zero.c.end(), 0.0);
    const Image z0 = e_step(r, ppft_forward(random_image(n, 2)), zero, alpha);
    for (std::size_t i = 0; i < r.size(); ++i)
        CHECK(z0.pixels[i] == r.pixels[i]);

    CHECK_THROWS_AS(e_step(random_image(4, 1), y, w, alpha), std::invalid_argument);
    Weights short_w = w;
    short_w.c.pop_back();
    CHECK_THROWS_AS(e_step(r, y, short_w, alpha), std::invalid_argument);
}

TEST_CASE("e_step against the explicit matrix at n=8") {
    const int n = 8;
    const Image r = random_image(n, 3);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    PPData y(n);
    for (auto& v : y.values)
        v = {g(rng), g(rng)};
    const double alpha = 0.7 / std::sqrt(ppft_sigma_max(n));

    // z = r + alpha^2 Re(A^H (y - A r)), with c = 1.
    std::vector<cplx> resid;
    std::vector<std::vector<cplx>> rows;
    for (int block = 0; block < 2; ++block)
        for (int l = -n; l < n; ++l)
            for (int m = -n / 2; m < n / 2; ++m) {
                rows.push_back(matrix_row(n, block, l, m));
                cplx ar{};
                for (std::size_t j = 0; j < r.size(); ++j)
                    ar += rows.back()[j] * r.pixels[j];
                resid.push_back(y.at(block, l, m) - ar);
            }
    std::vector<double> expect(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) {
        cplx acc{};
        for (std::size_t k = 0; k < rows.size(); ++k)
            acc += std::conj(rows[k][j]) * resid[k];
        expect[j] = r.pixels[j] + alpha * alpha * acc.real();
    }
    const Image z = e_step(r, y, unit_weights(n), alpha);
    double scale = 0.0;
    double worst = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        scale = std::max(scale, std::abs(expect[j]));
        worst = std::max(worst, std::abs(expect[j] - z.pixels[j]));
    }
    CHECK(worst / scale < 1e-10);
}

TEST_CASE("momentum step") {
    const Image x = random_image(4, 5);
    const Image x_prev = random_image(4, 6);
    auto [t2, r2] = momentum_step(1.0, x, x_prev);
    CHECK(t2 == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
    // t = 1 gives no extrapolation.
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(r2.pixels[i] == x.pixels[i]);

    auto [t3, r3] = momentum_step(2.0, x, x_prev);
    CHECK(t3 == doctest::Approx((1.0 + std::sqrt(17.0)) / 2.0).epsilon(1e-15));
    const double beta = 1.0 / t3;
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(r3.pixels[i] == doctest::Approx(x.pixels[i] + beta * (x.pixels[i] - x_prev.pixels[i])));

    auto [t4, r4] = momentum_step(3.0, x, x);
    CHECK(t4 > 3.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(r4.pixels[i] == doctest::Approx(x.pixels[i]));

    CHECK_THROWS_AS(momentum_step(0.5, x, x), std::invalid_argument);
}

TEST_CASE("step scale check") {
    const int n = 16;
    const double bound = 1.0 / std::sqrt(ppft_sigma_max(n));
    std::string warning;
    CHECK(step_scale_check(0.5 * bound, n, &warning) == 0.5 * bound);
    CHECK(warning.empty());
    CHECK(step_scale_check(10.0 * bound, n, &warning) == doctest::Approx(bound));
    CHECK_FALSE(warning.empty());
    CHECK(step_scale_check(0.0, n) == doctest::Approx(bound));
}

TEST_CASE("fcsa_lem recovers a consistent piecewise-constant image") {
    const int n = 64;
    const Image truth = blocks(n);
    const PPData y = ppft_forward(truth);
    SolverConfig cfg;
    cfg.lambda1 = 1e-7;
    cfg.lambda2 = 1e-7;
    cfg.maxiter = 300;
    cfg.tol = 1e-12;
    const ReconResult res = fcsa_lem(y, unit_weights(n), cfg);
    CHECK(rel_error(res.image, truth) < 1e-3);
    CHECK(res.iterations <= 300);
    CHECK(res.f1.size() == static_cast<std::size_t>(res.iterations));
    CHECK(res.f2.size() == static_cast<std::size_t>(res.iterations));
    CHECK(res.rel_change.size() == static_cast<std::size_t>(res.iterations));
}

TEST_CASE("first iteration is the objective-weighted mix of the two proximal branches") {
    const int n = 16;
    const Image truth = blocks(n);
    const PPData y = ppft_forward(truth);
    const Weights w = unit_weights(n);
    SolverConfig cfg;
    cfg.lambda1 = 0.05;
    cfg.lambda2 = 0.08;
    cfg.maxiter = 1;
    const ReconResult res = fcsa_lem(y, w, cfg);
    REQUIRE(res.iterations == 1);

    // r_1 = 0.
    const Image z = e_step(Image(n), y, w, res.alpha);
    const double a2 = res.alpha * res.alpha;
    const int levels = wavelet_levels(n);
    const Image x1 = soft_threshold_prox(z, cfg.lambda1 * a2, levels);
    const Image x2 = tv_prox(z, cfg.lambda2 * a2, cfg.tv_inner_iters);
    auto data = [&](const Image& x) {
        const PPCoefficients ax = ppft_forward(x);
        double s = 0.0;
        for (std::size_t i = 0; i < ax.size(); ++i)
            s += std::norm(y.values[i] - ax.values[i]);
        return 0.5 * s;
    };
    const double f1 = data(x1) + cfg.lambda1 * wavelet_l1(x1, levels);
    const double f2 = data(x2) + cfg.lambda2 * tv_value(x2);
    CHECK(res.f1[0] == doctest::Approx(f1).epsilon(1e-10));
    CHECK(res.f2[0] == doctest::Approx(f2).epsilon(1e-10));
    const double delta = f2 / (f1 + f2);
    CHECK(delta >= 0.0);
    CHECK(delta <= 1.0);

    for (std::size_t i = 0; i < z.size(); ++i)
        CHECK(res.image.pixels[i] ==
              doctest::Approx(delta * x1.pixels[i] + (1.0 - delta) * x2.pixels[i]).epsilon(1e-9));

}

TEST_CASE("ista_baseline is fcsa_lem with unit weights and no TV branch") {
    const int n = 16;
    const PPData y = ppft_forward(blocks(n));
    SolverConfig cfg;
    cfg.maxiter = 20;
    cfg.lambda2 = 0.3;
    const ReconResult a = ista_baseline(y, cfg);
    SolverConfig plain = cfg;
    plain.lambda2 = 0.0;
    const ReconResult b = fcsa_lem(y, unit_weights(n), plain);
    CHECK(a.iterations == b.iterations);
    CHECK(a.image.pixels == b.image.pixels);
}

TEST_CASE("ista_baseline converges on consistent data") {
    const int n = 64;
    const Image truth = blocks(n);
    SolverConfig cfg;
    cfg.lambda1 = 1e-7;
    cfg.maxiter = 300;
    cfg.tol = 1e-12;
    const ReconResult res = ista_baseline(ppft_forward(truth), cfg);
    CHECK(rel_error(res.image, truth) < 1e-2);
}

// Density-weighted CG reaches machine precision in about ten iterations, which
// first-order iterations cannot match at an equal budget.
TEST_CASE("unregularized iterations within twice the least-squares residual at equal budget" *
          doctest::should_fail()) {
    const int n = 32;
    const Image truth = random_image(n, 11);
    const PPData y = ppft_forward(truth);
    const int budget = 40;
    SolverConfig cfg;
    cfg.lambda1 = 0.0;
    cfg.lambda2 = 0.0;
    cfg.maxiter = budget;
    cfg.tol = 1e-14;
    const ReconResult res = fcsa_lem(y, unit_weights(n), cfg);
    const LsResult ls = ppft_ls_inverse(y, 1e-14, budget);
    const double y_norm = norm2(y.values);
    const double ours = weighted_residual(y, unit_weights(n), res.image) / y_norm;
    const double oracle = weighted_residual(y, unit_weights(n), ls.image) / y_norm;
    CHECK(ours <= 2.0 * oracle);
}

TEST_CASE("unregularized iterations approach the least-squares solution") {
    const int n = 32;
    const Image truth = random_image(n, 11);
    const PPData y = ppft_forward(truth);
    const Image ls = ppft_ls_inverse(y, 1e-14, 100).image;
    const double y_norm = norm2(y.values);
    double prev = 1.0;
    for (int budget : {10, 40, 160}) {
        SolverConfig cfg;
        cfg.lambda1 = 0.0;
        cfg.lambda2 = 0.0;
        cfg.maxiter = budget;
        cfg.tol = 1e-14;
        const ReconResult res = fcsa_lem(y, unit_weights(n), cfg);
        const double r = weighted_residual(y, unit_weights(n), res.image) / y_norm;
        CHECK(r < prev);
        prev = r;
    }
    CHECK(prev < 0.01);
    SolverConfig cfg;
    cfg.lambda1 = 0.0;
    cfg.lambda2 = 0.0;
    cfg.maxiter = 400;
    cfg.tol = 1e-14;
    CHECK(rel_error(fcsa_lem(y, unit_weights(n), cfg).image, ls) < 0.05);
}

TEST_CASE("weighted residual is nonincreasing after the first iterations") {
    const int n = 32;
    const Image truth = blocks(n);
    const PPData y = ppft_forward(truth);
    Weights w = unit_weights(n);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (double& c : w.c)
        c = u(rng);
    double prev = 0.0;
    for (int k = 1; k <= 30; ++k) {
        SolverConfig cfg;
        cfg.lambda1 = 1e-6;
        cfg.lambda2 = 1e-6;
        cfg.maxiter = k;
        cfg.tol = 1e-14;
        const double res = weighted_residual(y, w, fcsa_lem(y, w, cfg).image);
        if (k > 5)
            CHECK(res <= prev * (1.0 + 1e-9));
        prev = res;
    }
}

TEST_CASE("divergence and configuration errors") {
    const int n = 8;
    PPData y = ppft_forward(random_image(n, 2));
    y.values[3] = {std::nan(""), 0.0};
    SolverConfig cfg;
    cfg.lambda1 = 0.25;
    cfg.lambda2 = 0.5;
    try {
        fcsa_lem(y, unit_weights(n), cfg);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("lambda1 = 0.25") != std::string::npos);
        CHECK(msg.find("alpha") != std::string::npos);
    }
    CHECK_THROWS_AS(ista_baseline(y, cfg), DivergenceError);

    const PPData ok = ppft_forward(random_image(n, 2));
    SolverConfig bad = cfg;
    bad.tol = 0.0;
    CHECK_THROWS_AS(fcsa_lem(ok, unit_weights(n), bad), std::invalid_argument);
    bad = cfg;
    bad.maxiter = 0;
    CHECK_THROWS_AS(fcsa_lem(ok, unit_weights(n), bad), std::invalid_argument);
    CHECK_THROWS_AS(fcsa_lem(ok, unit_weights(4), cfg), std::invalid_argument);
}

TEST_CASE("alpha above the bound is clamped with a warning") {
    const int n = 8;
    SolverConfig cfg;
    cfg.alpha = 100.0;
    cfg.maxiter = 2;
    const ReconResult res = fcsa_lem(ppft_forward(blocks(n)), unit_weights(n), cfg);
    CHECK(res.alpha == doctest::Approx(1.0 / std::sqrt(ppft_sigma_max(n))));
    CHECK_FALSE(res.warning.empty());
}
