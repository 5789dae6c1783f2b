#include "ppct/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ppct {
namespace {

constexpr double kPi = std::numbers::pi;

double bilinear(const Image& img, double x, double y) {
    const int n = img.n;
    const double scale = 0.5 * n;
    const double fc = (x + 1.0) * scale - 0.5;
    const double fr = (y + 1.0) * scale - 0.5;
    const double c0f = std::floor(fc);
    const double r0f = std::floor(fr);
    const int c0 = static_cast<int>(c0f);
    const int r0 = static_cast<int>(r0f);
    const double tc = fc - c0f;
    const double tr = fr - r0f;
    auto px = [&](int r, int c) { return (r < 0 || r >= n || c < 0 || c >= n) ? 0.0 : img(r, c); };
    return (1.0 - tr) * ((1.0 - tc) * px(r0, c0) + tc * px(r0, c0 + 1)) +
           tr * ((1.0 - tc) * px(r0 + 1, c0) + tc * px(r0 + 1, c0 + 1));
}

// Parameter interval where p + t*dir stays inside [-bound, bound]^2.
bool clip_to_box(double px, double py, double dx, double dy, double bound, double& t0, double& t1) {
    t0 = -std::numeric_limits<double>::infinity();
    t1 = std::numeric_limits<double>::infinity();
    auto slab = [&](double p, double d) {
        if (std::abs(d) < 1e-15)
            return std::abs(p) <= bound;
        double a = (-bound - p) / d;
        double b = (bound - p) / d;
        if (a > b)
            std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
        return true;
    };
    if (!slab(px, dx) || !slab(py, dy))
        return false;
    return t1 > t0;
}

double volume_sample(const Volume& vol, double x, double y, double z) {
    const int k_count = vol.count();
    const double fk = z / vol.z_spacing + 0.5 * (k_count - 1);
    const double k0f = std::floor(fk);
    const int k0 = static_cast<int>(k0f);
    const double tk = fk - k0f;
    double v = 0.0;
    if (k0 >= 0 && k0 < k_count && tk < 1.0)
        v += (1.0 - tk) * bilinear(vol.slices[k0], x, y);
    if (k0 + 1 >= 0 && k0 + 1 < k_count && tk > 0.0)
        v += tk * bilinear(vol.slices[k0 + 1], x, y);
    return v;
}

} // namespace

void validate(const FanGeometry& g) {
    if (!(g.R > 1.0))
        throw std::invalid_argument("fan geometry: source radius R must exceed 1");
    if (!(g.gamma_max > 0.0) || !(g.gamma_max < kPi / 2))
        throw std::invalid_argument("fan geometry: gamma_max must lie in (0, pi/2)");
    if (g.n_detectors < 2)
        throw std::invalid_argument("fan geometry: need at least two detector channels");
    if (g.betas.empty())
        throw std::invalid_argument("fan geometry: no source angles");
    if (!std::is_sorted(g.betas.begin(), g.betas.end()))
        throw std::invalid_argument("fan geometry: source angles must be sorted");
}

double HelixGeometry::source_z(double phi) const { return P * phi / (2.0 * kPi); }

double HelixGeometry::z_min() const {
    return phis.empty() ? 0.0 : source_z(*std::min_element(phis.begin(), phis.end()));
}

double HelixGeometry::z_max() const {
    return phis.empty() ? 0.0 : source_z(*std::max_element(phis.begin(), phis.end()));
}

void validate(const HelixGeometry& g) {
    if (!(g.P > 0.0) || !(g.R > 1.0) || !(g.D > 0.0))
        throw std::invalid_argument("helix geometry: need P > 0, R > 1, D > 0");
    if (g.n_cols < 2 || g.n_rows < 1 || !(g.du > 0.0) || !(g.dv > 0.0))
        throw std::invalid_argument("helix geometry: invalid detector grid");
    if (g.phis.empty() || !std::is_sorted(g.phis.begin(), g.phis.end()))
        throw std::invalid_argument("helix geometry: source angles must be non-empty and sorted");
}

std::vector<double> uniform_offsets(int count) {
    if (count < 1)
        throw std::invalid_argument("need at least one detector offset");
    std::vector<double> s(count);
    const double step = 2.0 / count;
    for (int j = 0; j < count; ++j)
        s[j] = -1.0 + (j + 0.5) * step;
    return s;
}

double ray_integral(const Image& img, double l, double phi, double step) {
    const double h = img.spacing();
    const double ds = step > 0.0 ? step : 0.5 * h;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    double t0 = 0.0;
    double t1 = 0.0;
    // The bilinear interpolant vanishes beyond half a pixel outside the grid.
    if (!clip_to_box(l * c, l * s, -s, c, 1.0 + 0.5 * h, t0, t1))
        return 0.0;
    const auto k0 = static_cast<long>(std::ceil(t0 / ds));
    const auto k1 = static_cast<long>(std::floor(t1 / ds));
    double sum = 0.0;
    for (long k = k0; k <= k1; ++k) {
        const double t = k * ds;
        sum += bilinear(img, l * c - t * s, l * s + t * c);
    }
    return sum * ds;
}

ParallelSinogram radon_parallel(const Image& img, std::span<const double> angles, int n_offsets) {
    validate(img);
    if (angles.empty())
        throw std::invalid_argument("radon_parallel: empty angle list");
    if (n_offsets < img.n)
        throw std::invalid_argument("radon_parallel: need at least n detector offsets");
    ParallelSinogram ps;
    ps.angles.assign(angles.begin(), angles.end());
    ps.offsets = uniform_offsets(n_offsets);
    ps.data.assign(ps.angles.size() * ps.offsets.size(), 0.0);
    const auto n_angles = static_cast<long>(ps.angles.size());
#pragma omp parallel for schedule(static)
    for (long a = 0; a < n_angles; ++a)
        for (std::size_t j = 0; j < ps.offsets.size(); ++j)
            ps.at(a, j) = ray_integral(img, ps.offsets[j], ps.angles[a]);
    return ps;
}

FanSinogram project_fan(const Image& img, const FanGeometry& geom) {
    validate(img);
    validate(geom);
    FanSinogram fs;
    fs.geometry = geom;
    fs.data.assign(geom.betas.size() * geom.n_detectors, 0.0);
    const auto n_views = static_cast<long>(geom.betas.size());
#pragma omp parallel for schedule(static)
    for (long b = 0; b < n_views; ++b)
        for (int j = 0; j < geom.n_detectors; ++j) {
            const double gamma = geom.gamma(j);
            fs.at(b, j) = ray_integral(img, geom.R * std::sin(gamma), geom.betas[b] + gamma);
        }
    return fs;
}

ConeSinogram project_helical(const Volume& vol, const HelixGeometry& geom) {
    validate(vol);
    validate(geom);
    const double half_height = 0.5 * (vol.count() - 1) * vol.z_spacing;
    if (geom.z_min() > -half_height + 1e-12 || geom.z_max() < half_height - 1e-12)
        throw std::invalid_argument("project_helical: helix does not cover the volume");

    ConeSinogram cs;
    cs.geometry = geom;
    cs.data.assign(geom.phis.size() * cs.view_size(), 0.0);
    const double h = 2.0 / vol.n();
    const double ds = 0.5 * h;
    const double bound = 1.0 + 0.5 * h;
    const auto n_views = static_cast<long>(geom.phis.size());

#pragma omp parallel for schedule(static)
    for (long i = 0; i < n_views; ++i) {
        const double phi = geom.phis[i];
        const double cp = std::cos(phi);
        const double sp = std::sin(phi);
        const double sx = geom.R * cp;
        const double sy = geom.R * sp;
        const double sz = geom.source_z(phi);
        for (int r = 0; r < geom.n_rows; ++r)
            for (int c = 0; c < geom.n_cols; ++c) {
                const double u = geom.u(c);
                const double v = geom.v(r);
                double dx = -geom.D * cp + u * sp;
                double dy = -geom.D * sp - u * cp;
                double dz = v;
                const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
                dx /= len;
                dy /= len;
                dz /= len;
                double t0 = 0.0;
                double t1 = 0.0;
                double sum = 0.0;
                if (clip_to_box(sx, sy, dx, dy, bound, t0, t1)) {
                    const auto k0 = static_cast<long>(std::ceil(t0 / ds));
                    const auto k1 = static_cast<long>(std::floor(t1 / ds));
                    for (long k = k0; k <= k1; ++k) {
                        const double t = k * ds;
                        sum += volume_sample(vol, sx + t * dx, sy + t * dy, sz + t * dz);
                    }
                }
                cs.data[i * cs.view_size() + static_cast<std::size_t>(r) * geom.n_cols + c] = sum * ds;
            }
    }
    return cs;
}

CountStream::CountStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double CountStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double CountStream::normal() {
    // Box-Muller; one variate per pair keeps the stream layout simple.
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double CountStream::poisson(double mean) {
    if (mean <= 0.0)
        return 0.0;
    if (mean > 1e3)
        return mean + std::sqrt(mean) * normal();
    // Inversion by sequential search; long double keeps exp(-mean) representable.
    const long double u = uniform();
    long double p = std::exp(-static_cast<long double>(mean));
    long double cdf = p;
    long k = 0;
    const long limit = static_cast<long>(mean + 40.0 * std::sqrt(mean) + 40.0);
    while (u > cdf && k < limit) {
        ++k;
        p *= mean / static_cast<long double>(k);
        cdf += p;
    }
    return static_cast<double>(k);
}

CountsSinogram simulate_counts(std::span<const double> line_integrals, std::size_t row_length, double lambda_T,
                               double sigma_n, std::uint64_t seed) {
    if (!(lambda_T > 0.0))
        throw std::invalid_argument("simulate_counts: lambda_T must be positive");
    if (row_length == 0 || line_integrals.size() % row_length != 0)
        throw std::invalid_argument("simulate_counts: data size is not a multiple of the row length");
    CountsSinogram out;
    out.rows = line_integrals.size() / row_length;
    out.cols = row_length;
    out.lambda_T = lambda_T;
    out.sigma_n = sigma_n;
    out.counts.assign(line_integrals.size(), 0.0);
    const auto rows = static_cast<long>(out.rows);
#pragma omp parallel for schedule(static)
    for (long r = 0; r < rows; ++r) {
        CountStream stream(seed, static_cast<std::uint64_t>(r));
        for (std::size_t j = 0; j < row_length; ++j) {
            const std::size_t i = static_cast<std::size_t>(r) * row_length + j;
            const double mean = lambda_T * std::exp(-line_integrals[i]);
            double value = stream.poisson(mean);
            if (sigma_n > 0.0)
                value += sigma_n * stream.normal();
            out.counts[i] = std::max(1.0, value);
        }
    }
    return out;
}

Projections counts_to_projections(const CountsSinogram& c) {
    Projections p;
    p.y.resize(c.counts.size());
    p.d.resize(c.counts.size());
    const double var_n = c.sigma_n * c.sigma_n;
    for (std::size_t i = 0; i < c.counts.size(); ++i) {
        const double lambda = c.counts[i];
        if (!(lambda > 0.0))
            throw std::logic_error("counts_to_projections: non-positive count after flooring");
        p.y[i] = std::log(c.lambda_T / lambda);
        p.d[i] = lambda * lambda / (var_n + lambda);
    }
    return p;
}

} // namespace ppct
