#pragma once

#include "ppct/image.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ppct {

/// g(l, phi) on a rectilinear (angle, offset) grid; data is angles.size() x offsets.size().
struct ParallelSinogram {
    std::vector<double> angles;
    std::vector<double> offsets;
    std::vector<double> data;

    double& at(std::size_t a, std::size_t j) { return data[a * offsets.size() + j]; }
    double at(std::size_t a, std::size_t j) const { return data[a * offsets.size() + j]; }
};

/// Third-generation fan geometry with an equiangular detector.
///
/// The source for view beta sits at R (-sin beta, cos beta); channel gamma is the
/// ray whose parallel coordinates are l = R sin gamma, phi = beta + gamma.
struct FanGeometry {
    double R = 3.0;
    double gamma_max = 0.35;
    int n_detectors = 0;
    std::vector<double> betas;

    double gamma_step() const { return 2.0 * gamma_max / (n_detectors - 1); }
    double gamma(int j) const { return -gamma_max + j * gamma_step(); }
};

void validate(const FanGeometry& g);

struct FanSinogram {
    FanGeometry geometry;
    std::vector<double> data;  // betas.size() x n_detectors

    double& at(std::size_t b, std::size_t j) { return data[b * geometry.n_detectors + j]; }
    double at(std::size_t b, std::size_t j) const { return data[b * geometry.n_detectors + j]; }
};

/// Helical cone-beam geometry with a flat detector.
///
/// Source at (R cos phi, R sin phi, P phi / 2 pi). The detector plane is normal to
/// the central ray at distance D from the source; column c sits at
/// u = (c - (cols-1)/2) du along (sin phi, -cos phi, 0) and row r at
/// v = (r - (rows-1)/2) dv along z.
struct HelixGeometry {
    double R = 3.0;
    double D = 6.0;
    double P = 0.5;
    int n_cols = 0;
    int n_rows = 0;
    double du = 0.0;
    double dv = 0.0;
    std::vector<double> phis;

    double source_z(double phi) const;
    double u(int col) const { return (col - 0.5 * (n_cols - 1)) * du; }
    double v(int row) const { return (row - 0.5 * (n_rows - 1)) * dv; }
    double z_min() const;
    double z_max() const;
};

void validate(const HelixGeometry& g);

struct ConeSinogram {
    HelixGeometry geometry;
    std::vector<double> data;  // phis.size() x n_rows x n_cols

    std::size_t view_size() const { return static_cast<std::size_t>(geometry.n_rows) * geometry.n_cols; }
    double at(std::size_t view, int row, int col) const {
        return data[view * view_size() + static_cast<std::size_t>(row) * geometry.n_cols + col];
    }
};

struct CountsSinogram {
    std::vector<double> counts;
    std::size_t rows = 0;  // one independent RNG stream per row (view)
    std::size_t cols = 0;
    double lambda_T = 1.0;
    double sigma_n = 0.0;
};

/// Uniform detector offsets spanning [-1, 1]: s_j = -1 + (j + 0.5) * 2 / count.
std::vector<double> uniform_offsets(int count);

/// Line integral of the bilinear interpolant of img along {x cos phi + y sin phi = l}.
/// step <= 0 selects half a pixel.
double ray_integral(const Image& img, double l, double phi, double step = 0.0);

ParallelSinogram radon_parallel(const Image& img, std::span<const double> angles, int n_offsets);
FanSinogram project_fan(const Image& img, const FanGeometry& geom);
ConeSinogram project_helical(const Volume& vol, const HelixGeometry& geom);

/// Photon counts with mean lambda_T exp(-g): Poisson plus Gaussian electronic noise,
/// floored at one count. Row r draws from its own stream seeded by (seed, r).
CountsSinogram simulate_counts(std::span<const double> line_integrals, std::size_t row_length, double lambda_T,
                               double sigma_n, std::uint64_t seed);

struct Projections {
    std::vector<double> y;  // ln(lambda_T / counts)
    std::vector<double> d;  // counts^2 / (sigma_n^2 + counts)
};

Projections counts_to_projections(const CountsSinogram& c);

/// Draws used by simulate_counts, exposed for the distribution tests.
class CountStream {
public:
    CountStream(std::uint64_t seed, std::uint64_t stream);
    double uniform();
    double normal();
    double poisson(double mean);

private:
    std::mt19937_64 engine_;
};

} // namespace ppct
