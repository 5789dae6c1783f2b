#include "ppct/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ppct {
namespace {

PipelineData finish(PipelineData p, const PipelineOptions& opt) {
    const PPResult pp = parallel_to_ppdata(p.parallel, opt.oversample);
    p.y = pp.data;
    const auto lines = line_epsilon(p.parallel, p.ray_epsilon);
    p.epsilon = combine(broadcast_line_error(lines, opt.n), pp.radial);
    return p;
}

int offsets_for(const PipelineOptions& opt) {
    if (opt.n < 2 || opt.n % 2 != 0)
        throw std::invalid_argument("pipeline: reconstruction size must be even");
    return opt.n_offsets > 0 ? opt.n_offsets : 2 * opt.n;
}

} // namespace

PipelineData fan_pipeline(const FanSinogram& fan, const PipelineOptions& opt, std::span<const double> fan_epsilon) {
    const int n_off = offsets_for(opt);
    PipelineData p;
    p.angles = equally_sloped_angles(opt.n);
    RebinResult r = rebin_fan_to_parallel(fan, p.angles.angles, n_off, fan_epsilon);
    p.parallel = std::move(r.sinogram);
    p.ray_epsilon = std::move(r.epsilon);
    return finish(std::move(p), opt);
}

PipelineData parallel_pipeline(const ParallelSinogram& measured, const PipelineOptions& opt) {
    offsets_for(opt);
    PipelineData p;
    p.angles = equally_sloped_angles(opt.n);
    RebinResult r = resample_parallel(measured, p.angles.angles);
    p.parallel = std::move(r.sinogram);
    p.ray_epsilon = std::move(r.epsilon);
    return finish(std::move(p), opt);
}

std::vector<double> full_turn_angles(int views) {
    if (views < 1)
        throw std::invalid_argument("need at least one view");
    std::vector<double> a(views);
    for (int k = 0; k < views; ++k)
        a[k] = 2.0 * std::numbers::pi * k / views;
    return a;
}

FanGeometry default_fan_geometry(int n, int views, double R) {
    FanGeometry g;
    g.R = R;
    // Slightly wider than the unit disk so every parallel offset in [-1, 1] is seen.
    g.gamma_max = std::asin(std::min(1.0, 1.02 / R));
    g.n_detectors = 2 * n + 1;
    g.betas = full_turn_angles(views);
    return g;
}

HelixGeometry default_helix_geometry(const Volume& vol, int views_per_turn, double P, double R, double D) {
    validate(vol);
    if (views_per_turn < 2 || !(P > 0.0))
        throw std::invalid_argument("helix: need >= 2 views per turn and P > 0");
    const int n = vol.n();
    HelixGeometry g;
    g.R = R;
    g.D = D;
    g.P = P;
    const double u_max = D * std::tan(std::asin(std::min(1.0, 1.02 / R)));
    g.n_cols = 4 * n + 1;
    g.du = 2.0 * u_max / (g.n_cols - 1);
    // Rows reach one pitch above and below the source at the widest channel.
    const double v_max = (u_max * u_max + D * D) * P / (R * D);
    g.dv = vol.z_spacing * D / R;
    g.n_rows = 2 * static_cast<int>(std::ceil(v_max / g.dv)) + 1;
    const double half = 0.5 * (vol.count() - 1) * vol.z_spacing;
    const auto k0 = static_cast<long>(std::floor(-half * views_per_turn / P + 1e-9));
    const auto k1 = static_cast<long>(std::ceil(half * views_per_turn / P - 1e-9));
    for (long k = k0; k <= k1; ++k)
        g.phis.push_back(2.0 * std::numbers::pi * static_cast<double>(k) / views_per_turn);
    return g;
}

} // namespace ppct
