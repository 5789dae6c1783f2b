#pragma once

#include "ppct/rebin.hpp"

#include <span>
#include <vector>

namespace ppct {

/// Error Adaptation Weights c, one per pseudo-polar sample, in [0, 1].
struct Weights {
    int n = 0;
    std::vector<double> c;
};

/// c_i = sqrt(d_i) / (1 + eps_i) scaled to max 1, or 1 / (1 + eps_i) when d is empty.
Weights eaw(std::span<const double> d, const ErrorMap& eps);

/// Uniform weights (no error adaptation).
Weights unit_weights(int n);

/// Each pseudo-polar line takes the mean d of the rays of its angular profile.
/// d_per_ray holds one row of rays_per_angle values per angle of the set.
std::vector<double> propagate_weights_to_ppgrid(std::span<const double> d_per_ray, std::size_t rays_per_angle,
                                                const AngleSet& angles, int n);

} // namespace ppct
