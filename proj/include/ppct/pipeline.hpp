#pragma once

#include "ppct/rebin.hpp"
#include "ppct/weights.hpp"

#include <span>
#include <vector>

namespace ppct {

struct PipelineOptions {
    int n = 0;          // reconstruction size
    int n_offsets = 0;  // parallel detector bins; <= 0 selects 2n
    int oversample = 8; // radial zero-padding factor
};

/// Measured data on the pseudo-polar grid with everything needed to weight it.
struct PipelineData {
    AngleSet angles;
    ParallelSinogram parallel;   // rebinned rays on the equally-sloped angles
    std::vector<double> ray_epsilon;
    PPData y;
    ErrorMap epsilon;            // angular (per line) plus radial
};

PipelineData fan_pipeline(const FanSinogram& fan, const PipelineOptions& opt, std::span<const double> fan_epsilon = {});
PipelineData parallel_pipeline(const ParallelSinogram& measured, const PipelineOptions& opt);

/// Equiangular full-turn source angles 2 pi k / views.
std::vector<double> full_turn_angles(int views);

/// Fan geometry wide enough for the unit disk, with an odd channel count.
FanGeometry default_fan_geometry(int n, int views, double R = 3.0);

/// Helix whose source heights span exactly the slab of `vol`, with a flat
/// detector wide enough for the unit disk and tall enough for one pitch.
HelixGeometry default_helix_geometry(const Volume& vol, int views_per_turn, double P = 0.5, double R = 3.0,
                                     double D = 6.0);

} // namespace ppct
