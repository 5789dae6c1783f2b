#pragma once

#include "ppct/ppfft.hpp"
#include "ppct/weights.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ppct {

struct SolverConfig {
    double alpha = 0.0;    // <= 0: 1 / sqrt(sigma_max)
    double lambda1 = -1.0; // < 0: 1e-3 * ||A^T (c y)||_inf
    double lambda2 = -1.0; // < 0: same default
    double tol = 1e-4;
    int maxiter = 200;
    int tv_inner_iters = 10;
    int wavelet_levels = 4;
    bool record_history = true;
    bool warm_start = false;  // start from a rescaled A^T (c y) instead of 0
};

struct ReconResult {
    Image image;
    int iterations = 0;
    std::vector<double> f1;
    std::vector<double> f2;
    std::vector<double> rel_change;
    double seconds = 0.0;
    double alpha = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::string warning;
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// z = r + alpha^2 A^T (c y - c A r).
Image e_step(const Image& r, const PPData& y, const Weights& c, double alpha);

/// (t_next, r_next) with t_next = (1 + sqrt(1 + 4 t^2)) / 2 and
/// r_next = x + ((t - 1) / t_next) (x - x_prev).
std::pair<double, Image> momentum_step(double t, const Image& x, const Image& x_prev);

/// Returns alpha unchanged when alpha^2 sigma_max <= 1, otherwise 1 / sqrt(sigma_max).
/// A non-positive alpha selects that bound. A clamp is reported through `warning`.
double step_scale_check(double alpha, int n, std::string* warning = nullptr);

/// Composite splitting with latent-EM steps: wavelet and TV proximal branches
/// combined by their objective values, accelerated with momentum.
ReconResult fcsa_lem(const PPData& y, const Weights& c, const SolverConfig& cfg);

/// Unweighted iterative soft thresholding with the same operator and momentum.
ReconResult ista_baseline(const PPData& y, const SolverConfig& cfg);

} // namespace ppct
