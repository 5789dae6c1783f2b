#pragma once

#include "ppct/image.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ppct {

/// ||x - ref|| / ||ref||. Throws for a zero reference or mismatched sizes.
double normalized_error(const Image& x, const Image& ref);

/// 10 log10(max(ref)^2 / MSE).
double psnr(const Image& x, const Image& ref);

struct SweepRow {
    std::string method;
    int views = 0;
    int n = 0;
    double error = 0.0;    // NaN when the run failed
    double seconds = 0.0;
    std::string failure;   // empty on success
};

struct SweepOptions {
    int n = 64;
    std::string phantom = "shepp-logan";  // or "disk"
    std::uint64_t seed = 1;
    double lambda_T = 0.0;                // 0: noiseless line integrals
    double sigma_n = 0.0;
    int maxiter = 200;
    double tol = 1e-4;
    double lambda1 = -1.0;
    double lambda2 = -1.0;
};

/// Every method (fcsa-lem, ista, ls, fbp) at every view count on fan data, in
/// input order. A failing run yields a row with NaN error and the sweep goes on.
std::vector<SweepRow> sweep(const std::vector<int>& view_counts, const std::vector<std::string>& methods,
                            const SweepOptions& opt);

/// Header `method,views,n,normalized_error,seconds`; timing columns are written
/// as 0 when with_timing is false so output is reproducible byte for byte.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_timing = true);

} // namespace ppct
