#include "ppct/metrics.hpp"

#include "ppct/fbp.hpp"
#include "ppct/phantoms.hpp"
#include "ppct/pipeline.hpp"
#include "ppct/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ppct {
namespace {

void require_same(const Image& x, const Image& ref) {
    if (x.n != ref.n || x.pixels.size() != ref.pixels.size())
        throw std::invalid_argument("images differ in size");
}

std::vector<double> noisy_line_integrals(const std::vector<double>& g, std::size_t row, const SweepOptions& opt) {
    if (opt.lambda_T <= 0.0)
        return g;
    const CountsSinogram counts = simulate_counts(g, row, opt.lambda_T, opt.sigma_n, opt.seed);
    return counts_to_projections(counts).y;
}

} // namespace

double normalized_error(const Image& x, const Image& ref) {
    require_same(x, ref);
    const double denom = norm2(ref.pixels);
    if (denom == 0.0)
        throw std::invalid_argument("normalized_error: reference image is zero");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        sum += (x.pixels[i] - ref.pixels[i]) * (x.pixels[i] - ref.pixels[i]);
    return std::sqrt(sum) / denom;
}

double psnr(const Image& x, const Image& ref) {
    require_same(x, ref);
    double peak = 0.0;
    double mse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        peak = std::max(peak, ref.pixels[i]);
        mse += (x.pixels[i] - ref.pixels[i]) * (x.pixels[i] - ref.pixels[i]);
    }
    mse /= static_cast<double>(x.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

std::vector<SweepRow> sweep(const std::vector<int>& view_counts, const std::vector<std::string>& methods,
                            const SweepOptions& opt) {
    const Image ref = opt.phantom == "disk" ? disk(opt.n, 0.6, 1.0) : shepp_logan(opt.n);
    std::vector<SweepRow> rows;
    for (int views : view_counts) {
        PipelineData data;
        std::string setup_failure;
        FanSinogram fan;
        try {
            fan = project_fan(ref, default_fan_geometry(opt.n, views));
            fan.data = noisy_line_integrals(fan.data, fan.geometry.n_detectors, opt);
            PipelineOptions popt;
            popt.n = opt.n;
            data = fan_pipeline(fan, popt);
        } catch (const std::exception& e) {
            setup_failure = e.what();
        }
        for (const auto& method : methods) {
            SweepRow row;
            row.method = method;
            row.views = views;
            row.n = opt.n;
            row.error = std::numeric_limits<double>::quiet_NaN();
            if (!setup_failure.empty()) {
                row.failure = setup_failure;
                rows.push_back(row);
                continue;
            }
            try {
                const auto start = std::chrono::steady_clock::now();
                Image x;
                SolverConfig cfg;
                cfg.maxiter = opt.maxiter;
                cfg.tol = opt.tol;
                cfg.lambda1 = opt.lambda1;
                cfg.lambda2 = opt.lambda2;
                if (method == "fcsa-lem") {
                    x = fcsa_lem(data.y, eaw({}, data.epsilon), cfg).image;
                } else if (method == "ista") {
                    x = ista_baseline(data.y, cfg).image;
                } else if (method == "ls") {
                    x = ppft_ls_inverse(data.y, 1e-8, opt.maxiter).image;
                } else if (method == "fbp") {
                    std::vector<double> angles(views);
                    for (int k = 0; k < views; ++k)
                        angles[k] = std::numbers::pi * k / views;
                    const RebinResult par = rebin_fan_to_parallel(fan, angles, 2 * opt.n);
                    x = fbp_parallel(par.sinogram, RampFilter::RamLak, opt.n);
                } else {
                    throw std::invalid_argument("unknown method '" + method + "'");
                }
                row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                row.error = normalized_error(x, ref);
            } catch (const std::exception& e) {
                row.failure = e.what();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_timing) {
    out << "method,views,n,normalized_error,seconds\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.method << ',' << r.views << ',' << r.n << ',';
        if (std::isnan(r.error))
            out << "nan";
        else {
            std::snprintf(buf, sizeof buf, "%.10g", r.error);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.6f", with_timing ? r.seconds : 0.0);
        out << ',' << buf << '\n';
    }
}

} // namespace ppct
