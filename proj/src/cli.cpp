#include "ppct/cli.hpp"

#include "ppct/fbp.hpp"
#include "ppct/io.hpp"
#include "ppct/metrics.hpp"
#include "ppct/phantoms.hpp"
#include "ppct/pipeline.hpp"
#include "ppct/solver.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>

namespace ppct {
namespace {

enum Exit { kOk = 0, kUsage = 2, kFormat = 3, kNumeric = 4 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// `key = value` lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int number = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++number;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
            throw UsageError(path + ":" + std::to_string(number) + ": expected 'key = value'");
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return entries;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Config entries become trailing flags unless the same flag is already present.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty())
        return args;
    std::vector<std::string> extra;
    for (const auto& [key, value] : read_config(path)) {
        const std::string flag = "--" + key;
        if (given(args, flag) || key == "config")
            continue;
        if (value == "true")
            extra.push_back(flag);
        else if (value != "false") {
            extra.push_back(flag);
            extra.push_back(value);
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

PpctFile load(const std::string& path) {
    try {
        return read_ppct(path);
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(e.what());
    }
}

void add_noise(std::vector<double>& data, std::size_t row, double lambda_T, double sigma_n, std::uint64_t seed) {
    if (lambda_T <= 0.0) {
        if (sigma_n > 0.0)
            throw UsageError("--sigma-n needs --lambda-t");
        return;
    }
    data = counts_to_projections(simulate_counts(data, row, lambda_T, sigma_n, seed)).y;
}

// d = counts^2 / (sigma_n^2 + counts) recovered from log data.
std::vector<double> variance_weights(const std::vector<double>& y, double lambda_T, double sigma_n) {
    std::vector<double> d(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double counts = std::max(1.0, lambda_T * std::exp(-y[i]));
        d[i] = counts * counts / (sigma_n * sigma_n + counts);
    }
    return d;
}

std::vector<double> half_turn(int views) {
    std::vector<double> a(static_cast<std::size_t>(views));
    for (int k = 0; k < views; ++k)
        a[static_cast<std::size_t>(k)] = std::numbers::pi * k / views;
    return a;
}

struct Options {
    int threads = 0;
    std::string config;

    std::string kind = "shepp-logan";
    int n = 256;
    int n_given = 0;
    double radius = 0.6;
    double value = 1.0;
    int slices = 16;
    std::string in;
    std::string out;
    std::string weights_out;
    std::string weights_in;
    std::string ref;

    std::string geometry = "fan";
    int views = 128;
    int offsets = 0;
    int detectors = 0;
    double source_radius = 3.0;
    double detector_distance = 6.0;
    double pitch = 0.5;
    double lambda_T = 0.0;
    double sigma_n = 0.0;
    std::uint64_t seed = 1;

    int oversample = 8;
    double z = 0.0;

    std::string method;
    SolverConfig solver;
    bool no_eaw = false;
    std::string filter = "ram-lak";

    std::vector<int> view_list = {64, 128, 256};
    std::vector<std::string> methods = {"fcsa-lem", "ista", "ls", "fbp"};
    std::string phantom = "shepp-logan";
    bool no_timing = false;

    std::string mode = "image";
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();
    int slice = -1;
};

void run_phantom(const Options& o) {
    if (o.kind == "shepp-logan")
        write_ppct(o.out, to_file(shepp_logan(o.n)));
    else if (o.kind == "disk")
        write_ppct(o.out, to_file(disk(o.n, o.radius, o.value)));
    else if (o.kind == "helical")
        write_ppct(o.out, to_file(helical_test_volume(o.n, o.slices)));
    else
        throw UsageError("unknown phantom kind '" + o.kind + "'");
}

void run_project(const Options& o) {
    const PpctFile f = load(o.in);
    if (o.geometry == "helical") {
        const Volume vol = volume_from(f);
        ConeSinogram cs = project_helical(vol, default_helix_geometry(vol, o.views, o.pitch, o.source_radius,
                                                                      o.detector_distance));
        add_noise(cs.data, cs.view_size(), o.lambda_T, o.sigma_n, o.seed);
        write_ppct(o.out, to_file(cs));
        return;
    }
    const Image img = image_from(f);
    if (o.geometry == "parallel") {
        const auto angles = half_turn(o.views);
        ParallelSinogram ps = radon_parallel(img, angles, o.offsets > 0 ? o.offsets : 2 * img.n);
        add_noise(ps.data, ps.offsets.size(), o.lambda_T, o.sigma_n, o.seed);
        write_ppct(o.out, to_file(ps));
    } else if (o.geometry == "fan") {
        FanGeometry g = default_fan_geometry(img.n, o.views, o.source_radius);
        if (o.detectors > 0)
            g.n_detectors = o.detectors;
        FanSinogram fan = project_fan(img, g);
        add_noise(fan.data, static_cast<std::size_t>(g.n_detectors), o.lambda_T, o.sigma_n, o.seed);
        write_ppct(o.out, to_file(fan));
    } else {
        throw UsageError("unknown geometry '" + o.geometry + "'");
    }
}

PipelineData pipeline_for(const PpctFile& f, const Options& o, int n) {
    PipelineOptions popt;
    popt.n = n;
    popt.n_offsets = o.offsets;
    popt.oversample = o.oversample;
    switch (f.kind) {
    case FileKind::Parallel:
        return parallel_pipeline(parallel_from(f), popt);
    case FileKind::Fan:
        return fan_pipeline(fan_from(f), popt);
    case FileKind::Cone: {
        const SsrbResult s = cb_ssrb(cone_from(f), o.z);
        return fan_pipeline(s.fan, popt, s.epsilon);
    }
    default:
        throw FormatError("expected a parallel, fan or cone sinogram");
    }
}

Weights weights_for(const PipelineData& p, const Options& o, int n) {
    if (o.lambda_T <= 0.0)
        return eaw({}, p.epsilon);
    const auto d_rays = variance_weights(p.parallel.data, o.lambda_T, o.sigma_n);
    const auto d = propagate_weights_to_ppgrid(d_rays, p.parallel.offsets.size(), p.angles, n);
    return eaw(d, p.epsilon);
}

int require_n(const Options& o) {
    if (o.n_given <= 0)
        throw UsageError("--n is required for sinogram input");
    return o.n_given;
}

void run_rebin(const Options& o) {
    const int n = require_n(o);
    const PipelineData p = pipeline_for(load(o.in), o, n);
    write_ppct(o.out, to_file(p.y));
    if (!o.weights_out.empty())
        write_ppct(o.weights_out, to_file(weights_for(p, o, n)));
}

Image fbp_from(const PpctFile& f, const Options& o, int n) {
    const RampFilter filter = parse_filter(o.filter);
    if (f.kind == FileKind::Parallel)
        return fbp_parallel(parallel_from(f), filter, n);
    if (f.kind == FileKind::Fan) {
        const FanSinogram fan = fan_from(f);
        const auto angles = half_turn(static_cast<int>(fan.geometry.betas.size()));
        return fbp_parallel(rebin_fan_to_parallel(fan, angles, o.offsets > 0 ? o.offsets : 2 * n).sinogram, filter,
                            n);
    }
    throw FormatError("fbp needs a parallel or fan sinogram");
}

void run_recon(const Options& o) {
    const PpctFile f = load(o.in);
    Image x;
    if (o.method == "fbp") {
        if (f.kind != FileKind::Parallel && f.kind != FileKind::Fan)
            throw FormatError("fbp needs a parallel or fan sinogram");
        x = fbp_from(f, o, require_n(o));
    } else {
        PPData y;
        Weights c;
        if (f.kind == FileKind::PPData) {
            y = ppdata_from(f);
            c = o.weights_in.empty() || o.no_eaw ? unit_weights(y.n) : weights_from(load(o.weights_in));
        } else {
            if (f.kind != FileKind::Parallel && f.kind != FileKind::Fan && f.kind != FileKind::Cone)
                throw FormatError("expected pseudo-polar data or a sinogram");
            const int n = require_n(o);
            PipelineData p = pipeline_for(f, o, n);
            c = o.no_eaw ? unit_weights(n)
                         : (o.weights_in.empty() ? weights_for(p, o, n) : weights_from(load(o.weights_in)));
            y = std::move(p.y);
        }
        if (c.n != y.n)
            throw FormatError("weights do not match the data size");
        if (o.method == "fcsa-lem" || o.method == "ista") {
            const ReconResult r = o.method == "ista" ? ista_baseline(y, o.solver) : fcsa_lem(y, c, o.solver);
            if (!r.warning.empty())
                std::cerr << "warning: " << r.warning << '\n';
            x = r.image;
        } else if (o.method == "ls") {
            x = ppft_ls_inverse(y, std::min(o.solver.tol, 1e-8), o.solver.maxiter).image;
        } else {
            throw UsageError("unknown method '" + o.method + "'");
        }
    }
    write_ppct(o.out, to_file(x));
}

void run_sweep(const Options& o) {
    SweepOptions s;
    s.n = o.n;
    s.phantom = o.phantom;
    if (s.phantom != "shepp-logan" && s.phantom != "disk")
        throw UsageError("sweep phantom must be shepp-logan or disk");
    s.seed = o.seed;
    s.lambda_T = o.lambda_T;
    s.sigma_n = o.sigma_n;
    s.maxiter = o.solver.maxiter;
    s.tol = o.solver.tol;
    s.lambda1 = o.solver.lambda1;
    s.lambda2 = o.solver.lambda2;
    const auto rows = sweep(o.view_list, o.methods, s);
    for (const auto& r : rows)
        if (!r.failure.empty())
            std::cerr << "sweep: " << r.method << " at " << r.views << " views failed: " << r.failure << '\n';
    if (o.out == "-") {
        write_sweep_csv(std::cout, rows, !o.no_timing);
        return;
    }
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + o.out + "' for writing");
    write_sweep_csv(out, rows, !o.no_timing);
}

Image pick_image(const PpctFile& f, int slice) {
    if (f.kind == FileKind::Image && f.dims.size() == 3) {
        const Volume v = volume_from(f);
        const int k = slice < 0 ? v.count() / 2 : slice;
        if (k >= v.count())
            throw UsageError("--slice out of range");
        return v.slices[static_cast<std::size_t>(k)];
    }
    return image_from(f);
}

void run_report(const Options& o) {
    Image img = pick_image(load(o.in), o.slice);
    double lo = 0.0;
    double hi = 0.0;
    if (o.mode == "image") {
        const auto [a, b] = std::minmax_element(img.pixels.begin(), img.pixels.end());
        lo = *a;
        hi = *b;
    } else if (o.mode == "diff" || o.mode == "error") {
        if (o.ref.empty())
            throw UsageError("--mode " + o.mode + " needs --ref");
        const Image ref = pick_image(load(o.ref), o.slice);
        if (ref.n != img.n)
            throw FormatError("reference size differs from the image");
        double m = 0.0;
        for (std::size_t i = 0; i < img.size(); ++i) {
            img.pixels[i] -= ref.pixels[i];
            if (o.mode == "error")
                img.pixels[i] = std::abs(img.pixels[i]);
            m = std::max(m, std::abs(img.pixels[i]));
        }
        lo = o.mode == "diff" ? -m : 0.0;
        hi = m;
    } else {
        throw UsageError("unknown report mode '" + o.mode + "'");
    }
    if (!std::isnan(o.lo))
        lo = o.lo;
    if (!std::isnan(o.hi))
        hi = o.hi;
    if (!(hi > lo))
        hi = lo + 1.0;
    write_png(o.out, img, lo, hi);
}

void add_solver_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--alpha", o.solver.alpha, "step scale; <= 0 uses 1/sqrt(sigma_max)");
    cmd->add_option("--lambda1", o.solver.lambda1, "wavelet weight; < 0 uses 1e-3 ||A^T(c y)||_inf");
    cmd->add_option("--lambda2", o.solver.lambda2, "TV weight; < 0 uses 1e-3 ||A^T(c y)||_inf");
    cmd->add_option("--tol", o.solver.tol, "relative change stopping threshold")->check(CLI::PositiveNumber);
    cmd->add_option("--maxiter", o.solver.maxiter, "iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--tv-iters", o.solver.tv_inner_iters, "inner split Bregman iterations")
        ->check(CLI::NonNegativeNumber);
}

void add_noise_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--lambda-t", o.lambda_T, "incident photons per ray; 0 means noiseless")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--sigma-n", o.sigma_n, "electronic noise standard deviation (counts)")
        ->check(CLI::NonNegativeNumber);
}

} // namespace

int cli_main(const std::vector<std::string>& raw_args) {
    Options o;
    CLI::App app{"pseudo-polar CT reconstruction"};
    app.name("ppct");
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--threads", o.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--config", o.config, "file of 'key = value' defaults");

    auto* phantom = app.add_subcommand("phantom", "write a phantom image or volume");
    phantom->add_option("--kind", o.kind, "shepp-logan, disk or helical");
    phantom->add_option("--n", o.n, "image side")->check(CLI::PositiveNumber);
    phantom->add_option("--radius", o.radius, "disk radius");
    phantom->add_option("--value", o.value, "disk value");
    phantom->add_option("--slices", o.slices, "helical volume slices");
    phantom->add_option("--out", o.out)->required();

    auto* project = app.add_subcommand("project", "simulate a sinogram");
    project->add_option("--in", o.in)->required();
    project->add_option("--out", o.out)->required();
    project->add_option("--geometry", o.geometry, "parallel, fan or helical");
    project->add_option("--views", o.views, "views (per turn for helical)")->check(CLI::PositiveNumber);
    project->add_option("--offsets", o.offsets, "parallel detector bins (default 2n)");
    project->add_option("--detectors", o.detectors, "fan channels (default 2n+1)");
    project->add_option("--source-radius", o.source_radius);
    project->add_option("--detector-distance", o.detector_distance);
    project->add_option("--pitch", o.pitch);
    project->add_option("--seed", o.seed);
    add_noise_flags(project, o);

    auto* rebin = app.add_subcommand("rebin", "sinogram to pseudo-polar data and weights");
    rebin->add_option("--in", o.in)->required();
    rebin->add_option("--out", o.out)->required();
    rebin->add_option("--weights", o.weights_out, "also write error adaptation weights");
    rebin->add_option("--n", o.n_given, "reconstruction size")->required();
    rebin->add_option("--offsets", o.offsets, "parallel bins after rebinning (default 2n)");
    rebin->add_option("--oversample", o.oversample, "radial zero padding")->check(CLI::PositiveNumber);
    rebin->add_option("--z", o.z, "slice height for cone input");
    add_noise_flags(rebin, o);

    auto* recon = app.add_subcommand("recon", "reconstruct an image");
    recon->add_option("--method", o.method, "fcsa-lem, ista, ls or fbp")->required();
    recon->add_option("--in", o.in)->required();
    recon->add_option("--out", o.out)->required();
    recon->add_option("--weights", o.weights_in, "weights file for pseudo-polar input");
    recon->add_option("--n", o.n_given, "reconstruction size for sinogram input");
    recon->add_option("--offsets", o.offsets);
    recon->add_option("--oversample", o.oversample)->check(CLI::PositiveNumber);
    recon->add_option("--z", o.z);
    recon->add_option("--filter", o.filter, "ram-lak, shepp-logan or hann");
    recon->add_flag("--no-eaw", o.no_eaw, "uniform weights");
    add_solver_flags(recon, o);
    add_noise_flags(recon, o);

    auto* sweep_cmd = app.add_subcommand("sweep", "error table over view counts");
    sweep_cmd->add_option("--views", o.view_list)->delimiter(',');
    sweep_cmd->add_option("--methods", o.methods)->delimiter(',');
    sweep_cmd->add_option("--n", o.n)->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--phantom", o.phantom);
    sweep_cmd->add_option("--seed", o.seed);
    sweep_cmd->add_option("--out", o.out, "CSV path or - for stdout")->required();
    sweep_cmd->add_flag("--no-timing", o.no_timing, "write 0 in the seconds column");
    add_solver_flags(sweep_cmd, o);
    add_noise_flags(sweep_cmd, o);

    auto* report = app.add_subcommand("report", "render an image, difference or error map as PNG");
    report->add_option("--in", o.in)->required();
    report->add_option("--out", o.out)->required();
    report->add_option("--ref", o.ref, "reference image for diff and error modes");
    report->add_option("--mode", o.mode,
                       "image: window [min, max]; diff: x - ref in [-m, m]; error: |x - ref| in [0, m]; "
                       "m = max |x - ref|");
    report->add_option("--min", o.lo, "window low end");
    report->add_option("--max", o.hi, "window high end");
    report->add_option("--slice", o.slice, "volume slice (default middle)");

    try {
        std::vector<std::string> args = apply_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "ppct: " << e.what() << '\n';
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "ppct: " << e.what() << '\n';
        return kUsage;
    }

    omp_set_num_threads(o.threads > 0 ? o.threads : omp_get_num_procs());
    try {
        if (*phantom)
            run_phantom(o);
        else if (*project)
            run_project(o);
        else if (*rebin)
            run_rebin(o);
        else if (*recon)
            run_recon(o);
        else if (*sweep_cmd)
            run_sweep(o);
        else if (*report)
            run_report(o);
        return kOk;
    } catch (const UsageError& e) {
        std::cerr << "ppct: " << e.what() << '\n';
        return kUsage;
    } catch (const FormatError& e) {
        std::cerr << "ppct: input format error: " << e.what() << '\n';
        return kFormat;
    } catch (const DivergenceError& e) {
        std::cerr << "ppct: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "ppct: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "ppct: " << e.what() << '\n';
        return kNumeric;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return cli_main(args);
}

} // namespace ppct
