#include "ppct/rebin.hpp"

#include "ppct/fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ppct {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Start of the half-turn holding the equally-sloped angles.
constexpr double kFoldStart = -0.25 * std::numbers::pi;

double positive_mod(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0.0)
        r += period;
    return r;
}

double sinc(double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x; }

// ---- source-angle grid of a fan sinogram -------------------------------------

struct BetaGrid {
    std::vector<double> rel;  // betas - betas[0]
    double start = 0.0;
    double span = 0.0;
    double spacing = 0.0;  // uniform spacing when periodic
    bool periodic = false;
};

BetaGrid make_beta_grid(const FanGeometry& g) {
    BetaGrid grid;
    grid.start = g.betas.front();
    for (double b : g.betas)
        grid.rel.push_back(b - grid.start);
    grid.span = grid.rel.back();
    const std::size_t count = grid.rel.size();
    if (count >= 2) {
        const double step = grid.span / static_cast<double>(count - 1);
        bool uniform = true;
        for (std::size_t i = 1; i < count; ++i)
            uniform = uniform && std::abs(grid.rel[i] - grid.rel[i - 1] - step) <= 1e-9 * (1.0 + step);
        if (uniform && std::abs(grid.span + step - kTwoPi) <= 1e-6) {
            grid.periodic = true;
            grid.spacing = step;
        }
    }
    return grid;
}

struct Bracket {
    std::size_t i0 = 0;
    std::size_t i1 = 0;
    double t = 0.0;  // fraction from i0 to i1
    bool valid = false;
};

Bracket locate_beta(const BetaGrid& grid, double beta) {
    Bracket b;
    double rel = positive_mod(beta - grid.start, kTwoPi);
    if (!grid.periodic) {
        if (rel > grid.span + 1e-12) {
            if (rel > kTwoPi - 1e-12)
                rel = 0.0;
            else
                return b;
        }
        rel = std::min(rel, grid.span);
    }
    const std::size_t count = grid.rel.size();
    auto it = std::upper_bound(grid.rel.begin(), grid.rel.end(), rel);
    std::size_t i0 = static_cast<std::size_t>(it - grid.rel.begin()) - 1;
    if (i0 + 1 < count) {
        const double width = grid.rel[i0 + 1] - grid.rel[i0];
        b.i0 = i0;
        b.i1 = i0 + 1;
        b.t = width > 0.0 ? (rel - grid.rel[i0]) / width : 0.0;
    } else if (grid.periodic) {
        b.i0 = i0;
        b.i1 = 0;
        b.t = (rel - grid.rel[i0]) / grid.spacing;
    } else {
        b.i0 = b.i1 = i0;
        b.t = 0.0;
    }
    b.valid = true;
    return b;
}

struct FanSample {
    double value = 0.0;
    double epsilon = kEpsilonCap;
    double beta_distance = 1.0;  // normalized, 0 at a view, 1 midway
    bool valid = false;
};

FanSample sample_fan(const FanSinogram& fan, const BetaGrid& grid, std::span<const double> fan_eps, double gamma,
                     double beta) {
    FanSample s;
    const FanGeometry& g = fan.geometry;
    const double fg = (gamma + g.gamma_max) / g.gamma_step();
    if (fg < -1e-9 || fg > g.n_detectors - 1 + 1e-9)
        return s;
    const Bracket b = locate_beta(grid, beta);
    if (!b.valid)
        return s;
    const int j0 = std::clamp(static_cast<int>(std::floor(fg)), 0, g.n_detectors - 2);
    const double tg = std::clamp(fg - j0, 0.0, 1.0);
    auto mix = [&](auto&& at) {
        return (1.0 - b.t) * ((1.0 - tg) * at(b.i0, j0) + tg * at(b.i0, j0 + 1)) +
               b.t * ((1.0 - tg) * at(b.i1, j0) + tg * at(b.i1, j0 + 1));
    };
    s.value = mix([&](std::size_t bi, int j) { return fan.at(bi, j); });
    const double db = b.i0 == b.i1 ? 0.0 : 2.0 * std::min(b.t, 1.0 - b.t);
    const double dg = 2.0 * std::min(tg, 1.0 - tg);
    s.beta_distance = db;
    const double d = std::sqrt(0.5 * (db * db + dg * dg));
    s.epsilon = epsilon_from_distance(d, 1.0);
    if (!fan_eps.empty()) {
        const double extra = mix([&](std::size_t bi, int j) { return fan_eps[bi * g.n_detectors + j]; });
        s.epsilon = std::min(kEpsilonCap, s.epsilon + extra);
    }
    s.valid = true;
    return s;
}

// ---- measured parallel angles folded into one half-turn ------------------------

struct FoldedAngle {
    double angle = 0.0;
    std::vector<std::pair<std::size_t, bool>> members;  // (source row, offset flip)
};

std::vector<FoldedAngle> fold_angles(std::span<const double> angles) {
    std::vector<std::pair<double, std::pair<std::size_t, bool>>> raw;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double k = std::floor((angles[i] - kFoldStart) / kPi);
        const double folded = angles[i] - k * kPi;
        const bool flip = static_cast<long long>(k) % 2 != 0;
        raw.push_back({folded, {i, flip}});
    }
    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<FoldedAngle> out;
    for (const auto& [a, member] : raw) {
        if (!out.empty() && a - out.back().angle <= 1e-12)
            out.back().members.push_back(member);
        else
            out.push_back({a, {member}});
    }
    return out;
}

struct AngleBracket {
    const FoldedAngle* lo = nullptr;
    const FoldedAngle* hi = nullptr;
    bool lo_wraps = false;  // lo lies one half-turn below its stored angle
    bool hi_wraps = false;  // hi lies one half-turn above its stored angle
    double t = 0.0;
    double delta = 0.0;
    double half = 0.0;
};

AngleBracket bracket_angle(const std::vector<FoldedAngle>& folded, double phi) {
    const double k = std::floor((phi - kFoldStart) / kPi);
    const double a = phi - k * kPi;
    AngleBracket br;
    auto it = std::upper_bound(folded.begin(), folded.end(), a,
                               [](double v, const FoldedAngle& f) { return v < f.angle; });
    double lo_angle = 0.0;
    double hi_angle = 0.0;
    if (it == folded.begin()) {
        br.lo = &folded.back();
        br.lo_wraps = true;
        lo_angle = folded.back().angle - kPi;
    } else {
        br.lo = &*(it - 1);
        lo_angle = br.lo->angle;
    }
    if (it == folded.end()) {
        br.hi = &folded.front();
        br.hi_wraps = true;
        hi_angle = folded.front().angle + kPi;
    } else {
        br.hi = &*it;
        hi_angle = br.hi->angle;
    }
    const double width = hi_angle - lo_angle;
    br.t = width > 0.0 ? (a - lo_angle) / width : 0.0;
    br.delta = std::min(a - lo_angle, hi_angle - a);
    br.half = 0.5 * width;
    return br;
}

void require_symmetric_offsets(const std::vector<double>& s) {
    const std::size_t count = s.size();
    if (count < 2)
        throw std::invalid_argument("parallel data needs at least two offsets");
    const double step = s[1] - s[0];
    for (std::size_t j = 0; j < count; ++j) {
        if (std::abs(s[j] + s[count - 1 - j]) > 1e-9)
            throw std::invalid_argument("parallel offsets must be symmetric about 0");
        if (j > 0 && std::abs(s[j] - s[j - 1] - step) > 1e-9)
            throw std::invalid_argument("parallel offsets must be uniform");
    }
}

} // namespace

AngleSet equally_sloped_angles(int n) {
    if (n < 2 || n % 2 != 0)
        throw std::invalid_argument("equally_sloped_angles: n must be even, got " + std::to_string(n));
    AngleSet set;
    set.n = n;
    for (int block = 0; block < 2; ++block)
        for (int m = -n / 2; m < n / 2; ++m)
            set.angles.push_back(pp_line_angle(n, block, m));
    return set;
}

double epsilon_from_distance(double delta, double half_spacing) {
    if (delta <= 0.0)
        return 0.0;
    if (delta >= half_spacing)
        return kEpsilonCap;
    return std::min(kEpsilonCap, delta / (half_spacing - delta));
}

ErrorMap broadcast_line_error(std::span<const double> line_epsilon, int n) {
    if (line_epsilon.size() != 2 * static_cast<std::size_t>(n))
        throw std::invalid_argument("broadcast_line_error: need one value per line");
    ErrorMap map;
    map.n = n;
    map.epsilon.resize(4 * static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < line_epsilon.size(); ++i) {
        const int block = i < static_cast<std::size_t>(n) ? 0 : 1;
        const int m = static_cast<int>(block == 0 ? i : i - n) - n / 2;
        for (int l = -n; l < n; ++l)
            map.epsilon[(static_cast<std::size_t>(block) * 2 * n + (l + n)) * n + (m + n / 2)] = line_epsilon[i];
    }
    return map;
}

ErrorMap combine(const ErrorMap& a, const ErrorMap& b) {
    if (a.n != b.n || a.epsilon.size() != b.epsilon.size())
        throw std::invalid_argument("combine: error maps differ in size");
    ErrorMap out = a;
    for (std::size_t i = 0; i < out.epsilon.size(); ++i)
        out.epsilon[i] = std::min(kEpsilonCap, a.epsilon[i] + b.epsilon[i]);
    return out;
}

RebinResult rebin_fan_to_parallel(const FanSinogram& fan, std::span<const double> target_angles, int n_offsets,
                                  std::span<const double> fan_epsilon) {
    const FanGeometry& g = fan.geometry;
    validate(g);
    if (fan.data.size() != g.betas.size() * g.n_detectors)
        throw std::invalid_argument("rebin: fan data size does not match its geometry");
    if (!fan_epsilon.empty() && fan_epsilon.size() != fan.data.size())
        throw std::invalid_argument("rebin: fan error size does not match the data");
    if (target_angles.empty())
        throw std::invalid_argument("rebin: no target angles");
    const BetaGrid grid = make_beta_grid(g);
    if (!grid.periodic && grid.span < kPi + 2.0 * g.gamma_max - 1e-9)
        throw std::invalid_argument("rebin: fan data must cover at least pi plus the full fan angle");

    RebinResult out;
    out.sinogram.angles.assign(target_angles.begin(), target_angles.end());
    out.sinogram.offsets = uniform_offsets(n_offsets);
    const std::size_t n_off = out.sinogram.offsets.size();
    out.sinogram.data.assign(target_angles.size() * n_off, 0.0);
    out.epsilon.assign(out.sinogram.data.size(), kEpsilonCap);
    const auto n_targets = static_cast<long>(target_angles.size());

#pragma omp parallel for schedule(static)
    for (long a = 0; a < n_targets; ++a) {
        const double phi = target_angles[a];
        for (std::size_t j = 0; j < n_off; ++j) {
            const double s = out.sinogram.offsets[j];
            if (std::abs(s) >= g.R)
                continue;
            const double gamma = std::asin(s / g.R);
            const FanSample direct = sample_fan(fan, grid, fan_epsilon, gamma, phi - gamma);
            const FanSample conj = sample_fan(fan, grid, fan_epsilon, -gamma, phi + kPi + gamma);
            const FanSample* pick = nullptr;
            if (direct.valid && conj.valid)
                pick = conj.beta_distance < direct.beta_distance ? &conj : &direct;
            else if (direct.valid)
                pick = &direct;
            else if (conj.valid)
                pick = &conj;
            if (!pick)
                continue;
            out.sinogram.at(a, j) = pick->value;
            out.epsilon[a * n_off + j] = pick->epsilon;
        }
    }
    return out;
}

RebinResult resample_parallel(const ParallelSinogram& measured, std::span<const double> target_angles) {
    if (measured.angles.empty())
        throw std::invalid_argument("resample: no measured angles");
    if (measured.data.size() != measured.angles.size() * measured.offsets.size())
        throw std::invalid_argument("resample: data size does not match angles x offsets");
    require_symmetric_offsets(measured.offsets);
    const auto folded = fold_angles(measured.angles);
    const std::size_t n_off = measured.offsets.size();

    // Mean profile of a folded angle, reversed when it sits one half-turn away.
    auto profile = [&](const FoldedAngle& f, bool extra_flip, std::size_t j) {
        double sum = 0.0;
        for (const auto& [row, flip] : f.members) {
            const bool reverse = flip != extra_flip;
            sum += measured.at(row, reverse ? n_off - 1 - j : j);
        }
        return sum / static_cast<double>(f.members.size());
    };

    RebinResult out;
    out.sinogram.angles.assign(target_angles.begin(), target_angles.end());
    out.sinogram.offsets = measured.offsets;
    out.sinogram.data.assign(target_angles.size() * n_off, 0.0);
    out.epsilon.assign(out.sinogram.data.size(), 0.0);
    for (std::size_t a = 0; a < target_angles.size(); ++a) {
        const double phi = target_angles[a];
        const bool target_flip = static_cast<long long>(std::floor((phi - kFoldStart) / kPi)) % 2 != 0;
        const AngleBracket br = bracket_angle(folded, phi);
        const double eps = epsilon_from_distance(br.delta, br.half);
        for (std::size_t j = 0; j < n_off; ++j) {
            const double lo = profile(*br.lo, br.lo_wraps != target_flip, j);
            const double hi = profile(*br.hi, br.hi_wraps != target_flip, j);
            out.sinogram.at(a, j) = (1.0 - br.t) * lo + br.t * hi;
            out.epsilon[a * n_off + j] = eps;
        }
    }
    return out;
}

std::vector<double> line_epsilon(const ParallelSinogram& ps, std::span<const double> ray_epsilon) {
    if (ray_epsilon.size() != ps.data.size())
        throw std::invalid_argument("line_epsilon: error size does not match the sinogram");
    const std::size_t n_off = ps.offsets.size();
    std::vector<double> out(ps.angles.size());
    for (std::size_t a = 0; a < ps.angles.size(); ++a) {
        double weighted = 0.0;
        double total = 0.0;
        double plain = 0.0;
        for (std::size_t j = 0; j < n_off; ++j) {
            const double c = 1.0 / (1.0 + ray_epsilon[a * n_off + j]);
            const double w = std::abs(ps.at(a, j));
            weighted += w * c;
            total += w;
            plain += c;
        }
        const double c_line = total > 0.0 ? weighted / total : plain / static_cast<double>(n_off);
        out[a] = c_line > 0.0 ? std::min(kEpsilonCap, std::max(0.0, 1.0 / c_line - 1.0)) : kEpsilonCap;
    }
    return out;
}

ErrorMap interpolation_error(std::span<const double> measured_angles, const AngleSet& target, int n) {
    if (measured_angles.empty())
        throw std::invalid_argument("interpolation_error: no measured angles");
    if (target.angles.size() != 2 * static_cast<std::size_t>(n))
        throw std::invalid_argument("interpolation_error: target is not the angle set for this n");
    const auto folded = fold_angles(measured_angles);
    std::vector<double> line(target.angles.size());
    for (std::size_t i = 0; i < line.size(); ++i) {
        const AngleBracket br = bracket_angle(folded, target.angles[i]);
        line[i] = epsilon_from_distance(br.delta, br.half);
    }
    return broadcast_line_error(line, n);
}

double ssrb_weight(double phi_ss, double gamma, double gamma_T) {
    if (phi_ss < 0.0 || phi_ss > kPi + 2.0 * gamma_T)
        return 0.0;
    const double rise = 2.0 * gamma_T + 2.0 * gamma;
    if (phi_ss < rise)
        return std::pow(std::sin(kPi * phi_ss / (2.0 * rise)), 2);
    if (phi_ss <= kPi + 2.0 * gamma)
        return 1.0;
    const double fall = 2.0 * gamma_T - 2.0 * gamma;
    if (fall <= 0.0)
        return 0.0;
    return std::pow(std::sin(kPi * (kPi + 2.0 * gamma_T - phi_ss) / (2.0 * fall)), 2);
}

SsrbResult cb_ssrb(const ConeSinogram& cone, double z) {
    const HelixGeometry& g = cone.geometry;
    validate(g);
    if (cone.data.size() != g.phis.size() * cone.view_size())
        throw std::invalid_argument("cb_ssrb: cone data size does not match its geometry");
    if (g.phis.size() < 2)
        throw std::invalid_argument("cb_ssrb: need at least two source positions");
    if (z < g.z_min() - 1e-12 || z > g.z_max() + 1e-12)
        throw std::invalid_argument("cb_ssrb: slice z lies outside the helix coverage");
    const double step = g.phis[1] - g.phis[0];
    for (std::size_t i = 1; i < g.phis.size(); ++i)
        if (std::abs(g.phis[i] - g.phis[i - 1] - step) > 1e-9)
            throw std::invalid_argument("cb_ssrb: source angles must be equiangular");
    const double per_turn = kTwoPi / step;
    const auto views = static_cast<std::size_t>(std::llround(per_turn));
    if (std::abs(per_turn - static_cast<double>(views)) > 1e-6 || views < 2)
        throw std::invalid_argument("cb_ssrb: need a whole number of views per turn");
    if (g.phis.size() < views)
        throw std::invalid_argument("cb_ssrb: helix shorter than one turn");

    const double u_max = g.u(g.n_cols - 1);
    const double gamma_T = std::atan(u_max / g.D);
    const double d = 0.5 * g.P * (0.5 * kPi + gamma_T) / kTwoPi;

    SsrbResult out;
    FanGeometry& fg = out.fan.geometry;
    fg.R = g.R;
    fg.gamma_max = gamma_T;
    fg.n_detectors = g.n_cols;
    for (std::size_t j = 0; j < views; ++j)
        fg.betas.push_back(g.phis[j] - 0.5 * kPi);
    out.fan.data.assign(views * fg.n_detectors, 0.0);
    out.epsilon.assign(out.fan.data.size(), kEpsilonCap);

    // Bilinear read of one cone view at fractional (row, col); false outside the rows.
    auto read = [&](std::size_t view, double fr, double fc, double& value, double& row_dist) {
        if (fr < -1e-9 || fr > g.n_rows - 1 + 1e-9)
            return false;
        fr = std::clamp(fr, 0.0, static_cast<double>(g.n_rows - 1));
        fc = std::clamp(fc, 0.0, static_cast<double>(g.n_cols - 1));
        const int r0 = std::min(static_cast<int>(std::floor(fr)), std::max(g.n_rows - 2, 0));
        const int c0 = std::min(static_cast<int>(std::floor(fc)), g.n_cols - 2);
        const double tr = g.n_rows > 1 ? fr - r0 : 0.0;
        const double tc = fc - c0;
        const int r1 = g.n_rows > 1 ? r0 + 1 : r0;
        value = (1.0 - tr) * ((1.0 - tc) * cone.at(view, r0, c0) + tc * cone.at(view, r0, c0 + 1)) +
                tr * ((1.0 - tc) * cone.at(view, r1, c0) + tc * cone.at(view, r1, c0 + 1));
        row_dist = std::min(tr, 1.0 - tr);
        return true;
    };

    const auto n_views = static_cast<long>(views);
#pragma omp parallel for schedule(static)
    for (long j = 0; j < n_views; ++j) {
        for (int ch = 0; ch < fg.n_detectors; ++ch) {
            const double gamma = fg.gamma(ch);
            const double u = g.D * std::tan(gamma);
            const double fc = u / g.du + 0.5 * (g.n_cols - 1);
            const double base = u * u + g.D * g.D;
            double weighted = 0.0;
            double weight_sum = 0.0;
            double err = 0.0;
            double nearest_value = 0.0;
            double nearest_err = kEpsilonCap;
            double nearest_dz = std::numeric_limits<double>::infinity();
            for (std::size_t i = static_cast<std::size_t>(j); i < g.phis.size(); i += views) {
                const double dz = z - g.source_z(g.phis[i]);
                const double v = base * dz / (g.R * g.D);
                const double fr = v / g.dv + 0.5 * (g.n_rows - 1);
                double value = 0.0;
                double row_dist = 0.0;
                if (!read(i, fr, fc, value, row_dist))
                    continue;
                value *= std::sqrt(base) / std::sqrt(base + v * v);
                const double e = std::abs(dz) / d + row_dist;
                const double w = ssrb_weight((0.5 * kPi + gamma_T) * (1.0 - dz / d), gamma, gamma_T);
                weighted += w * value;
                weight_sum += w;
                err += w * e;
                if (std::abs(dz) < nearest_dz) {
                    nearest_dz = std::abs(dz);
                    nearest_value = value;
                    nearest_err = e;
                }
            }
            const std::size_t k = static_cast<std::size_t>(j) * fg.n_detectors + ch;
            if (weight_sum > 0.0) {
                out.fan.data[k] = weighted / weight_sum;
                out.epsilon[k] = err / weight_sum;
            } else if (std::isfinite(nearest_dz)) {
                out.fan.data[k] = nearest_value;
                out.epsilon[k] = nearest_err;
            }
        }
    }
    return out;
}

PPResult parallel_to_ppdata(const ParallelSinogram& ps, int oversample) {
    if (oversample < 1)
        throw std::invalid_argument("parallel_to_ppdata: oversampling factor must be >= 1");
    const std::size_t n_lines = ps.angles.size();
    if (n_lines < 4 || n_lines % 4 != 0)
        throw std::invalid_argument("parallel_to_ppdata: angle count is not 2N for an even N");
    const int n = static_cast<int>(n_lines / 2);
    const AngleSet set = equally_sloped_angles(n);
    for (std::size_t i = 0; i < n_lines; ++i)
        if (std::abs(ps.angles[i] - set.angles[i]) > 1e-9)
            throw std::invalid_argument("parallel_to_ppdata: angles are not the equally-sloped set");
    if (ps.data.size() != n_lines * ps.offsets.size())
        throw std::invalid_argument("parallel_to_ppdata: data size does not match angles x offsets");
    require_symmetric_offsets(ps.offsets);

    const int n_off = static_cast<int>(ps.offsets.size());
    const int len = oversample * n_off;
    const double ds = ps.offsets[1] - ps.offsets[0];
    const double s_ref = ps.offsets[n_off / 2];
    const double h = 2.0 / n;

    PPResult out;
    out.data = PPData(n);
    out.radial.n = n;
    out.radial.epsilon.assign(out.data.size(), 0.0);

    const auto lines = static_cast<long>(n_lines);
#pragma omp parallel
    {
        std::vector<cplx> buf(static_cast<std::size_t>(len));
#pragma omp for schedule(static)
        for (long i = 0; i < lines; ++i) {
            const int block = set.block(i);
            const int m = set.slope_index(i);
            std::fill(buf.begin(), buf.end(), cplx{});
            for (int j = 0; j < n_off; ++j) {
                const int pos = ((j - n_off / 2) % len + len) % len;
                buf[pos] = ps.at(i, j);
            }
            fft::forward(buf);
            for (int l = -n; l < n; ++l) {
                const std::size_t idx = out.data.index(block, l, m);
                const Frequency w = pp_frequency(n, block, l, m);
                const double k = pp_radius(n, block, l, m) / h;
                const double q = k * ds * len / kTwoPi;
                if (std::abs(q) > 0.5 * len) {
                    out.radial.epsilon[idx] = kEpsilonCap;
                    continue;
                }
                const double q0 = std::floor(q);
                const double t = q - q0;
                const int i0 = ((static_cast<int>(q0) % len) + len) % len;
                const int i1 = (i0 + 1) % len;
                const cplx g = (1.0 - t) * buf[i0] + t * buf[i1];
                const double apod = std::pow(sinc(0.5 * w.wx) * sinc(0.5 * w.wy), 2);
                const cplx shift = std::polar(ds / (h * h * apod), 0.5 * (w.wx + w.wy) - k * s_ref);
                out.data.values[idx] = shift * g;
                out.radial.epsilon[idx] =
                    epsilon_from_distance(std::min(t, 1.0 - t) / oversample, 0.5);
            }
        }
    }
    return out;
}

} // namespace ppct
