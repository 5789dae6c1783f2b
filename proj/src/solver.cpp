#include "ppct/solver.hpp"

#include "ppct/priors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace ppct {
namespace {

void require_consistent(const PPData& y, const Weights& c) {
    if (y.n < 2 || y.n % 2 != 0 || y.values.size() != 4 * static_cast<std::size_t>(y.n) * y.n)
        throw std::invalid_argument("solver: invalid pseudo-polar data");
    if (c.c.size() != y.values.size())
        throw std::invalid_argument("solver: weights do not match the data layout");
}

// 0.5 ||c (y - Ax)||^2 given Ax.
double data_term(const PPData& y, const Weights& c, const PPCoefficients& ax) {
    double sum = 0.0;
    for (std::size_t i = 0; i < y.values.size(); ++i)
        sum += c.c[i] * c.c[i] * std::norm(y.values[i] - ax.values[i]);
    return 0.5 * sum;
}

void axpby(PPCoefficients& out, double a, const PPCoefficients& x, double b, const PPCoefficients& y) {
    out.n = x.n;
    out.values.resize(x.values.size());
    for (std::size_t i = 0; i < x.values.size(); ++i)
        out.values[i] = a * x.values[i] + b * y.values[i];
}

Image combine_images(double a, const Image& x, double b, const Image& y) {
    Image out(x.n);
    out.pixel_size = x.pixel_size;
    for (std::size_t i = 0; i < x.size(); ++i)
        out.pixels[i] = a * x.pixels[i] + b * y.pixels[i];
    return out;
}

double max_abs(const Image& x) {
    double m = 0.0;
    for (double v : x.pixels)
        m = std::max(m, std::abs(v));
    return m;
}

} // namespace

Image e_step(const Image& r, const PPData& y, const Weights& c, double alpha) {
    require_consistent(y, c);
    if (r.n != y.n || r.pixels.size() != static_cast<std::size_t>(r.n) * r.n)
        throw std::invalid_argument("e_step: image size does not match the data");
    PPCoefficients resid = ppft_forward(r);
    for (std::size_t i = 0; i < resid.values.size(); ++i)
        resid.values[i] = c.c[i] * y.values[i] - c.c[i] * resid.values[i];
    const Image g = ppft_adjoint(resid);
    return combine_images(1.0, r, alpha * alpha, g);
}

std::pair<double, Image> momentum_step(double t, const Image& x, const Image& x_prev) {
    if (t < 1.0)
        throw std::invalid_argument("momentum_step: t must be >= 1");
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    return {t_next, combine_images(1.0 + beta, x, -beta, x_prev)};
}

double step_scale_check(double alpha, int n, std::string* warning) {
    const double bound = 1.0 / std::sqrt(ppft_sigma_max(n));
    if (alpha <= 0.0)
        return bound;
    if (alpha * alpha * ppft_sigma_max(n) <= 1.0 + 1e-12)
        return alpha;
    if (warning) {
        std::ostringstream msg;
        msg << "alpha " << alpha << " exceeds 1/sqrt(sigma_max) = " << bound << "; clamped";
        *warning = msg.str();
    }
    return bound;
}

ReconResult fcsa_lem(const PPData& y, const Weights& c, const SolverConfig& cfg) {
    require_consistent(y, c);
    if (!(cfg.tol > 0.0) || cfg.maxiter < 1 || cfg.tv_inner_iters < 0)
        throw std::invalid_argument("solver: tol must be > 0 and maxiter >= 1");
    const auto start = std::chrono::steady_clock::now();
    const int n = y.n;

    ReconResult res;
    res.alpha = step_scale_check(cfg.alpha, n, &res.warning);
    const double a2 = res.alpha * res.alpha;

    PPCoefficients cy = y;
    for (std::size_t i = 0; i < cy.values.size(); ++i)
        cy.values[i] *= c.c[i];
    const Image back = ppft_adjoint(cy);
    const double lambda_default = 1e-3 * max_abs(back);
    res.lambda1 = cfg.lambda1 < 0.0 ? lambda_default : cfg.lambda1;
    res.lambda2 = cfg.lambda2 < 0.0 ? lambda_default : cfg.lambda2;
    const int levels = wavelet_levels(n, cfg.wavelet_levels);
    const bool use1 = res.lambda1 > 0.0;
    const bool use2 = res.lambda2 > 0.0;

    auto objective = [&](const Image& x, const PPCoefficients& ax) {
        double f = data_term(y, c, ax);
        if (use1)
            f += res.lambda1 * wavelet_l1(x, levels);
        if (use2)
            f += res.lambda2 * tv_value(x);
        return f;
    };

    Image x_prev(n);
    if (cfg.warm_start) {
        // Least-squares scale of A^T (c y) against the data.
        const PPCoefficients ab = ppft_forward(back);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < ab.values.size(); ++i) {
            const cplx cab = c.c[i] * ab.values[i];
            num += (std::conj(cab) * cy.values[i]).real();
            den += std::norm(cab);
        }
        x_prev = combine_images(den > 0.0 ? num / den : 0.0, back, 0.0, back);
    }
    PPCoefficients ax_prev = ppft_forward(x_prev);
    const double f_initial = objective(x_prev, ax_prev);
    Image r = x_prev;
    PPCoefficients ar = ax_prev;
    double t = 1.0;

    PPCoefficients resid(n);
    PPCoefficients ax(n);
    for (int k = 1; k <= cfg.maxiter; ++k) {
        for (std::size_t i = 0; i < resid.values.size(); ++i)
            resid.values[i] = cy.values[i] - c.c[i] * ar.values[i];
        const Image z = combine_images(1.0, r, a2, ppft_adjoint(resid));

        Image x;
        double f1 = 0.0;
        double f2 = 0.0;
        if (use1 && use2) {
            const Image x1 = soft_threshold_prox(z, res.lambda1 * a2, levels);
            const Image x2 = tv_prox(z, res.lambda2 * a2, cfg.tv_inner_iters);
            const PPCoefficients ax1 = ppft_forward(x1);
            const PPCoefficients ax2 = ppft_forward(x2);
            f1 = data_term(y, c, ax1) + res.lambda1 * wavelet_l1(x1, levels);
            f2 = data_term(y, c, ax2) + res.lambda2 * tv_value(x2);
            const double delta = f1 + f2 > 0.0 ? f2 / (f1 + f2) : 0.5;
            x = combine_images(delta, x1, 1.0 - delta, x2);
            axpby(ax, delta, ax1, 1.0 - delta, ax2);
        } else if (use1) {
            x = soft_threshold_prox(z, res.lambda1 * a2, levels);
            ax = ppft_forward(x);
            f1 = data_term(y, c, ax) + res.lambda1 * wavelet_l1(x, levels);
        } else if (use2) {
            x = tv_prox(z, res.lambda2 * a2, cfg.tv_inner_iters);
            ax = ppft_forward(x);
            f2 = data_term(y, c, ax) + res.lambda2 * tv_value(x);
        } else {
            x = z;
            ax = ppft_forward(x);
            f1 = f2 = data_term(y, c, ax);
        }

        const double f = objective(x, ax);
        if (!std::isfinite(f) || (f_initial > 0.0 && f > 1e3 * f_initial)) {
            std::ostringstream msg;
            msg << "solver diverged at iteration " << k << " (alpha = " << res.alpha << ", lambda1 = " << res.lambda1
                << ", lambda2 = " << res.lambda2 << ")";
            throw DivergenceError(msg.str());
        }

        double diff = 0.0;
        double norm = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            diff += std::pow(x.pixels[i] - x_prev.pixels[i], 2);
            norm += x.pixels[i] * x.pixels[i];
        }
        const double rel = norm > 0.0 ? std::sqrt(diff / norm) : (diff > 0.0 ? 1.0 : 0.0);
        if (cfg.record_history) {
            res.f1.push_back(f1);
            res.f2.push_back(f2);
            res.rel_change.push_back(rel);
        }
        res.iterations = k;

        auto [t_next, r_next] = momentum_step(t, x, x_prev);
        const double beta = (t - 1.0) / t_next;
        axpby(ar, 1.0 + beta, ax, -beta, ax_prev);
        r = std::move(r_next);
        t = t_next;
        x_prev = std::move(x);
        std::swap(ax_prev, ax);
        if (rel < cfg.tol)
            break;
    }
    res.image = std::move(x_prev);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

ReconResult ista_baseline(const PPData& y, const SolverConfig& cfg) {
    SolverConfig plain = cfg;
    plain.lambda2 = 0.0;
    return fcsa_lem(y, unit_weights(y.n), plain);
}

} // namespace ppct
