#include "ppct/ppfft.hpp"

#include "ppct/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ppct {
namespace {

constexpr double kPi = std::numbers::pi;

void require_even(int n) {
    if (n < 2 || n % 2 != 0)
        throw std::invalid_argument("pseudo-polar transform needs an even size, got " + std::to_string(n));
}

// i^l for integer l.
cplx ipow(int l) {
    switch (((l % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

// Bluestein kernels for the length-N centered fractional DFTs with slope l/N.
// chirp[j + N] = exp(-i pi l j^2 / N^2) for j in [-N, N); the phase is reduced
// exactly in integers before conversion.
class PpftPlan {
public:
    explicit PpftPlan(int n) : n_(n), len_(fft::next_pow2(2 * n - 1)) {
        const int lines = 2 * n;
        chirp_.resize(static_cast<std::size_t>(lines) * 2 * n);
        kernel_pos_.resize(static_cast<std::size_t>(lines) * len_);
        kernel_neg_.resize(static_cast<std::size_t>(lines) * len_);
        const long long period = 2LL * n * n;
        for (int li = 0; li < lines; ++li) {
            const long long l = li - n;
            cplx* ch = &chirp_[static_cast<std::size_t>(li) * 2 * n];
            for (int j = -n; j < n; ++j) {
                long long q = (l * j * j) % period;
                if (q < 0)
                    q += period;
                const double ang = -kPi * static_cast<double>(q) / (static_cast<double>(n) * n);
                ch[j + n] = {std::cos(ang), std::sin(ang)};
            }
            cplx* kp = &kernel_pos_[static_cast<std::size_t>(li) * len_];
            cplx* kn = &kernel_neg_[static_cast<std::size_t>(li) * len_];
            for (int d = -(n - 1); d <= n - 1; ++d) {
                const int idx = ((d % len_) + len_) % len_;
                kp[idx] = std::conj(ch[d + n]);
                kn[idx] = ch[d + n];
            }
            fft::forward({kp, static_cast<std::size_t>(len_)});
            fft::forward({kn, static_cast<std::size_t>(len_)});
        }
    }

    int len() const { return len_; }

    // exp(-i pi l j^2 / N^2) for j in [-N, N), indexed by j + N.
    const cplx* chirp(int l) const { return &chirp_[static_cast<std::size_t>(l + n_) * 2 * n_]; }

    // Spectrum of the Bluestein kernel for slope sign * l / N.
    const cplx* kernel(int l, int sign) const {
        return &(sign > 0 ? kernel_pos_ : kernel_neg_)[static_cast<std::size_t>(l + n_) * len_];
    }

private:
    int n_;
    int len_;
    std::vector<cplx> chirp_;
    std::vector<cplx> kernel_pos_;
    std::vector<cplx> kernel_neg_;
};

std::shared_ptr<const PpftPlan> plan_for(int n) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const PpftPlan>> plans;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = plans[n];
    if (!slot)
        slot = std::make_shared<const PpftPlan>(n);
    return slot;
}

void require_layout(const PPCoefficients& c) {
    require_even(c.n);
    if (c.values.size() != 4 * static_cast<std::size_t>(c.n) * c.n)
        throw std::invalid_argument("pseudo-polar coefficients: length is not 4 N^2");
}


// Rows of `lines` (2N x len) hold the chirp-premultiplied inputs of the
// fractional DFTs, one per radial index; convolve each with its kernel in place.
void bluestein_convolve(const PpftPlan& plan, int n, int sign, std::vector<cplx>& lines) {
    const int len = plan.len();
    fft::forward_many(lines, len);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < 2 * n; ++k) {
        const cplx* ker = plan.kernel(k - n, sign);
        cplx* row = &lines[static_cast<std::size_t>(k) * len];
        for (int i = 0; i < len; ++i)
            row[i] *= ker[i];
    }
    fft::inverse_many(lines, len);
}

constexpr int kTile = 32;

} // namespace

Frequency pp_frequency(int n, int block, int l, int m) {
    const double radial = kPi * l / n;
    const double slope = 2.0 * m / n;
    if (block == 0)
        return {radial, radial * slope};
    return {-radial * slope, radial};
}

double pp_line_angle(int n, int block, int m) {
    const double a = std::atan(2.0 * m / n);
    return block == 0 ? a : a + 0.5 * kPi;
}

double pp_radius(int n, int /*block*/, int l, int m) {
    const double slope = 2.0 * m / n;
    return kPi * l / n * std::sqrt(1.0 + slope * slope);
}

std::vector<cplx> frac_dft(std::span<const cplx> x, double slope) { return frac_dft(x, slope, 0); }

std::vector<cplx> frac_dft(std::span<const cplx> x, double slope, int offset) {
    const int k_len = static_cast<int>(x.size());
    if (k_len < 1)
        throw std::invalid_argument("frac_dft: empty input");
    // k m = (k^2 + m^2 - (m - k)^2) / 2 turns the sum into a convolution.
    auto chirp = [&](long long j) {
        const double ang = -kPi * slope * static_cast<double>(j * j) / k_len;
        return cplx{std::cos(ang), std::sin(ang)};
    };
    const int len = fft::next_pow2(2 * k_len - 1);
    std::vector<cplx> a(static_cast<std::size_t>(len));
    std::vector<cplx> h(static_cast<std::size_t>(len));
    for (int k = 0; k < k_len; ++k)
        a[k] = x[k] * chirp(k + offset);
    for (int d = -(k_len - 1); d <= k_len - 1; ++d)
        h[((d % len) + len) % len] = std::conj(chirp(d));
    fft::forward(a);
    fft::forward(h);
    for (int i = 0; i < len; ++i)
        a[i] *= h[i];
    fft::inverse(a);
    std::vector<cplx> y(static_cast<std::size_t>(k_len));
    for (int m = 0; m < k_len; ++m)
        y[m] = a[m] / static_cast<double>(len) * chirp(m + offset);
    return y;
}


PPCoefficients ppft_forward(const Image& img) {
    require_even(img.n);
    if (img.pixels.size() != static_cast<std::size_t>(img.n) * img.n)
        throw std::invalid_argument("ppft_forward: pixel buffer does not match side length");
    const int n = img.n;
    const int two_n = 2 * n;
    const int half = n / 2;
    const auto plan = plan_for(n);
    const int len = plan->len();
    PPCoefficients out(n);
    // rows[t]: zero-padded line t (image row for BH, column for BV).
    std::vector<cplx> rows(static_cast<std::size_t>(n) * two_n);
    std::vector<cplx> lines(static_cast<std::size_t>(two_n) * len);

    for (int block = 0; block < 2; ++block) {
        const int sign = block == 0 ? 1 : -1;
        std::fill(rows.begin(), rows.end(), cplx{});
        for (int t = 0; t < n; ++t)
            for (int i = 0; i < n; ++i) {
                const double v = block == 0 ? img(t, i) : img(i, t);
                rows[static_cast<std::size_t>(t) * two_n + i] = (i % 2 == 0) ? v : -v;
            }
        fft::forward_many(rows, two_n);

        std::fill(lines.begin(), lines.end(), cplx{});
#pragma omp parallel for schedule(static)
        for (int k0 = 0; k0 < two_n; k0 += kTile)
            for (int t0 = 0; t0 < n; t0 += kTile)
                for (int k = k0; k < std::min(k0 + kTile, two_n); ++k) {
                    const cplx* ch = plan->chirp(k - n);
                    const cplx phase = ipow(k - n);
                    cplx* dst = &lines[static_cast<std::size_t>(k) * len];
                    for (int t = t0; t < std::min(t0 + kTile, n); ++t) {
                        const cplx c = sign > 0 ? ch[t - half + n] : std::conj(ch[t - half + n]);
                        dst[t] = rows[static_cast<std::size_t>(t) * two_n + k] * phase * c;
                    }
                }
        bluestein_convolve(*plan, n, sign, lines);

        const double scale = 1.0 / len;
#pragma omp parallel for schedule(static)
        for (int k = 0; k < two_n; ++k) {
            const int l = k - n;
            const cplx* ch = plan->chirp(l);
            const cplx* src = &lines[static_cast<std::size_t>(k) * len];
            cplx* dst = &out.values[out.index(block, l, -half)];
            for (int m = 0; m < n; ++m) {
                const cplx c = sign > 0 ? ch[m - half + n] : std::conj(ch[m - half + n]);
                dst[m] = src[m] * scale * c;
            }
        }
    }
    return out;
}

Image ppft_adjoint(const PPCoefficients& c) {
    require_layout(c);
    const int n = c.n;
    const int two_n = 2 * n;
    const int half = n / 2;
    const auto plan = plan_for(n);
    const int len = plan->len();
    Image out(n);
    std::vector<cplx> rows(static_cast<std::size_t>(n) * two_n);
    std::vector<cplx> lines(static_cast<std::size_t>(two_n) * len);

    for (int block = 0; block < 2; ++block) {
        // The fractional-DFT matrix is symmetric, so its adjoint flips the slope sign.
        const int sign = block == 0 ? -1 : 1;
        std::fill(lines.begin(), lines.end(), cplx{});
#pragma omp parallel for schedule(static)
        for (int k = 0; k < two_n; ++k) {
            const int l = k - n;
            const cplx* ch = plan->chirp(l);
            const cplx* src = &c.values[c.index(block, l, -half)];
            cplx* dst = &lines[static_cast<std::size_t>(k) * len];
            for (int m = 0; m < n; ++m)
                dst[m] = src[m] * (sign > 0 ? ch[m - half + n] : std::conj(ch[m - half + n]));
        }
        bluestein_convolve(*plan, n, sign, lines);

        const double scale = 1.0 / len;
#pragma omp parallel for schedule(static)
        for (int t0 = 0; t0 < n; t0 += kTile)
            for (int k0 = 0; k0 < two_n; k0 += kTile)
                for (int t = t0; t < std::min(t0 + kTile, n); ++t)
                    for (int k = k0; k < std::min(k0 + kTile, two_n); ++k) {
                        const cplx* ch = plan->chirp(k - n);
                        const cplx cc = sign > 0 ? ch[t - half + n] : std::conj(ch[t - half + n]);
                        rows[static_cast<std::size_t>(t) * two_n + k] =
                            lines[static_cast<std::size_t>(k) * len + t] * (scale * cc) * std::conj(ipow(k - n));
                    }
        fft::inverse_many(rows, two_n);

        for (int t = 0; t < n; ++t)
            for (int i = 0; i < n; ++i) {
                const double re = rows[static_cast<std::size_t>(t) * two_n + i].real();
                const double v = (i % 2 == 0) ? re : -re;
                if (block == 0)
                    out(t, i) += v;
                else
                    out(i, t) += v;
            }
    }
    return out;
}

LsResult ppft_ls_inverse(const PPCoefficients& c, double tol, int maxiter) {
    require_layout(c);
    const int n = c.n;
    std::vector<double> weight(c.size());
    for (int block = 0; block < 2; ++block)
        for (int l = -n; l < n; ++l)
            for (int m = -n / 2; m < n / 2; ++m)
                weight[c.index(block, l, m)] = std::max(std::abs(l), 1);

    auto weighted = [&](PPCoefficients v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            v.values[i] *= weight[i];
        return v;
    };

    LsResult res;
    res.image = Image(n);
    Image r = ppft_adjoint(weighted(c));
    const double b_norm = norm2(r.pixels);
    if (b_norm == 0.0)
        return res;

    Image p = r;
    double rr = dot(r.pixels, r.pixels);
    for (int it = 1; it <= maxiter; ++it) {
        const Image q = ppft_adjoint(weighted(ppft_forward(p)));
        const double pq = dot(p.pixels, q.pixels);
        if (pq <= 0.0)
            break;
        const double step = rr / pq;
        for (std::size_t i = 0; i < r.size(); ++i) {
            res.image.pixels[i] += step * p.pixels[i];
            r.pixels[i] -= step * q.pixels[i];
        }
        const double rr_next = dot(r.pixels, r.pixels);
        res.iterations = it;
        res.relative_residual = std::sqrt(rr_next) / b_norm;
        if (res.relative_residual < tol)
            break;
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < p.size(); ++i)
            p.pixels[i] = r.pixels[i] + beta * p.pixels[i];
    }
    return res;
}

double ppft_sigma_max(int n) {
    require_even(n);
    static std::mutex mutex;
    static std::map<int, double> cache;
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = cache.find(n); it != cache.end())
            return it->second;
    }
    // The dominant eigenvector is close to a constant image.
    Image x(n, 1.0 / n);
    double estimate = 0.0;
    for (int it = 0; it < 300; ++it) {
        Image y = ppft_adjoint(ppft_forward(x));
        const double next = dot(x.pixels, y.pixels);
        const double y_norm = norm2(y.pixels);
        for (std::size_t i = 0; i < y.size(); ++i)
            x.pixels[i] = y.pixels[i] / y_norm;
        if (it > 2 && std::abs(next - estimate) <= 1e-10 * next) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    std::lock_guard<std::mutex> lock(mutex);
    cache[n] = estimate;
    return estimate;
}

} // namespace ppct
