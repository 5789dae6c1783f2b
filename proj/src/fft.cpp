#include "ppct/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace ppct::fft {
namespace {

enum class Kind { Forward, Inverse, Dct2, Dct3 };

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(Kind kind, int n, int count = 1) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(kind, n, count);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;

        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan plan = nullptr;
        if (kind == Kind::Forward || kind == Kind::Inverse) {
            std::vector<cplx> buf(static_cast<std::size_t>(n) * count);
            auto* p = reinterpret_cast<fftw_complex*>(buf.data());
            plan = fftw_plan_many_dft(1, &n, count, p, nullptr, 1, n, p, nullptr, 1, n,
                                      kind == Kind::Forward ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        } else {
            std::vector<double> buf(static_cast<std::size_t>(n) * n);
            const fftw_r2r_kind k = kind == Kind::Dct2 ? FFTW_REDFT10 : FFTW_REDFT01;
            plan = fftw_plan_r2r_2d(n, n, buf.data(), buf.data(), k, k, flags);
        }
        if (!plan)
            throw std::runtime_error("FFTW failed to create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<Kind, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void run_complex(Kind kind, std::span<cplx> data) {
    if (data.empty())
        return;
    fftw_plan plan = cache().get(kind, static_cast<int>(data.size()));
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

// Fixed chunking keeps every transform on the same plan whatever the thread count.
constexpr int kBatch = 16;

void run_many(Kind kind, std::span<cplx> data, int length) {
    if (length < 1 || data.size() % static_cast<std::size_t>(length) != 0)
        throw std::invalid_argument("fft: buffer is not a whole number of transforms");
    const int count = static_cast<int>(data.size() / length);
    const int chunks = (count + kBatch - 1) / kBatch;
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < chunks; ++ch) {
        const int first = ch * kBatch;
        const int howmany = std::min(kBatch, count - first);
        fftw_plan plan = cache().get(kind, length, howmany);
        auto* p = reinterpret_cast<fftw_complex*>(data.data() + static_cast<std::size_t>(first) * length);
        fftw_execute_dft(plan, p, p);
    }
}

void run_real(Kind kind, std::span<double> data, int n) {
    if (data.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("dct: buffer is not n x n");
    fftw_plan plan = cache().get(kind, n);
    fftw_execute_r2r(plan, data.data(), data.data());
}

} // namespace

void forward(std::span<cplx> data) { run_complex(Kind::Forward, data); }
void inverse(std::span<cplx> data) { run_complex(Kind::Inverse, data); }
void forward_many(std::span<cplx> data, int length) { run_many(Kind::Forward, data, length); }
void inverse_many(std::span<cplx> data, int length) { run_many(Kind::Inverse, data, length); }
void dct2(std::span<double> data, int n) { run_real(Kind::Dct2, data, n); }
void dct3(std::span<double> data, int n) { run_real(Kind::Dct3, data, n); }

int next_pow2(int n) {
    int p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

} // namespace ppct::fft
