#pragma once

#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

#include "core.hpp"

namespace husimi {

namespace detail {

// FFTW planning is not thread safe; execution with new-array calls is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int n0, int n1, int sign) {
        std::lock_guard<std::mutex> lk(mu_);
        auto key = std::make_tuple(n0, n1, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n0) * n1);
        fftw_plan plan = fftw_plan_dft_2d(n0, n1, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& kv : plans_) fftw_destroy_plan(kv.second);
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

// In-place unnormalized 2-D DFT of a matrix; sign -1 forward, +1 backward.
inline void fft2(Mat& m, int sign) {
    // Column-major rows×cols is a row-major cols×rows array; the 2-D transform does not care.
    int n0 = static_cast<int>(m.cols()), n1 = static_cast<int>(m.rows());
    fftw_plan plan = detail::PlanCache::instance().get(n0, n1, sign);
    auto* data = reinterpret_cast<fftw_complex*>(m.data());
    fftw_execute_dft(plan, data, data);
}

inline void fft2_forward(Mat& m) { fft2(m, FFTW_FORWARD); }

// Backward transform including the 1/N normalization.
inline void fft2_inverse(Mat& m) {
    fft2(m, FFTW_BACKWARD);
    m /= static_cast<double>(m.size());
}

// Signed frequency index of bin k out of n.
inline int fft_index(int k, int n) { return k < (n + 1) / 2 ? k : k - n; }

}  // namespace husimi
