#pragma once

// Thin FFTW wrapper for separable real-to-real transforms.
//
// Plans are created once per (shape, kinds) and cached process-wide. Creation
// goes through a global mutex (the FFTW planner is not reentrant); execution
// uses the new-array interface, which FFTW documents as thread-safe, so a
// cached plan may be shared by any number of threads.

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "rwave/errors.hpp"

namespace rwave::fft {

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class R2RPlan {
public:
    R2RPlan(std::vector<int> shape, std::vector<fftw_r2r_kind> kinds)
        : shape_(std::move(shape)), kinds_(std::move(kinds)) {
        size_ = 1;
        for (int n : shape_) size_ *= static_cast<std::size_t>(n);
        std::vector<double> a(size_), b(size_);
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_r2r(static_cast<int>(shape_.size()), shape_.data(), a.data(), b.data(),
                              kinds_.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan_ == nullptr) throw Error("fftw_plan_r2r failed");
    }
    ~R2RPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    R2RPlan(const R2RPlan&) = delete;
    R2RPlan& operator=(const R2RPlan&) = delete;

    std::size_t size() const { return size_; }

    // Out-of-place; `in` may be clobbered.
    void execute(std::span<double> in, std::span<double> out) const {
        if (in.size() != size_ || out.size() != size_) throw LengthMismatch("fft buffer size");
        fftw_execute_r2r(plan_, in.data(), out.data());
    }

private:
    std::vector<int> shape_;
    std::vector<fftw_r2r_kind> kinds_;
    std::size_t size_ = 0;
    fftw_plan plan_ = nullptr;
};

inline std::shared_ptr<const R2RPlan> cached_plan(const std::vector<int>& shape,
                                                  const std::vector<fftw_r2r_kind>& kinds) {
    using Key = std::pair<std::vector<int>, std::vector<int>>;
    static std::mutex cache_mutex;
    static std::map<Key, std::shared_ptr<const R2RPlan>> cache;
    Key key{shape, std::vector<int>(kinds.begin(), kinds.end())};
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto plan = std::make_shared<const R2RPlan>(shape, kinds);
    std::lock_guard lock(cache_mutex);
    auto [it, inserted] = cache.emplace(std::move(key), plan);
    return it->second;
}

// Smallest integer >= n whose prime factors are all in {2,3,5,7}.
inline int good_size(int n) {
    if (n < 1) return 1;
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

} // namespace rwave::fft
