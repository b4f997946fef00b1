#include "winterscan/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace winterscan {

std::size_t thread_cap() {
    static const std::size_t cap = [] {
        std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
        const char* env = std::getenv("WINTERSCAN_THREADS");
        if (env == nullptr) return hw;
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v <= 0) return hw;
        return static_cast<std::size_t>(v);
    }();
    return cap;
}

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (begin >= end) return;
    const std::size_t n = end - begin;
    const std::size_t workers = std::min(thread_cap(), n);
    if (workers <= 1) {
        fn(begin, end);
        return;
    }
    const std::size_t block = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    // One slot per worker; the lowest-block exception is rethrown so the
    // reported failure does not depend on thread timing.
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * block;
        if (lo >= end) break;
        const std::size_t hi = std::min(end, lo + block);
        pool.emplace_back([&fn, &errors, w, lo, hi] {
            try {
                fn(lo, hi);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace winterscan
