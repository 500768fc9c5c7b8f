#include "vqccs/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace vqccs {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t n_workers = workers > 0 ? static_cast<std::size_t>(workers) : 1;
    n_workers = std::min(n_workers, count);
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(n_workers);
    std::size_t chunk = (count + n_workers - 1) / n_workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(begin + chunk, count);
        if (begin >= end) break;
        threads.emplace_back([&, w, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

int default_workers() {
    if (const char* env = std::getenv("VQCCS_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace vqccs
