#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace fedrisk {

// Runs fn(i) for i in [0, count) on `threads` workers with static striding.
// Each index writes only its own output slot, so results are identical for
// every worker count.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (count <= 0) {
        return;
    }
    if (threads <= 1 || count == 1) {
        for (int i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    const int workers = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < count; i += workers) {
                    fn(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& err : errors) {
        if (err) {
            std::rethrow_exception(err);
        }
    }
}

} // namespace fedrisk
