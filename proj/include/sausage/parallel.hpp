#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sausage {

inline constexpr char const* workers_env_var = "SAUSAGELAB_WORKERS";

/// Flag value if positive, else the environment variable, else hardware threads.
inline unsigned resolve_workers(int requested = 0)
{
    if (requested > 0)
        return static_cast<unsigned>(requested);
    if (char const* env = std::getenv(workers_env_var))
    {
        try
        {
            int const v = std::stoi(env);
            if (v > 0)
                return static_cast<unsigned>(v);
        }
        catch (std::exception const&)
        {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/*!
 * Evaluates fn(i) for i in [0, n) on `workers` threads.
 *
 * Results land in index order, so any reduction over the returned vector is
 * independent of scheduling. The first exception thrown by a task is
 * rethrown after all workers stop.
 */
template<class Fn>
auto parallel_map(std::size_t n, unsigned workers, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))>
{
    using Result = decltype(fn(std::size_t{}));
    std::vector<Result> out(n);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = fn(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;)
        {
            std::size_t const i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try
            {
                out[i] = fn(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
    return out;
}

}  // namespace sausage
