#include "quakecast/threading.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace quakecast {

namespace {

std::atomic<int> g_threads{0};

int resolve_threads() {
    int n = g_threads.load(std::memory_order_relaxed);
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    return n;
}

// Lazily started pool. Workers pick up a (begin, end, fn) job broadcast by
// generation counter; chunk boundaries depend only on n and worker count.
class Pool {
public:
    explicit Pool(int workers) : workers_(workers) {
        threads_.reserve(workers_);
        for (int w = 0; w < workers_; ++w) {
            threads_.emplace_back([this, w] { worker_loop(w); });
        }
    }

    ~Pool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    int workers() const { return workers_; }

    void run(int n, const std::function<void(int)>& fn) {
        {
            std::lock_guard<std::mutex> lk(mu_);
            job_n_ = n;
            job_fn_ = &fn;
            remaining_.store(workers_, std::memory_order_relaxed);
            ++generation_;
        }
        cv_.notify_all();
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [this] { return remaining_.load(std::memory_order_acquire) == 0; });
    }

private:
    void run_chunk(int worker, int n, const std::function<void(int)>& fn) const {
        const std::int64_t lo = static_cast<std::int64_t>(n) * worker / workers_;
        const std::int64_t hi = static_cast<std::int64_t>(n) * (worker + 1) / workers_;
        for (std::int64_t i = lo; i < hi; ++i) fn(static_cast<int>(i));
    }

    void worker_loop(int worker) {
        std::uint64_t seen = 0;
        while (true) {
            const std::function<void(int)>* fn = nullptr;
            int n = 0;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                fn = job_fn_;
                n = job_n_;
            }
            run_chunk(worker, n, *fn);
            if (remaining_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
                std::lock_guard<std::mutex> lk(mu_);
                done_cv_.notify_all();
            }
        }
    }

    const int workers_;
    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    int job_n_ = 0;
    const std::function<void(int)>* job_fn_ = nullptr;
    std::atomic<int> remaining_{0};
};

std::mutex g_pool_mu;
Pool* g_pool = nullptr;

Pool* pool_for(int workers) {
    std::lock_guard<std::mutex> lk(g_pool_mu);
    if (g_pool && g_pool->workers() != workers) {
        delete g_pool;
        g_pool = nullptr;
    }
    if (!g_pool) g_pool = new Pool(workers);
    return g_pool;
}

}  // namespace

void set_num_threads(int n) { g_threads.store(n, std::memory_order_relaxed); }

int num_threads() { return resolve_threads(); }

void parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    const int workers = resolve_threads();
    if (workers <= 1 || n < 2) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    pool_for(workers)->run(n, fn);
}

}  // namespace quakecast
