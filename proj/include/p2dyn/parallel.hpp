#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace p2dyn {

int worker_count();
void set_worker_count(int n);

// Runs body(i) for i in [0, n) on contiguous chunks.  Results must be written
// to per-index slots; any reduction happens afterwards in index order so the
// outcome does not depend on the worker count.
template <class F> void parallel_for(std::size_t n, F&& body) {
    const std::size_t workers = std::min<std::size_t>(std::max(1, worker_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream for sample `index` under `seed`.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

inline double uniform01(std::mt19937_64& g) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

inline double gaussian(std::mt19937_64& g) {
    return std::normal_distribution<double>(0.0, 1.0)(g);
}

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct MeanStats {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

// Mean and standard error of independent replicate values.
MeanStats replicate_stats(const std::vector<double>& values);

// Batch-means estimate for a correlated series.
MeanStats batch_means(const std::vector<double>& series, std::size_t batches);

}  // namespace p2dyn
