#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurotree {

/// Seedable random source shared by every randomized operation.
///
/// Wraps std::mt19937_64 so the full engine state can be serialized into a
/// checkpoint and restored bit-exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi] (inclusive).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        std::uniform_int_distribution<std::int64_t> dist(lo, hi);
        return dist(engine_);
    }

    /// Uniform index in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1)); }

    double uniform(double lo = 0.0, double hi = 1.0)
    {
        std::uniform_real_distribution<double> dist(lo, hi);
        return dist(engine_);
    }

    double normal(double mean = 0.0, double stddev = 1.0)
    {
        std::normal_distribution<double> dist(mean, stddev);
        return dist(engine_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& values)
    {
        // Fisher-Yates with our own index draws so the permutation only
        // depends on the engine, not on the library's shuffle algorithm.
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

    /// Derive an independent child seed (for per-individual training seeds).
    std::uint64_t fork_seed() { return engine_(); }

    std::string save_state() const
    {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void load_state(const std::string& text)
    {
        std::istringstream is(text);
        is >> engine_;
        if (!is) {
            throw std::runtime_error("invalid rng state");
        }
    }

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace neurotree
