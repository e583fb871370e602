#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace neurotree {

/// Default worst-case parameter count assigned to failed individuals.
inline constexpr std::int64_t kDefaultMaxParams = 10'000'000;

/// The two minimized objectives: misclassification rate and model size.
struct ObjectiveVector {
    double error_rate = 1.0;
    std::int64_t param_count = 0;

    static ObjectiveVector sentinel(std::int64_t max_params = kDefaultMaxParams) { return {1.0, max_params}; }

    std::array<double, 2> values() const { return {error_rate, static_cast<double>(param_count)}; }

    bool operator==(const ObjectiveVector&) const = default;
};

/// a dominates b: no worse everywhere, strictly better somewhere (minimization).
template <std::size_t N>
bool dominates(const std::array<double, N>& a, const std::array<double, N>& b)
{
    bool strictly = false;
    for (std::size_t i = 0; i < N; ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        if (a[i] < b[i]) {
            strictly = true;
        }
    }
    return strictly;
}

inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) { return dominates(a.values(), b.values()); }

} // namespace neurotree
