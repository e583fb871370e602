#pragma once

#include "neurotree/evolution/operators.hpp"
#include "neurotree/gp/expression.hpp"
#include "neurotree/gp/generate.hpp"

#include <string>

namespace neurotree::testing {

struct ClosureFuzzResult {
    std::size_t applications = 0;
    std::size_t changed = 0;
    std::size_t type_violations = 0;
    std::size_t depth_violations = 0;
    std::string first_failure;
};

/// Applies `op` `applications` times to trees drawn from an evolving pool:
/// each result replaces its operand, so trees drift towards the depth limit.
inline ClosureFuzzResult operator_closure_fuzz(const gp::PrimitiveSet& pset, evolution::OperatorId op,
                                               std::size_t applications, std::uint64_t seed,
                                               int depth_limit = evolution::kDefaultDepthLimit)
{
    constexpr std::size_t kPool = 32;
    Rng rng(seed);
    const evolution::OperatorContext ctx{pset, depth_limit};
    std::vector<gp::Node> pool;
    for (std::size_t i = 0; i < kPool; ++i) {
        pool.push_back(gp::generate_ramped(rng, pset, 2, 6, gp::SemType::PredictionVector));
    }
    ClosureFuzzResult r;
    for (std::size_t n = 0; n < applications; ++n) {
        const std::size_t i = rng.index(kPool);
        const std::size_t j = rng.index(kPool);
        auto out = evolution::apply_operator(op, pool[i], pool[j], ctx, rng);
        ++r.applications;
        if (!out) {
            continue;
        }
        if (!(*out == pool[i])) {
            ++r.changed;
        }
        const auto report = gp::validate_types(*out, pset, gp::SemType::PredictionVector);
        if (!report.ok()) {
            ++r.type_violations;
            if (r.first_failure.empty()) {
                r.first_failure = report.violation->message + " in " + gp::to_expression(*out);
            }
            continue;
        }
        if (gp::depth(*out) > depth_limit) {
            ++r.depth_violations;
            if (r.first_failure.empty()) {
                r.first_failure = "depth " + std::to_string(gp::depth(*out)) + " in " + gp::to_expression(*out);
            }
            continue;
        }
        pool[i] = std::move(*out);
    }
    return r;
}

} // namespace neurotree::testing
