#pragma once

#include "neurotree/gp/types.hpp"
#include "neurotree/rng.hpp"

#include <variant>
#include <vector>

namespace neurotree::primitives {

struct IntChoice {
    std::vector<std::int64_t> values;
};
struct IntRange {
    std::int64_t lo;
    std::int64_t hi;
};
struct FloatUniform {
    double lo;
    double hi;
};
struct FloatLogUniform {
    double lo;
    double hi;
};
struct EnumChoice {
    std::size_t count;
};

using Domain = std::variant<IntChoice, IntRange, FloatUniform, FloatLogUniform, EnumChoice>;

struct DomainEntry {
    gp::SemType type;
    gp::ParamField field;
    Domain domain;
};

/// Sampling domains for every ephemeral slot (type, field) in the search
/// space. Fields without an entry fall back to the type's ParamField::None row.
const std::vector<DomainEntry>& ephemeral_domains();

const Domain& domain_for(gp::SemType type, gp::ParamField field);

gp::Constant sample_constant(gp::SemType type, gp::ParamField field, Rng& rng);

bool in_domain(const Domain& domain, const gp::Constant& value);

} // namespace neurotree::primitives
