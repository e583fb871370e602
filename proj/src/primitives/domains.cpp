#include "neurotree/primitives/domains.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace neurotree::primitives {

using gp::ParamField;
using gp::SemType;

const std::vector<DomainEntry>& ephemeral_domains()
{
    static const std::vector<DomainEntry> table = {
        // Powers of two, so uniform over the set is log-uniform over the range.
        {SemType::Int, ParamField::Units, IntChoice{{4, 8, 16, 32, 64, 128}}},
        {SemType::Int, ParamField::Kernel, IntChoice{{1, 3, 5}}},
        {SemType::Int, ParamField::Stride, IntChoice{{1, 2}}},
        {SemType::Int, ParamField::PoolSize, IntChoice{{2, 3}}},
        {SemType::Int, ParamField::BatchSize, IntRange{1, 64}},
        {SemType::Int, ParamField::Bins, IntRange{4, 32}},
        {SemType::Int, ParamField::None, IntRange{1, 10}},
        {SemType::Float, ParamField::WeightDecay, FloatLogUniform{1e-6, 1e-2}},
        {SemType::Float, ParamField::DropoutRate, FloatUniform{0.05, 0.5}},
        {SemType::Float, ParamField::Sigma, FloatUniform{0.3, 2.0}},
        {SemType::Float, ParamField::Threshold, FloatUniform{0.0, 1.0}},
        {SemType::Float, ParamField::None, FloatUniform{0.0, 1.0}},
        {SemType::ActivationKind, ParamField::None, EnumChoice{gp::kActivations.size()}},
        {SemType::OptimizerKind, ParamField::None, EnumChoice{gp::kOptimizers.size()}},
        {SemType::PaddingKind, ParamField::None, EnumChoice{gp::kPaddings.size()}},
        {SemType::PretrainedKind, ParamField::None, EnumChoice{gp::kPretrained.size()}},
    };
    return table;
}

const Domain& domain_for(SemType type, ParamField field)
{
    const auto& table = ephemeral_domains();
    for (const auto& e : table) {
        if (e.type == type && e.field == field) {
            return e.domain;
        }
    }
    for (const auto& e : table) {
        if (e.type == type && e.field == ParamField::None) {
            return e.domain;
        }
    }
    throw std::invalid_argument("no sampling domain for type " + std::string(gp::to_string(type)));
}

gp::Constant sample_constant(SemType type, ParamField field, Rng& rng)
{
    const Domain& d = domain_for(type, field);
    if (const auto* c = std::get_if<IntChoice>(&d)) {
        return c->values[rng.index(c->values.size())];
    }
    if (const auto* r = std::get_if<IntRange>(&d)) {
        return rng.uniform_int(r->lo, r->hi);
    }
    if (const auto* u = std::get_if<FloatUniform>(&d)) {
        return rng.uniform(u->lo, u->hi);
    }
    if (const auto* l = std::get_if<FloatLogUniform>(&d)) {
        return std::exp(rng.uniform(std::log(l->lo), std::log(l->hi)));
    }
    const auto& e = std::get<EnumChoice>(d);
    const std::size_t i = rng.index(e.count);
    switch (type) {
    case SemType::ActivationKind: return gp::kActivations[i];
    case SemType::OptimizerKind: return gp::kOptimizers[i];
    case SemType::PaddingKind: return gp::kPaddings[i];
    case SemType::PretrainedKind: return gp::kPretrained[i];
    default: throw std::invalid_argument("enum domain on non-enum type");
    }
}

bool in_domain(const Domain& domain, const gp::Constant& value)
{
    if (const auto* c = std::get_if<IntChoice>(&domain)) {
        const auto* v = std::get_if<std::int64_t>(&value);
        return v && std::find(c->values.begin(), c->values.end(), *v) != c->values.end();
    }
    if (const auto* r = std::get_if<IntRange>(&domain)) {
        const auto* v = std::get_if<std::int64_t>(&value);
        return v && *v >= r->lo && *v <= r->hi;
    }
    if (const auto* u = std::get_if<FloatUniform>(&domain)) {
        const auto* v = std::get_if<double>(&value);
        return v && *v >= u->lo && *v <= u->hi;
    }
    if (const auto* l = std::get_if<FloatLogUniform>(&domain)) {
        const auto* v = std::get_if<double>(&value);
        // exp(log(x)) can land an ulp outside the bounds.
        return v && *v >= l->lo * (1 - 1e-12) && *v <= l->hi * (1 + 1e-12);
    }
    return value.index() >= 2;
}

} // namespace neurotree::primitives
