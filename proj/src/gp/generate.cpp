#include "neurotree/gp/generate.hpp"

#include <algorithm>

namespace neurotree::gp {

namespace {

std::vector<int> realizable_depths(const PrimitiveSet& pset, SemType type, int lo, int hi)
{
    std::vector<int> out;
    for (int d = std::max(lo, 1); d <= hi; ++d) {
        if (pset.realizable(type, d)) {
            out.push_back(d);
        }
    }
    return out;
}

Node build_terminal(Rng& rng, const PrimitiveSet& pset, SemType type, ParamField field)
{
    const auto& terms = pset.terminals(type);
    if (terms.empty()) {
        throw NoTerminalForType(type);
    }
    const PrimitiveSpec* t = terms[rng.index(terms.size())];
    if (t->ephemeral) {
        return make_constant(*t, pset.sample(type, field, rng));
    }
    return make_terminal(*t);
}

Node build_exact(Rng& rng, const PrimitiveSet& pset, GenMethod method, SemType type, ParamField field, int depth)
{
    if (depth == 1) {
        return build_terminal(rng, pset, type, field);
    }

    std::vector<const PrimitiveSpec*> candidates;
    for (const auto* p : pset.producers(type)) {
        bool all_fit = true;
        bool one_exact = false;
        for (auto in : p->input_types) {
            all_fit = all_fit && !realizable_depths(pset, in, 1, depth - 1).empty();
            one_exact = one_exact || pset.realizable(in, depth - 1);
        }
        if (all_fit && one_exact) {
            candidates.push_back(p);
        }
    }
    if (candidates.empty()) {
        throw NoTerminalForType(type);
    }
    const PrimitiveSpec& prim = *candidates[rng.index(candidates.size())];

    std::vector<std::size_t> exact_slots;
    for (std::size_t i = 0; i < prim.arity(); ++i) {
        if (pset.realizable(prim.input_types[i], depth - 1)) {
            exact_slots.push_back(i);
        }
    }
    const std::size_t pinned = exact_slots[rng.index(exact_slots.size())];

    std::vector<Node> children;
    children.reserve(prim.arity());
    for (std::size_t i = 0; i < prim.arity(); ++i) {
        const SemType in = prim.input_types[i];
        auto options = realizable_depths(pset, in, 1, depth - 1);
        int child_depth = 0;
        if (i == pinned) {
            child_depth = depth - 1;
        } else if (method == GenMethod::Full) {
            child_depth = options.back();
        } else {
            child_depth = options[rng.index(options.size())];
        }
        children.push_back(build_exact(rng, pset, method, in, prim.input_fields[i], child_depth));
    }
    return make_node(prim, std::move(children));
}

} // namespace

Node generate_tree(Rng& rng, const PrimitiveSet& pset, GenMethod method, int depth_min, int depth_max,
                   SemType return_type, ParamField field)
{
    if (depth_min > depth_max) {
        throw std::invalid_argument("depth_min exceeds depth_max");
    }
    if (!pset.reachable(return_type)) {
        throw UnsatisfiableType(return_type);
    }
    auto depths = realizable_depths(pset, return_type, depth_min, depth_max);
    if (depths.empty()) {
        throw NoTerminalForType(return_type);
    }
    const int target = depths[rng.index(depths.size())];
    return build_exact(rng, pset, method, return_type, field, target);
}

Node generate_ramped(Rng& rng, const PrimitiveSet& pset, int depth_min, int depth_max, SemType return_type)
{
    GenMethod method = rng.bernoulli(0.5) ? GenMethod::Grow : GenMethod::Full;
    return generate_tree(rng, pset, method, depth_min, depth_max, return_type);
}

} // namespace neurotree::gp
