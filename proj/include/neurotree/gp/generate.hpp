#pragma once

#include "neurotree/gp/tree.hpp"

namespace neurotree::gp {

enum class GenMethod : std::uint8_t { Grow, Full };

/// Random type-sound tree with root type `return_type` and depth in
/// [depth_min, depth_max]. A target depth is drawn uniformly from the depths
/// the primitive set can realize in that range, then:
///  - Full: every child that can reach the remaining depth does so;
///  - Grow: one child reaches it, the others draw a random realizable depth.
/// Ephemerals are sampled from the domain of the slot they fill.
Node generate_tree(Rng& rng, const PrimitiveSet& pset, GenMethod method, int depth_min, int depth_max,
                   SemType return_type, ParamField field = ParamField::None);

/// Ramped half-and-half: method picked 50/50 per call.
Node generate_ramped(Rng& rng, const PrimitiveSet& pset, int depth_min, int depth_max, SemType return_type);

} // namespace neurotree::gp
