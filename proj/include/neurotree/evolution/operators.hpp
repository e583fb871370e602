#pragma once

#include "neurotree/gp/tree.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <utility>

namespace neurotree::evolution {

inline constexpr int kDefaultDepthLimit = 17;
inline constexpr int kInitDepthMin = 2;
inline constexpr int kInitDepthMax = 6;

/// What every operator needs besides its operands.
struct OperatorContext {
    const gp::PrimitiveSet& pset;
    int depth_limit = kDefaultDepthLimit;
};

/// Every operator either returns a type-sound tree within the depth limit or
/// nullopt, meaning "identity" (no eligible point, or the result would break
/// the depth limit). Callers keep the input on nullopt.
using MaybeTree = std::optional<gp::Node>;
using MaybePair = std::optional<std::pair<gp::Node, gp::Node>>;

// Mating.

/// Swaps one uniformly chosen LayerUnit subtree between the parents.
MaybePair crossover_one_point(const gp::Node& a, const gp::Node& b, const OperatorContext& ctx, Rng& rng);

/// Swaps one ephemeral constant between slots of equal (type, field).
MaybePair crossover_ephemeral(const gp::Node& a, const gp::Node& b, const OperatorContext& ctx, Rng& rng);

/// Each child keeps its parent's whole tree; at its chosen LayerUnit point
/// the original subtree is concatenated with the other parent's chosen one.
MaybePair crossover_subtree_preserving(const gp::Node& a, const gp::Node& b, const OperatorContext& ctx, Rng& rng);

/// crossover_one_point against a freshly generated tree; returns `a`'s child.
MaybeTree headless_chicken(const gp::Node& a, const OperatorContext& ctx, Rng& rng);

/// crossover_ephemeral against a freshly generated tree; returns `a`'s child.
MaybeTree headless_chicken_ephemeral(const gp::Node& a, const OperatorContext& ctx, Rng& rng);

// Classic GP mutations.

/// Wraps a random node in a new primitive that takes and returns its type;
/// the new primitive's other arguments are freshly generated.
MaybeTree mutate_insert(const gp::Node& root, const OperatorContext& ctx, Rng& rng);

/// mutate_insert, then one of the inserted primitive's other arguments is
/// regenerated.
MaybeTree mutate_insert_modify(const gp::Node& root, const OperatorContext& ctx, Rng& rng);

/// Resamples one random ephemeral from its slot's domain.
MaybeTree mutate_ephemeral(const gp::Node& root, const OperatorContext& ctx, Rng& rng);

/// Replaces a random non-root subtree with a fresh tree of the same type.
MaybeTree mutate_uniform(const gp::Node& root, const OperatorContext& ctx, Rng& rng);

/// Replaces a random node with one of its children of the same type.
MaybeTree mutate_shrink(const gp::Node& root, const OperatorContext& ctx, Rng& rng);

// Layer mutations.

/// Inserts a fresh single-input layer above a random LayerUnit node.
MaybeTree mutate_add_layer(const gp::Node& root, const OperatorContext& ctx, Rng& rng);

/// Splices out a random single-input layer. InputLayer is never removed, and
/// a learner is never left with a bare InputLayer as its network.
MaybeTree mutate_remove_layer(const gp::Node& root, const OperatorContext& ctx, Rng& rng);

/// Replaces a random single-input layer by a different single-input layer
/// kind with fresh parameters, over the same child.
MaybeTree mutate_swap_layer(const gp::Node& root, const OperatorContext& ctx, Rng& rng);

/// Resample exactly one constant of the named kind.
MaybeTree mutate_activation(const gp::Node& root, const OperatorContext& ctx, Rng& rng);
MaybeTree mutate_optimizer(const gp::Node& root, const OperatorContext& ctx, Rng& rng);
MaybeTree mutate_pretrained(const gp::Node& root, const OperatorContext& ctx, Rng& rng);

/// Explicit-choice forms of the layer mutations. `at` must address a node of
/// the kind the random form would pick; otherwise std::invalid_argument.
gp::Node add_layer_at(const gp::Node& root, const gp::Path& at, const gp::PrimitiveSpec& layer,
                      const OperatorContext& ctx, Rng& rng);
gp::Node remove_layer_at(const gp::Node& root, const gp::Path& at);
gp::Node swap_layer_at(const gp::Node& root, const gp::Path& at, const gp::PrimitiveSpec& layer,
                       const OperatorContext& ctx, Rng& rng);

/// Explicit-point crossovers; both paths must address LayerUnit nodes.
/// No depth check.
std::pair<gp::Node, gp::Node> crossover_at(const gp::Node& a, const gp::Path& pa, const gp::Node& b, const gp::Path& pb);
std::pair<gp::Node, gp::Node> crossover_preserving_at(const gp::Node& a, const gp::Path& pa, const gp::Node& b,
                                                      const gp::Path& pb, const gp::PrimitiveSet& pset);

/// Paths the random layer mutations choose from.
std::vector<gp::Path> layer_paths(const gp::Node& root);
std::vector<gp::Path> single_input_layer_paths(const gp::Node& root);
std::vector<gp::Path> removable_layer_paths(const gp::Node& root);

/// (type, field) slot of the node at `path`; field is None at the root.
gp::ParamField slot_field(const gp::Node& root, const gp::Path& path);

enum class OperatorId : std::uint8_t {
    Crossover,
    CrossoverEphemeral,
    HeadlessChicken,
    HeadlessChickenEphemeral,
    CrossoverPreserving,
    Insert,
    InsertModify,
    Ephemeral,
    Uniform,
    Shrink,
    SwapLayer,
    RemoveLayer,
    AddLayer,
    MutateActivation,
    MutateOptimizer,
    MutatePretrained,
};

inline constexpr std::size_t kOperatorCount = 16;

/// All operators in application order: mating first, then mutation.
inline constexpr std::array<OperatorId, kOperatorCount> kOperators = {
    OperatorId::Crossover,       OperatorId::CrossoverEphemeral, OperatorId::HeadlessChicken,
    OperatorId::HeadlessChickenEphemeral, OperatorId::CrossoverPreserving, OperatorId::Insert,
    OperatorId::InsertModify,    OperatorId::Ephemeral,          OperatorId::Uniform,
    OperatorId::Shrink,          OperatorId::SwapLayer,          OperatorId::RemoveLayer,
    OperatorId::AddLayer,        OperatorId::MutateActivation,   OperatorId::MutateOptimizer,
    OperatorId::MutatePretrained,
};

/// Config-file name, e.g. "headless_chicken_ephemeral".
std::string_view to_string(OperatorId op);
std::optional<OperatorId> operator_from_string(std::string_view name);
bool is_mating(OperatorId op);

/// Applies `op` to `self` (with `mate` for two-parent operators) and returns
/// the child derived from `self`.
MaybeTree apply_operator(OperatorId op, const gp::Node& self, const gp::Node& mate, const OperatorContext& ctx,
                         Rng& rng);

} // namespace neurotree::evolution
