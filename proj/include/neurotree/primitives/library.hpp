#pragma once

#include "neurotree/data.hpp"
#include "neurotree/gp/tree.hpp"
#include "neurotree/primitives/layer_tree.hpp"

#include <optional>
#include <vector>

namespace neurotree::primitives {

/// Names of the fixed terminals and the learner root.
inline constexpr const char* kDataTerminal = "data";
inline constexpr const char* kInputLayer = "InputLayer";
inline constexpr const char* kLearner = "NNLearner";

/// The full search space: NNLearner root, every layer primitive, the
/// preprocessing primitives, and one ephemeral per constant type. The
/// ephemeral sampler draws from ephemeral_domains().
gp::PrimitiveSet standard_primitive_set();

/// Layer kind built by a LayerUnit-producing primitive; nullopt otherwise.
std::optional<LayerKind> layer_kind_of(const gp::PrimitiveSpec& spec);

/// Single-input layer primitives (every LayerUnit producer with exactly one
/// LayerUnit argument), in registration order.
std::vector<const gp::PrimitiveSpec*> single_input_layer_primitives(const gp::PrimitiveSet& pset);

/// `spec` applied to `child` with freshly sampled hyper-parameters.
gp::Node fresh_layer_node(const gp::PrimitiveSpec& spec, gp::Node child, const gp::PrimitiveSet& pset, Rng& rng);

/// Everything NNLearner needs after its arguments are evaluated.
struct LearnerSpec {
    DataPair data;
    LayerTree layers;
    gp::Optimizer optimizer = gp::Optimizer::Adam;
    int batch_size = 1;
};

/// Evaluates a LayerUnit subtree into a layer tree. Throws InvalidParams for
/// out-of-domain constants.
LayerTree build_layer_tree(const gp::Node& node);

/// Evaluates a DataPair subtree against the base dataset.
DataPair apply_preprocessing(const gp::Node& node, const DataPair& base);

/// Evaluates an NNLearner-rooted tree's arguments.
LearnerSpec interpret(const gp::Node& root, const DataPair& base);

} // namespace neurotree::primitives
