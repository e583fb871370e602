#pragma once

#include "neurotree/gp/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurotree::primitives {

using gp::Activation;
using gp::Optimizer;
using gp::Padding;
using gp::Pretrained;

enum class LayerKind : std::uint8_t {
    Input,
    Dense,
    Conv2D,
    Dropout,
    BatchNorm,
    MaxPool2D,
    GlobalMaxPool,
    GlobalAvgPool,
    Concatenate,
    PretrainedStub,
};

std::string_view to_string(LayerKind kind);
/// 0 for Input, 2 for Concatenate, 1 otherwise.
std::size_t layer_arity(LayerKind kind);

/// Hyper-parameters of one layer; fields that do not apply to the layer's
/// kind stay empty.
struct LayerParams {
    std::optional<std::int64_t> output_dim;
    std::optional<Activation> activation;
    std::optional<double> weight_decay;
    std::optional<std::int64_t> kernel_dim;
    std::optional<std::int64_t> stride;
    std::optional<Padding> padding;
    std::optional<double> dropout_rate;
    std::optional<Pretrained> pretrained;

    bool operator==(const LayerParams&) const = default;
};

struct LayerDescriptor {
    LayerKind kind = LayerKind::Input;
    LayerParams params;
    std::vector<std::size_t> child_indices;

    bool operator==(const LayerDescriptor&) const = default;
};

/// Pre-ordered list of layer descriptors. Index 0 is the root (the network
/// output); children appear after their parent, left subtree first.
struct LayerTree {
    std::vector<LayerDescriptor> nodes;
    std::size_t root_index = 0;

    std::size_t size() const { return nodes.size(); }
    const LayerDescriptor& root() const { return nodes.at(root_index); }

    bool operator==(const LayerTree&) const = default;
};

class InvalidParams : public std::invalid_argument {
public:
    InvalidParams(LayerKind kind, std::string field, const std::string& detail)
        : std::invalid_argument("invalid " + std::string(to_string(kind)) + "." + field + ": " + detail),
          kind(kind),
          field(std::move(field))
    {
    }
    LayerKind kind;
    std::string field;
};

/// Throws InvalidParams when a required field is missing or out of domain,
/// or when a field irrelevant to `kind` is set.
void validate_params(LayerKind kind, const LayerParams& params);

/// Single-Input tree.
LayerTree input_tree();

/// New tree whose root is a `kind` layer over `input`'s root. `input` is
/// left untouched; node count grows by one.
LayerTree layer_primitive_apply(LayerKind kind, const LayerTree& input, const LayerParams& params);

/// New Concatenate root over both trees: [Concat, pre-order(left), pre-order(right)].
LayerTree concat_apply(const LayerTree& left, const LayerTree& right);

/// Checks arity per kind, that every non-root node has exactly one parent,
/// and that node order is a pre-order traversal from the root.
bool is_valid_layer_tree(const LayerTree& tree, std::string* why = nullptr);

} // namespace neurotree::primitives
