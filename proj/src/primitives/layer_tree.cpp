#include "neurotree/primitives/layer_tree.hpp"

#include <cmath>

namespace neurotree::primitives {

std::string_view to_string(LayerKind kind)
{
    switch (kind) {
    case LayerKind::Input: return "Input";
    case LayerKind::Dense: return "Dense";
    case LayerKind::Conv2D: return "Conv2D";
    case LayerKind::Dropout: return "Dropout";
    case LayerKind::BatchNorm: return "BatchNorm";
    case LayerKind::MaxPool2D: return "MaxPool2D";
    case LayerKind::GlobalMaxPool: return "GlobalMaxPool";
    case LayerKind::GlobalAvgPool: return "GlobalAvgPool";
    case LayerKind::Concatenate: return "Concatenate";
    case LayerKind::PretrainedStub: return "PretrainedStub";
    }
    return "?";
}

std::size_t layer_arity(LayerKind kind)
{
    switch (kind) {
    case LayerKind::Input: return 0;
    case LayerKind::Concatenate: return 2;
    default: return 1;
    }
}

namespace {

struct Required {
    bool output_dim = false;
    bool activation = false;
    bool weight_decay = false;
    bool kernel_dim = false;
    bool stride = false;
    bool padding = false;
    bool dropout_rate = false;
    bool pretrained = false;
};

Required required_fields(LayerKind kind)
{
    Required r;
    switch (kind) {
    case LayerKind::Dense:
        r.output_dim = r.activation = r.weight_decay = true;
        break;
    case LayerKind::Conv2D:
        r.output_dim = r.activation = r.weight_decay = r.kernel_dim = r.stride = r.padding = true;
        break;
    case LayerKind::Dropout:
        r.dropout_rate = true;
        break;
    case LayerKind::MaxPool2D:
        r.kernel_dim = r.stride = r.padding = true;
        break;
    case LayerKind::PretrainedStub:
        r.pretrained = true;
        break;
    default: break;
    }
    return r;
}

template <typename T>
void presence(LayerKind kind, const char* field, const std::optional<T>& value, bool required)
{
    if (required && !value) {
        throw InvalidParams(kind, field, "missing");
    }
    if (!required && value) {
        throw InvalidParams(kind, field, "not applicable");
    }
}

} // namespace

void validate_params(LayerKind kind, const LayerParams& p)
{
    const Required r = required_fields(kind);
    presence(kind, "output_dim", p.output_dim, r.output_dim);
    presence(kind, "activation", p.activation, r.activation);
    presence(kind, "weight_decay", p.weight_decay, r.weight_decay);
    presence(kind, "kernel_dim", p.kernel_dim, r.kernel_dim);
    presence(kind, "stride", p.stride, r.stride);
    presence(kind, "padding", p.padding, r.padding);
    presence(kind, "dropout_rate", p.dropout_rate, r.dropout_rate);
    presence(kind, "pretrained", p.pretrained, r.pretrained);

    if (p.output_dim && *p.output_dim < 1) {
        throw InvalidParams(kind, "output_dim", "must be >= 1, got " + std::to_string(*p.output_dim));
    }
    if (p.weight_decay && !(*p.weight_decay >= 0.0 && std::isfinite(*p.weight_decay))) {
        throw InvalidParams(kind, "weight_decay", "must be finite and >= 0");
    }
    if (p.kernel_dim && *p.kernel_dim < 1) {
        throw InvalidParams(kind, "kernel_dim", "must be >= 1, got " + std::to_string(*p.kernel_dim));
    }
    if (p.stride && *p.stride < 1) {
        throw InvalidParams(kind, "stride", "must be >= 1, got " + std::to_string(*p.stride));
    }
    if (p.dropout_rate && !(*p.dropout_rate >= 0.0 && *p.dropout_rate < 1.0)) {
        throw InvalidParams(kind, "dropout_rate", "must lie in [0, 1)");
    }
}

LayerTree input_tree()
{
    LayerTree t;
    t.nodes.push_back(LayerDescriptor{LayerKind::Input, {}, {}});
    return t;
}

namespace {

void append_shifted(std::vector<LayerDescriptor>& out, const LayerTree& tree, std::size_t offset)
{
    for (const auto& d : tree.nodes) {
        LayerDescriptor copy = d;
        for (auto& c : copy.child_indices) {
            c += offset;
        }
        out.push_back(std::move(copy));
    }
}

void require_valid(const LayerTree& t)
{
    std::string why;
    if (!is_valid_layer_tree(t, &why)) {
        throw std::invalid_argument("invalid LayerTree: " + why);
    }
}

} // namespace

LayerTree layer_primitive_apply(LayerKind kind, const LayerTree& input, const LayerParams& params)
{
    if (layer_arity(kind) != 1) {
        throw std::invalid_argument(std::string(to_string(kind)) + " is not a single-input layer");
    }
    require_valid(input);
    validate_params(kind, params);
    LayerTree out;
    out.nodes.reserve(input.size() + 1);
    out.nodes.push_back(LayerDescriptor{kind, params, {1}});
    append_shifted(out.nodes, input, 1);
    return out;
}

LayerTree concat_apply(const LayerTree& left, const LayerTree& right)
{
    require_valid(left);
    require_valid(right);
    LayerTree out;
    out.nodes.reserve(left.size() + right.size() + 1);
    out.nodes.push_back(LayerDescriptor{LayerKind::Concatenate, {}, {1, 1 + left.size()}});
    append_shifted(out.nodes, left, 1);
    append_shifted(out.nodes, right, 1 + left.size());
    return out;
}

namespace {

bool walk(const LayerTree& t, std::size_t idx, std::size_t& expected_next, std::string* why)
{
    if (idx != expected_next) {
        if (why) {
            *why = "node " + std::to_string(idx) + " visited out of pre-order (expected " +
                   std::to_string(expected_next) + ")";
        }
        return false;
    }
    ++expected_next;
    const auto& d = t.nodes[idx];
    if (d.child_indices.size() != layer_arity(d.kind)) {
        if (why) {
            *why = std::string(to_string(d.kind)) + " at " + std::to_string(idx) + " has " +
                   std::to_string(d.child_indices.size()) + " children";
        }
        return false;
    }
    for (auto c : d.child_indices) {
        if (c >= t.nodes.size()) {
            if (why) {
                *why = "child index " + std::to_string(c) + " out of range";
            }
            return false;
        }
        if (!walk(t, c, expected_next, why)) {
            return false;
        }
    }
    return true;
}

} // namespace

bool is_valid_layer_tree(const LayerTree& tree, std::string* why)
{
    if (tree.nodes.empty()) {
        if (why) {
            *why = "empty tree";
        }
        return false;
    }
    if (tree.root_index != 0) {
        if (why) {
            *why = "root must be the first pre-order entry";
        }
        return false;
    }
    std::size_t next = 0;
    if (!walk(tree, 0, next, why)) {
        return false;
    }
    if (next != tree.nodes.size()) {
        if (why) {
            *why = "unreachable nodes";
        }
        return false;
    }
    return true;
}

} // namespace neurotree::primitives
