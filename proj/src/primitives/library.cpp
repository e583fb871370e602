#include "neurotree/primitives/library.hpp"

#include "neurotree/preprocess/transforms.hpp"
#include "neurotree/primitives/domains.hpp"

#include <limits>
#include <stdexcept>
#include <string_view>

namespace neurotree::primitives {

using gp::Node;
using gp::ParamField;
using gp::PrimitiveKind;
using gp::PrimitiveSpec;
using gp::SemType;

namespace {

struct LayerPrimitive {
    const char* name;
    LayerKind kind;
};

constexpr LayerPrimitive kLayerPrimitives[] = {
    {"InputLayer", LayerKind::Input},
    {"DenseLayer", LayerKind::Dense},
    {"Conv2DLayer", LayerKind::Conv2D},
    {"DropoutLayer", LayerKind::Dropout},
    {"BatchNormLayer", LayerKind::BatchNorm},
    {"MaxPoolLayer", LayerKind::MaxPool2D},
    {"GlobalMaxPoolLayer", LayerKind::GlobalMaxPool},
    {"GlobalAvgPoolLayer", LayerKind::GlobalAvgPool},
    {"ConcatenateLayer", LayerKind::Concatenate},
    {"PretrainedStub", LayerKind::PretrainedStub},
};

PrimitiveSpec spec(std::string name, std::vector<SemType> in, std::vector<ParamField> fields, SemType out,
                   PrimitiveKind kind)
{
    PrimitiveSpec s;
    s.name = std::move(name);
    s.input_types = std::move(in);
    s.input_fields = std::move(fields);
    s.output_type = out;
    s.kind = kind;
    return s;
}

template <typename T>
T constant_as(const Node& n, const char* what)
{
    if (!n.value) {
        throw std::invalid_argument(std::string(what) + " must be a constant");
    }
    const auto* v = std::get_if<T>(&*n.value);
    if (v == nullptr) {
        throw std::invalid_argument(std::string(what) + " has the wrong constant type");
    }
    return *v;
}

std::int64_t int_arg(const Node& n, std::size_t i) { return constant_as<std::int64_t>(n.children.at(i), "int argument"); }
double float_arg(const Node& n, std::size_t i) { return constant_as<double>(n.children.at(i), "float argument"); }

int checked_int(std::int64_t v, const char* what, std::int64_t lo)
{
    if (v < lo || v > std::numeric_limits<int>::max()) {
        throw std::invalid_argument(std::string(what) + " must be >= " + std::to_string(lo) + ", got " +
                                    std::to_string(v));
    }
    return static_cast<int>(v);
}

} // namespace

gp::PrimitiveSet standard_primitive_set()
{
    using enum SemType;
    gp::PrimitiveSet ps;
    const SemType L = LayerUnit;

    ps.add(spec(kLearner, {DataPair, L, OptimizerKind, Int}, {ParamField::None, ParamField::None, ParamField::None, ParamField::BatchSize},
                PredictionVector, PrimitiveKind::Learner));

    ps.add_terminal(kInputLayer, L, PrimitiveKind::Layer, true);
    ps.add(spec("DenseLayer", {L, Int, ActivationKind, Float},
                {ParamField::None, ParamField::Units, ParamField::None, ParamField::WeightDecay}, L, PrimitiveKind::Layer));
    ps.add(spec("Conv2DLayer", {L, Int, Int, Int, PaddingKind, ActivationKind, Float},
                {ParamField::None, ParamField::Units, ParamField::Kernel, ParamField::Stride, ParamField::None,
                 ParamField::None, ParamField::WeightDecay},
                L, PrimitiveKind::Layer));
    ps.add(spec("DropoutLayer", {L, Float}, {ParamField::None, ParamField::DropoutRate}, L, PrimitiveKind::Layer));
    ps.add(spec("BatchNormLayer", {L}, {}, L, PrimitiveKind::Layer));
    ps.add(spec("MaxPoolLayer", {L, Int, PaddingKind}, {ParamField::None, ParamField::PoolSize, ParamField::None}, L,
                PrimitiveKind::Layer));
    ps.add(spec("GlobalMaxPoolLayer", {L}, {}, L, PrimitiveKind::Layer));
    ps.add(spec("GlobalAvgPoolLayer", {L}, {}, L, PrimitiveKind::Layer));
    ps.add(spec("ConcatenateLayer", {L, L}, {}, L, PrimitiveKind::Layer));
    ps.add(spec("PretrainedStub", {L, PretrainedKind}, {}, L, PrimitiveKind::Layer));

    ps.add_terminal(kDataTerminal, DataPair, PrimitiveKind::Preprocess, false);
    for (const char* name : {"CosineWindow", "Grayscale", "Normalize", "SobelEdges", "FourierMagnitude", "DctTransform"}) {
        ps.add(spec(name, {DataPair}, {}, DataPair, PrimitiveKind::Preprocess));
    }
    ps.add(spec("GaussianBlur", {DataPair, Float}, {ParamField::None, ParamField::Sigma}, DataPair,
                PrimitiveKind::Preprocess));
    ps.add(spec("IntensityHistogram", {DataPair, Int}, {ParamField::None, ParamField::Bins}, DataPair,
                PrimitiveKind::Preprocess));
    ps.add(spec("Threshold", {DataPair, Float}, {ParamField::None, ParamField::Threshold}, DataPair,
                PrimitiveKind::Preprocess));

    for (auto t : {Int, Float, ActivationKind, OptimizerKind, PaddingKind, PretrainedKind}) {
        ps.add_ephemeral(t);
    }
    ps.set_sampler(sample_constant);
    return ps;
}

std::optional<LayerKind> layer_kind_of(const PrimitiveSpec& spec)
{
    if (spec.output_type != SemType::LayerUnit) {
        return std::nullopt;
    }
    for (const auto& lp : kLayerPrimitives) {
        if (spec.name == lp.name) {
            return lp.kind;
        }
    }
    return std::nullopt;
}

std::vector<const PrimitiveSpec*> single_input_layer_primitives(const gp::PrimitiveSet& pset)
{
    std::vector<const PrimitiveSpec*> out;
    for (const auto* p : pset.producers(SemType::LayerUnit)) {
        std::size_t layer_inputs = 0;
        for (auto t : p->input_types) {
            layer_inputs += t == SemType::LayerUnit ? 1 : 0;
        }
        if (layer_inputs == 1) {
            out.push_back(p);
        }
    }
    return out;
}

Node fresh_layer_node(const PrimitiveSpec& spec, Node child, const gp::PrimitiveSet& pset, Rng& rng)
{
    std::vector<Node> children;
    children.reserve(spec.arity());
    bool placed = false;
    for (std::size_t i = 0; i < spec.arity(); ++i) {
        const SemType t = spec.input_types[i];
        if (t == SemType::LayerUnit && !placed) {
            children.push_back(std::move(child));
            placed = true;
            continue;
        }
        const PrimitiveSpec* eph = pset.ephemeral(t);
        if (eph == nullptr) {
            throw std::invalid_argument("no ephemeral for argument " + std::to_string(i) + " of " + spec.name);
        }
        children.push_back(gp::make_constant(*eph, pset.sample(t, spec.input_fields[i], rng)));
    }
    if (!placed) {
        throw std::invalid_argument(spec.name + " takes no LayerUnit input");
    }
    return gp::make_node(spec, std::move(children));
}

LayerTree build_layer_tree(const Node& node)
{
    const auto kind = layer_kind_of(*node.primitive);
    if (!kind) {
        throw std::invalid_argument(node.primitive->name + " does not build a layer");
    }
    if (*kind == LayerKind::Input) {
        return input_tree();
    }
    if (*kind == LayerKind::Concatenate) {
        return concat_apply(build_layer_tree(node.children.at(0)), build_layer_tree(node.children.at(1)));
    }
    LayerParams p;
    switch (*kind) {
    case LayerKind::Dense:
        p.output_dim = int_arg(node, 1);
        p.activation = constant_as<gp::Activation>(node.children.at(2), "activation");
        p.weight_decay = float_arg(node, 3);
        break;
    case LayerKind::Conv2D:
        p.output_dim = int_arg(node, 1);
        p.kernel_dim = int_arg(node, 2);
        p.stride = int_arg(node, 3);
        p.padding = constant_as<gp::Padding>(node.children.at(4), "padding");
        p.activation = constant_as<gp::Activation>(node.children.at(5), "activation");
        p.weight_decay = float_arg(node, 6);
        break;
    case LayerKind::Dropout: p.dropout_rate = float_arg(node, 1); break;
    case LayerKind::MaxPool2D:
        p.kernel_dim = int_arg(node, 1);
        p.stride = p.kernel_dim;
        p.padding = constant_as<gp::Padding>(node.children.at(2), "padding");
        break;
    case LayerKind::PretrainedStub: p.pretrained = constant_as<gp::Pretrained>(node.children.at(1), "stub"); break;
    default: break;
    }
    return layer_primitive_apply(*kind, build_layer_tree(node.children.at(0)), p);
}

DataPair apply_preprocessing(const Node& node, const DataPair& base)
{
    const std::string& name = node.primitive->name;
    if (name == kDataTerminal) {
        return base;
    }
    const DataPair in = apply_preprocessing(node.children.at(0), base);
    if (name == "CosineWindow") {
        return preprocess::cosine_window(in);
    }
    if (name == "Grayscale") {
        return preprocess::grayscale(in);
    }
    if (name == "Normalize") {
        return preprocess::normalize_fit_apply(in);
    }
    if (name == "SobelEdges") {
        return preprocess::sobel_edges(in);
    }
    if (name == "FourierMagnitude") {
        return preprocess::fourier_magnitude(in);
    }
    if (name == "DctTransform") {
        return preprocess::dct_transform(in);
    }
    if (name == "GaussianBlur") {
        return preprocess::gaussian_blur(in, float_arg(node, 1));
    }
    if (name == "IntensityHistogram") {
        return preprocess::intensity_histogram(in, checked_int(int_arg(node, 1), "bins", 2));
    }
    if (name == "Threshold") {
        return preprocess::threshold_binarize(in, float_arg(node, 1));
    }
    throw std::invalid_argument(name + " is not a preprocessing primitive");
}

LearnerSpec interpret(const Node& root, const DataPair& base)
{
    if (root.primitive->name != kLearner) {
        throw std::invalid_argument("root must be " + std::string(kLearner) + ", got " + root.primitive->name);
    }
    LearnerSpec s;
    s.data = apply_preprocessing(root.children.at(0), base);
    s.layers = build_layer_tree(root.children.at(1));
    s.optimizer = constant_as<gp::Optimizer>(root.children.at(2), "optimizer");
    s.batch_size = checked_int(int_arg(root, 3), "batch size", 1);
    return s;
}

} // namespace neurotree::primitives
