#include "neurotree/gp/types.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace neurotree::gp {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view name, const std::array<Enum, N>& values)
{
    for (auto v : values) {
        if (to_string(v) == name) {
            return v;
        }
    }
    return std::nullopt;
}

} // namespace

std::string_view to_string(SemType t)
{
    switch (t) {
    case SemType::DataPair: return "DataPair";
    case SemType::LayerUnit: return "LayerUnit";
    case SemType::Int: return "Int";
    case SemType::Float: return "Float";
    case SemType::ActivationKind: return "ActivationKind";
    case SemType::OptimizerKind: return "OptimizerKind";
    case SemType::PaddingKind: return "PaddingKind";
    case SemType::PretrainedKind: return "PretrainedKind";
    case SemType::PredictionVector: return "PredictionVector";
    }
    return "?";
}

std::string_view to_string(Activation a)
{
    switch (a) {
    case Activation::SeLU: return "selu";
    case Activation::ELU: return "elu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::ReLU: return "relu";
    case Activation::LeakyReLU: return "leaky_relu";
    case Activation::Softmax: return "softmax";
    case Activation::TanH: return "tanh";
    }
    return "?";
}

std::string_view to_string(Optimizer o)
{
    switch (o) {
    case Optimizer::Adam: return "adam";
    case Optimizer::SGD: return "sgd";
    case Optimizer::RMSprop: return "rmsprop";
    case Optimizer::Adadelta: return "adadelta";
    case Optimizer::Adagrad: return "adagrad";
    case Optimizer::Adamax: return "adamax";
    case Optimizer::Nadam: return "nadam";
    case Optimizer::Ftrl: return "ftrl";
    }
    return "?";
}

std::string_view to_string(Padding p) { return p == Padding::Same ? "same" : "valid"; }

std::string_view to_string(Pretrained p)
{
    switch (p) {
    case Pretrained::Vgg: return "vgg_stub";
    case Pretrained::MobileNet: return "mobilenet_stub";
    case Pretrained::Inception: return "inception_stub";
    }
    return "?";
}

std::optional<Activation> activation_from_string(std::string_view name) { return lookup(name, kActivations); }
std::optional<Optimizer> optimizer_from_string(std::string_view name) { return lookup(name, kOptimizers); }
std::optional<Padding> padding_from_string(std::string_view name) { return lookup(name, kPaddings); }
std::optional<Pretrained> pretrained_from_string(std::string_view name) { return lookup(name, kPretrained); }

SemType constant_type(const Constant& c)
{
    switch (c.index()) {
    case 0: return SemType::Int;
    case 1: return SemType::Float;
    case 2: return SemType::ActivationKind;
    case 3: return SemType::OptimizerKind;
    case 4: return SemType::PaddingKind;
    default: return SemType::PretrainedKind;
    }
}

std::string render_constant(const Constant& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::int64_t>) {
                return std::to_string(v);
            } else if constexpr (std::is_same_v<V, double>) {
                if (!std::isfinite(v)) {
                    throw std::invalid_argument("non-finite float constant");
                }
                char buf[64];
                auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
                std::string text(buf, end);
                if (text.find_first_of(".e") == std::string::npos) {
                    text += ".0";
                }
                return text;
            } else {
                return std::string(to_string(v));
            }
        },
        c);
}

std::string_view to_string(ParamField f)
{
    switch (f) {
    case ParamField::None: return "none";
    case ParamField::Units: return "units";
    case ParamField::Kernel: return "kernel";
    case ParamField::Stride: return "stride";
    case ParamField::PoolSize: return "pool_size";
    case ParamField::WeightDecay: return "weight_decay";
    case ParamField::DropoutRate: return "dropout_rate";
    case ParamField::BatchSize: return "batch_size";
    case ParamField::Sigma: return "sigma";
    case ParamField::Bins: return "bins";
    case ParamField::Threshold: return "threshold";
    }
    return "?";
}

} // namespace neurotree::gp
