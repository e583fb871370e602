#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace neurotree::gp {

/// Semantic types flowing along tree edges. Closed set, no subtyping.
enum class SemType : std::uint8_t {
    DataPair,
    LayerUnit,
    Int,
    Float,
    ActivationKind,
    OptimizerKind,
    PaddingKind,
    PretrainedKind,
    PredictionVector,
};

inline constexpr std::size_t kSemTypeCount = 9;

std::string_view to_string(SemType t);

enum class Activation : std::uint8_t { SeLU, ELU, Sigmoid, ReLU, LeakyReLU, Softmax, TanH };
enum class Optimizer : std::uint8_t { Adam, SGD, RMSprop, Adadelta, Adagrad, Adamax, Nadam, Ftrl };
enum class Padding : std::uint8_t { Same, Valid };
enum class Pretrained : std::uint8_t { Vgg, MobileNet, Inception };

inline constexpr std::array kActivations = {Activation::SeLU,      Activation::ELU,     Activation::Sigmoid, Activation::ReLU,
                                            Activation::LeakyReLU, Activation::Softmax, Activation::TanH};
inline constexpr std::array kOptimizers = {Optimizer::Adam,    Optimizer::SGD,    Optimizer::RMSprop, Optimizer::Adadelta,
                                           Optimizer::Adagrad, Optimizer::Adamax, Optimizer::Nadam,   Optimizer::Ftrl};
inline constexpr std::array kPaddings = {Padding::Same, Padding::Valid};
inline constexpr std::array kPretrained = {Pretrained::Vgg, Pretrained::MobileNet, Pretrained::Inception};

std::string_view to_string(Activation a);
std::string_view to_string(Optimizer o);
std::string_view to_string(Padding p);
std::string_view to_string(Pretrained p);

std::optional<Activation> activation_from_string(std::string_view name);
std::optional<Optimizer> optimizer_from_string(std::string_view name);
std::optional<Padding> padding_from_string(std::string_view name);
std::optional<Pretrained> pretrained_from_string(std::string_view name);

/// Value carried by an ephemeral terminal.
using Constant = std::variant<std::int64_t, double, Activation, Optimizer, Padding, Pretrained>;

/// SemType a constant inhabits.
SemType constant_type(const Constant& c);

/// Canonical literal text: integers in decimal, floats in shortest
/// round-trip form always containing '.' or an exponent, enums by name.
std::string render_constant(const Constant& c);

/// Hyper-parameter slot an argument fills; selects the sampling domain for
/// ephemerals generated into that slot.
enum class ParamField : std::uint8_t {
    None,
    Units,
    Kernel,
    Stride,
    PoolSize,
    WeightDecay,
    DropoutRate,
    BatchSize,
    Sigma,
    Bins,
    Threshold,
};

std::string_view to_string(ParamField f);

} // namespace neurotree::gp
