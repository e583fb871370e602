#pragma once

#include "neurotree/nn/ops.hpp"
#include "neurotree/nn/pretrained.hpp"
#include "neurotree/primitives/layer_tree.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurotree::nn {

class CompileError : public std::runtime_error {
public:
    CompileError(std::string path, std::string expected, std::string actual)
        : std::runtime_error("compile error at " + path + ": expected " + expected + ", got " + actual),
          path(std::move(path)),
          expected(std::move(expected)),
          actual(std::move(actual))
    {
    }
    std::string path;
    std::string expected;
    std::string actual;
};

class ShapeMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NonFiniteLoss : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-sample multiply-accumulate ceiling; networks above it are rejected at
/// compile time so oversized candidates fail deterministically.
inline constexpr std::size_t kDefaultMaxMacs = 2'000'000;

struct CompileOptions {
    std::uint64_t seed = 0;
    /// Null means every stub uses its fallback weights.
    const StubRegistry* stubs = nullptr;
    std::size_t max_macs = kDefaultMaxMacs;
};

template <typename T>
struct Snapshot {
    std::vector<Tensor<T>> parameters;
    std::vector<Tensor<T>> buffers;
};

/// Compiled execution plan. Step i reads activations by index (0 is the
/// network input, i + 1 is step i's output) and the last step emits logits.
template <typename T>
class Network {
public:
    struct Step {
        std::unique_ptr<Op<T>> op;
        std::vector<std::size_t> inputs;
    };

    Network(Shape input_shape, std::size_t n_classes, std::vector<Step> plan);
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    const Shape& input_shape() const { return input_shape_; }
    std::size_t n_classes() const { return n_classes_; }
    const std::vector<Step>& plan() const { return plan_; }

    Tensor<T> logits(const Tensor<T>& batch, Mode mode, Rng& rng);
    /// Row-wise softmax of the logits.
    Tensor<T> forward(const Tensor<T>& batch, Mode mode, Rng& rng);

    /// Mean cross-entropy plus sum of weight_decay * ||w||^2 over kernels.
    T loss(const Tensor<T>& batch, const std::vector<std::int32_t>& labels, Mode mode, Rng& rng);

    /// Training-mode forward + backward. Parameter grads are overwritten;
    /// `input_grad`, when given, receives d loss / d batch.
    T loss_and_gradients(const Tensor<T>& batch, const std::vector<std::int32_t>& labels, Rng& rng,
                         Tensor<T>* input_grad = nullptr);

    std::vector<Parameter<T>*> parameters();
    std::size_t param_count() const;
    std::size_t macs_per_sample() const;

    Snapshot<T> snapshot() const;
    void restore(const Snapshot<T>& snap);

private:
    void check_batch(const Tensor<T>& batch) const;
    void run_forward(const Tensor<T>& batch, Mode mode, Rng& rng);
    T data_loss(const std::vector<std::int32_t>& labels, Tensor<T>* dlogits) const;
    T l2_penalty() const;

    Shape input_shape_;
    std::size_t n_classes_;
    std::vector<Step> plan_;
    std::vector<Tensor<T>> acts_;
};

/// Builds a network from a layer tree: shape-checks every edge, flattens
/// before Dense layers fed spatial tensors, and appends a Dense(n_classes)
/// logit head unless the root already is a Dense layer of that width (a
/// softmax activation there is folded into the loss; any other activation
/// is kept). Weights use Glorot-uniform init drawn from `options.seed`.
template <typename T>
Network<T> compile(const primitives::LayerTree& layers, const Shape& input_shape, std::size_t n_classes,
                   const CompileOptions& options = {});

/// Row-wise softmax over the last axis.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

} // namespace neurotree::nn
