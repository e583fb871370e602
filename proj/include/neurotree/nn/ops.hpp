#pragma once

#include "neurotree/gp/types.hpp"
#include "neurotree/nn/tensor.hpp"
#include "neurotree/rng.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace neurotree::nn {

enum class Mode : std::uint8_t { Train, Infer };

template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    /// L2 coefficient; the penalty is weight_decay * sum(w^2).
    double weight_decay = 0.0;
};

/// One node of a compiled execution plan. Ops keep whatever they need from
/// the last forward pass (masks, argmax, normalized inputs) for backward, so
/// an op instance belongs to exactly one network and one thread.
template <typename T>
class Op {
public:
    using Inputs = std::span<const Tensor<T>* const>;
    using Grads = std::span<Tensor<T>* const>;

    virtual ~Op() = default;

    virtual std::string name() const = 0;
    /// Per-sample output shape.
    virtual Shape output_shape() const = 0;
    virtual void forward(Inputs in, Tensor<T>& out, Mode mode, Rng& rng) = 0;
    /// Accumulates (+=) into parameter grads and into every non-null din.
    virtual void backward(Inputs in, const Tensor<T>& out, const Tensor<T>& dout, Grads din) = 0;
    virtual std::vector<Parameter<T>*> parameters() { return {}; }
    /// Non-trainable state that must follow the weights through snapshot/restore.
    virtual std::vector<Tensor<T>*> buffers() { return {}; }
    virtual std::size_t macs_per_sample() const { return 0; }
    virtual std::unique_ptr<Op> clone() const = 0;
};

template <typename T>
class FlattenOp final : public Op<T> {
public:
    explicit FlattenOp(Shape in) : in_(std::move(in)) {}
    std::string name() const override { return "Flatten"; }
    Shape output_shape() const override { return {product(in_)}; }
    void forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&) override;
    void backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout, typename Op<T>::Grads din) override;
    std::unique_ptr<Op<T>> clone() const override { return std::make_unique<FlattenOp>(*this); }

private:
    Shape in_;
};

template <typename T>
class DenseOp final : public Op<T> {
public:
    DenseOp(std::size_t in_features, std::size_t units, double weight_decay);
    std::string name() const override { return "Dense"; }
    Shape output_shape() const override { return {units_}; }
    void forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&) override;
    void backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout, typename Op<T>::Grads din) override;
    std::vector<Parameter<T>*> parameters() override { return {&kernel_, &bias_}; }
    std::size_t macs_per_sample() const override { return in_ * units_; }
    std::unique_ptr<Op<T>> clone() const override { return std::make_unique<DenseOp>(*this); }

    Parameter<T>& kernel() { return kernel_; }
    Parameter<T>& bias() { return bias_; }

private:
    std::size_t in_;
    std::size_t units_;
    Parameter<T> kernel_;
    Parameter<T> bias_;
};

struct ConvGeometry {
    std::size_t in_h, in_w, in_c;
    std::size_t out_h, out_w;
    std::size_t kernel, stride;
    std::size_t pad_top, pad_left;
};

/// Output geometry under TensorFlow-style padding: Same gives ceil(n/s) with
/// the extra pad at the bottom/right; Valid gives floor((n-k)/s)+1. Returns
/// false when Valid does not fit.
bool conv_geometry(std::size_t in_h, std::size_t in_w, std::size_t in_c, std::size_t kernel, std::size_t stride,
                   gp::Padding padding, ConvGeometry& out);

template <typename T>
class Conv2DOp final : public Op<T> {
public:
    Conv2DOp(ConvGeometry g, std::size_t filters, double weight_decay);
    std::string name() const override { return "Conv2D"; }
    Shape output_shape() const override { return {g_.out_h, g_.out_w, filters_}; }
    void forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&) override;
    void backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout, typename Op<T>::Grads din) override;
    std::vector<Parameter<T>*> parameters() override { return {&kernel_, &bias_}; }
    std::size_t macs_per_sample() const override
    {
        return g_.out_h * g_.out_w * filters_ * g_.kernel * g_.kernel * g_.in_c;
    }
    std::unique_ptr<Op<T>> clone() const override { return std::make_unique<Conv2DOp>(*this); }

    Parameter<T>& kernel() { return kernel_; }
    Parameter<T>& bias() { return bias_; }

private:
    ConvGeometry g_;
    std::size_t filters_;
    Parameter<T> kernel_; // [k, k, in_c, filters]
    Parameter<T> bias_;
};

template <typename T>
class ActivationOp final : public Op<T> {
public:
    ActivationOp(gp::Activation kind, Shape shape) : kind_(kind), shape_(std::move(shape)) {}
    std::string name() const override { return "Activation(" + std::string(gp::to_string(kind_)) + ")"; }
    Shape output_shape() const override { return shape_; }
    void forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&) override;
    void backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout, typename Op<T>::Grads din) override;
    std::unique_ptr<Op<T>> clone() const override { return std::make_unique<ActivationOp>(*this); }

private:
    gp::Activation kind_;
    Shape shape_;
};

/// Inverted dropout: kept units are scaled by 1/(1-rate) in training;
/// inference is the identity.
template <typename T>
class DropoutOp final : public Op<T> {
public:
    DropoutOp(double rate, Shape shape) : rate_(rate), shape_(std::move(shape)) {}
    std::string name() const override { return "Dropout"; }
    Shape output_shape() const override { return shape_; }
    void forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode mode, Rng& rng) override;
    void backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout, typename Op<T>::Grads din) override;
    std::unique_ptr<Op<T>> clone() const override { return std::make_unique<DropoutOp>(*this); }

private:
    double rate_;
    Shape shape_;
    std::vector<T> mask_;
    bool masked_ = false;
};

/// Normalizes over every axis but the last (channels / features).
template <typename T>
class BatchNormOp final : public Op<T> {
public:
    static constexpr double kEpsilon = 1e-3;
    static constexpr double kMomentum = 0.9;

    explicit BatchNormOp(Shape shape);
    std::string name() const override { return "BatchNorm"; }
    Shape output_shape() const override { return shape_; }
    void forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode mode, Rng&) override;
    void backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout, typename Op<T>::Grads din) override;
    std::vector<Parameter<T>*> parameters() override { return {&gamma_, &beta_}; }
    std::vector<Tensor<T>*> buffers() override { return {&running_mean_, &running_var_}; }
    std::unique_ptr<Op<T>> clone() const override { return std::make_unique<BatchNormOp>(*this); }

private:
    Shape shape_;
    std::size_t channels_;
    Parameter<T> gamma_;
    Parameter<T> beta_;
    Tensor<T> running_mean_;
    Tensor<T> running_var_;
    std::vector<T> xhat_;
    std::vector<T> inv_std_;
    Mode last_mode_ = Mode::Infer;
};

template <typename T>
class MaxPool2DOp final : public Op<T> {
public:
    explicit MaxPool2DOp(ConvGeometry g) : g_(g) {}
    std::string name() const override { return "MaxPool2D"; }
    Shape output_shape() const override { return {g_.out_h, g_.out_w, g_.in_c}; }
    void forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&) override;
    void backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout, typename Op<T>::Grads din) override;
    std::size_t macs_per_sample() const override { return g_.out_h * g_.out_w * g_.in_c * g_.kernel * g_.kernel; }
    std::unique_ptr<Op<T>> clone() const override { return std::make_unique<MaxPool2DOp>(*this); }

private:
    ConvGeometry g_;
    std::vector<std::size_t> argmax_;
};

template <typename T>
class GlobalPoolOp final : public Op<T> {
public:
    GlobalPoolOp(bool use_max, Shape in) : max_(use_max), in_(std::move(in)) {}
    std::string name() const override { return max_ ? "GlobalMaxPool" : "GlobalAvgPool"; }
    Shape output_shape() const override { return {in_[2]}; }
    void forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&) override;
    void backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout, typename Op<T>::Grads din) override;
    std::unique_ptr<Op<T>> clone() const override { return std::make_unique<GlobalPoolOp>(*this); }

private:
    bool max_;
    Shape in_;
    std::vector<std::size_t> argmax_;
};

/// Channel-wise concatenation when both inputs are spatial with equal H and
/// W; otherwise both are flattened and joined feature-wise.
template <typename T>
class ConcatOp final : public Op<T> {
public:
    ConcatOp(Shape left, Shape right);
    std::string name() const override { return "Concatenate"; }
    Shape output_shape() const override { return out_; }
    void forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&) override;
    void backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout, typename Op<T>::Grads din) override;
    std::unique_ptr<Op<T>> clone() const override { return std::make_unique<ConcatOp>(*this); }

private:
    Shape left_;
    Shape right_;
    Shape out_;
    std::size_t rows_;    // positions sharing a channel vector (H*W, or 1 when flat)
    std::size_t left_w_;  // per-row width contributed by the left input
    std::size_t right_w_;
};

} // namespace neurotree::nn
