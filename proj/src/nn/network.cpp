#include "neurotree/nn/network.hpp"

#include <cmath>
#include <limits>

namespace neurotree::nn {

using primitives::LayerDescriptor;
using primitives::LayerKind;
using primitives::LayerTree;

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits)
{
    Tensor<T> out(logits.dims);
    const std::size_t width = logits.dims.back();
    const std::size_t rows = logits.size() / width;
    for (std::size_t r = 0; r < rows; ++r) {
        const T* x = logits.data() + r * width;
        T* y = out.data() + r * width;
        const T mx = *std::max_element(x, x + width);
        T sum{0};
        for (std::size_t j = 0; j < width; ++j) {
            y[j] = std::exp(x[j] - mx);
            sum += y[j];
        }
        for (std::size_t j = 0; j < width; ++j) {
            y[j] /= sum;
        }
    }
    return out;
}

template <typename T>
Network<T>::Network(Shape input_shape, std::size_t n_classes, std::vector<Step> plan)
    : input_shape_(std::move(input_shape)), n_classes_(n_classes), plan_(std::move(plan))
{
}

template <typename T>
Network<T>::Network(const Network& other) : input_shape_(other.input_shape_), n_classes_(other.n_classes_)
{
    plan_.reserve(other.plan_.size());
    for (const auto& s : other.plan_) {
        plan_.push_back(Step{s.op->clone(), s.inputs});
    }
}

template <typename T>
Network<T>& Network<T>::operator=(const Network& other)
{
    if (this != &other) {
        Network copy(other);
        *this = std::move(copy);
    }
    return *this;
}

template <typename T>
void Network<T>::check_batch(const Tensor<T>& batch) const
{
    if (batch.sample_shape() != input_shape_) {
        throw ShapeMismatch("batch sample shape " + to_string(batch.sample_shape()) + " does not match network input " +
                            to_string(input_shape_));
    }
}

template <typename T>
void Network<T>::run_forward(const Tensor<T>& batch, Mode mode, Rng& rng)
{
    check_batch(batch);
    acts_.resize(plan_.size() + 1);
    acts_[0] = batch;
    std::vector<const Tensor<T>*> ins;
    for (std::size_t i = 0; i < plan_.size(); ++i) {
        ins.clear();
        for (auto idx : plan_[i].inputs) {
            ins.push_back(&acts_[idx]);
        }
        plan_[i].op->forward(ins, acts_[i + 1], mode, rng);
    }
}

template <typename T>
Tensor<T> Network<T>::logits(const Tensor<T>& batch, Mode mode, Rng& rng)
{
    run_forward(batch, mode, rng);
    return acts_.back();
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& batch, Mode mode, Rng& rng)
{
    return softmax(logits(batch, mode, rng));
}

template <typename T>
T Network<T>::data_loss(const std::vector<std::int32_t>& labels, Tensor<T>* dlogits) const
{
    const Tensor<T>& z = acts_.back();
    const std::size_t n = z.batch();
    const std::size_t k = n_classes_;
    if (labels.size() != n) {
        throw ShapeMismatch("label count " + std::to_string(labels.size()) + " does not match batch " +
                            std::to_string(n));
    }
    if (dlogits) {
        dlogits->dims = z.dims;
        dlogits->values.assign(z.size(), T(0));
    }
    T total{0};
    for (std::size_t r = 0; r < n; ++r) {
        const auto label = labels[r];
        if (label < 0 || static_cast<std::size_t>(label) >= k) {
            throw std::out_of_range("label " + std::to_string(label) + " outside [0, " + std::to_string(k) + ")");
        }
        const T* x = z.data() + r * k;
        const T mx = *std::max_element(x, x + k);
        T sum{0};
        for (std::size_t j = 0; j < k; ++j) {
            sum += std::exp(x[j] - mx);
        }
        const T log_norm = mx + std::log(sum);
        total += log_norm - x[label];
        if (dlogits) {
            T* d = dlogits->data() + r * k;
            for (std::size_t j = 0; j < k; ++j) {
                d[j] = std::exp(x[j] - log_norm) / T(n);
            }
            d[label] -= T(1) / T(n);
        }
    }
    return total / T(n);
}

template <typename T>
T Network<T>::l2_penalty() const
{
    T total{0};
    for (const auto& s : plan_) {
        for (auto* p : s.op->parameters()) {
            if (p->weight_decay > 0.0) {
                T sq{0};
                for (T w : p->value.values) {
                    sq += w * w;
                }
                total += T(p->weight_decay) * sq;
            }
        }
    }
    return total;
}

template <typename T>
T Network<T>::loss(const Tensor<T>& batch, const std::vector<std::int32_t>& labels, Mode mode, Rng& rng)
{
    run_forward(batch, mode, rng);
    return data_loss(labels, nullptr) + l2_penalty();
}

template <typename T>
T Network<T>::loss_and_gradients(const Tensor<T>& batch, const std::vector<std::int32_t>& labels, Rng& rng,
                                 Tensor<T>* input_grad)
{
    run_forward(batch, Mode::Train, rng);
    std::vector<Tensor<T>> grads(acts_.size());
    const T value = data_loss(labels, &grads.back()) + l2_penalty();
    if (!std::isfinite(static_cast<double>(value))) {
        throw NonFiniteLoss("loss is not finite");
    }
    for (auto* p : parameters()) {
        p->grad.fill(T(0));
    }
    for (std::size_t i = 0; i + 1 < acts_.size(); ++i) {
        if (i > 0 || input_grad) {
            grads[i].dims = acts_[i].dims;
            grads[i].values.assign(acts_[i].size(), T(0));
        }
    }
    std::vector<const Tensor<T>*> ins;
    std::vector<Tensor<T>*> dins;
    for (std::size_t i = plan_.size(); i-- > 0;) {
        ins.clear();
        dins.clear();
        for (auto idx : plan_[i].inputs) {
            ins.push_back(&acts_[idx]);
            dins.push_back(idx > 0 || input_grad ? &grads[idx] : nullptr);
        }
        plan_[i].op->backward(ins, acts_[i + 1], grads[i + 1], dins);
    }
    for (auto* p : parameters()) {
        if (p->weight_decay > 0.0) {
            const T two_lambda = T(2.0 * p->weight_decay);
            for (std::size_t j = 0; j < p->value.size(); ++j) {
                p->grad[j] += two_lambda * p->value[j];
            }
        }
    }
    if (input_grad) {
        *input_grad = std::move(grads[0]);
    }
    return value;
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::parameters()
{
    std::vector<Parameter<T>*> out;
    for (auto& s : plan_) {
        for (auto* p : s.op->parameters()) {
            out.push_back(p);
        }
    }
    return out;
}

template <typename T>
std::size_t Network<T>::param_count() const
{
    std::size_t total = 0;
    for (const auto& s : plan_) {
        for (const auto* p : s.op->parameters()) {
            total += p->value.size();
        }
    }
    return total;
}

template <typename T>
std::size_t Network<T>::macs_per_sample() const
{
    std::size_t total = 0;
    for (const auto& s : plan_) {
        total += s.op->macs_per_sample();
    }
    return total;
}

template <typename T>
Snapshot<T> Network<T>::snapshot() const
{
    Snapshot<T> snap;
    for (const auto& s : plan_) {
        for (const auto* p : s.op->parameters()) {
            snap.parameters.push_back(p->value);
        }
        for (const auto* b : s.op->buffers()) {
            snap.buffers.push_back(*b);
        }
    }
    return snap;
}

template <typename T>
void Network<T>::restore(const Snapshot<T>& snap)
{
    std::size_t pi = 0;
    std::size_t bi = 0;
    for (auto& s : plan_) {
        for (auto* p : s.op->parameters()) {
            p->value = snap.parameters.at(pi++);
        }
        for (auto* b : s.op->buffers()) {
            *b = snap.buffers.at(bi++);
        }
    }
    if (pi != snap.parameters.size() || bi != snap.buffers.size()) {
        throw std::invalid_argument("snapshot does not belong to this network");
    }
}

namespace {

template <typename T>
void glorot(Tensor<T>& w, double fan_in, double fan_out, Rng& rng)
{
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : w.values) {
        v = static_cast<T>(rng.uniform(-limit, limit));
    }
}

template <typename T>
class Builder {
public:
    Builder(const LayerTree& tree, const Shape& input, const CompileOptions& options)
        : tree_(tree), options_(options), rng_(options.seed)
    {
        shapes_.push_back(input);
    }

    std::vector<typename Network<T>::Step> take_plan() { return std::move(plan_); }
    const Shape& shape(std::size_t act) const { return shapes_[act]; }

    std::size_t add(std::unique_ptr<Op<T>> op, std::vector<std::size_t> inputs)
    {
        shapes_.push_back(op->output_shape());
        plan_.push_back({std::move(op), std::move(inputs)});
        return plan_.size();
    }

    std::size_t flatten_if_spatial(std::size_t act)
    {
        if (shape(act).size() == 1) {
            return act;
        }
        return add(std::make_unique<FlattenOp<T>>(shape(act)), {act});
    }

    std::size_t dense(std::size_t act, std::size_t units, double wd)
    {
        act = flatten_if_spatial(act);
        const std::size_t in = shape(act)[0];
        auto op = std::make_unique<DenseOp<T>>(in, units, wd);
        glorot(op->kernel().value, double(in), double(units), rng_);
        return add(std::move(op), {act});
    }

    std::size_t conv(std::size_t act, const ConvGeometry& g, std::size_t filters, double wd)
    {
        auto op = std::make_unique<Conv2DOp<T>>(g, filters, wd);
        const double k2 = double(g.kernel * g.kernel);
        glorot(op->kernel().value, k2 * double(g.in_c), k2 * double(filters), rng_);
        return add(std::move(op), {act});
    }

    std::size_t build(std::size_t idx, bool is_head);

private:
    std::string where(std::size_t idx) const
    {
        return "layers[" + std::to_string(idx) + "] (" + std::string(to_string(tree_.nodes[idx].kind)) + ")";
    }

    const Shape& require_spatial(std::size_t idx, std::size_t act) const
    {
        if (!is_spatial(shape(act))) {
            throw CompileError(where(idx), "spatial (H,W,C) input", to_string(shape(act)));
        }
        return shape(act);
    }

    ConvGeometry geometry(std::size_t idx, std::size_t act, std::size_t kernel, std::size_t stride, gp::Padding pad)
    {
        const Shape& s = require_spatial(idx, act);
        ConvGeometry g{};
        if (!conv_geometry(s[0], s[1], s[2], kernel, stride, pad, g)) {
            throw CompileError(where(idx),
                               "spatial dims >= " + std::to_string(kernel) + " for " +
                                   std::string(gp::to_string(pad)) + " " + std::to_string(kernel) + "x" +
                                   std::to_string(kernel) + " window",
                               to_string(s));
        }
        return g;
    }

    std::size_t stub(std::size_t idx, std::size_t act, gp::Pretrained kind);

    const LayerTree& tree_;
    const CompileOptions& options_;
    Rng rng_;
    std::vector<typename Network<T>::Step> plan_;
    std::vector<Shape> shapes_;
};

template <typename T>
std::size_t Builder<T>::stub(std::size_t idx, std::size_t act, gp::Pretrained kind)
{
    const StubSpec spec = stub_spec(kind);
    const auto w = options_.stubs ? options_.stubs->weights(kind) : fallback_stub_weights(kind);
    const std::size_t channels = require_spatial(idx, act)[2];

    ConvGeometry g1 = geometry(idx, act, kStubKernel, 1, gp::Padding::Same);
    auto c1 = std::make_unique<Conv2DOp<T>>(g1, spec.conv1_filters, 0.0);
    {
        // Checkpoints hold 3-channel kernels. Other channel counts get the
        // channel-summed kernel spread evenly, so an input whose channels
        // are equal sees the same response as its 3-channel gray version.
        auto& k = c1->kernel().value.values;
        const std::size_t F = spec.conv1_filters;
        for (std::size_t p = 0; p < kStubKernel * kStubKernel; ++p) {
            for (std::size_t f = 0; f < F; ++f) {
                if (channels == kStubChannels) {
                    for (std::size_t c = 0; c < channels; ++c) {
                        k[(p * channels + c) * F + f] = static_cast<T>(w[0][(p * kStubChannels + c) * F + f]);
                    }
                    continue;
                }
                double sum = 0.0;
                for (std::size_t c = 0; c < kStubChannels; ++c) {
                    sum += w[0][(p * kStubChannels + c) * F + f];
                }
                for (std::size_t c = 0; c < channels; ++c) {
                    k[(p * channels + c) * F + f] = static_cast<T>(sum / double(channels));
                }
            }
        }
        for (std::size_t f = 0; f < F; ++f) {
            c1->bias().value[f] = static_cast<T>(w[1][f]);
        }
    }
    act = add(std::move(c1), {act});
    act = add(std::make_unique<ActivationOp<T>>(gp::Activation::ReLU, shape(act)), {act});
    act = add(std::make_unique<MaxPool2DOp<T>>(geometry(idx, act, 2, 2, gp::Padding::Valid)), {act});

    ConvGeometry g2 = geometry(idx, act, kStubKernel, 1, gp::Padding::Same);
    auto c2 = std::make_unique<Conv2DOp<T>>(g2, spec.conv2_filters, 0.0);
    for (std::size_t i = 0; i < w[2].size(); ++i) {
        c2->kernel().value[i] = static_cast<T>(w[2][i]);
    }
    for (std::size_t f = 0; f < spec.conv2_filters; ++f) {
        c2->bias().value[f] = static_cast<T>(w[3][f]);
    }
    act = add(std::move(c2), {act});
    act = add(std::make_unique<ActivationOp<T>>(gp::Activation::ReLU, shape(act)), {act});
    return add(std::make_unique<MaxPool2DOp<T>>(geometry(idx, act, 2, 2, gp::Padding::Valid)), {act});
}

template <typename T>
std::size_t Builder<T>::build(std::size_t idx, bool is_head)
{
    const LayerDescriptor& d = tree_.nodes.at(idx);
    const auto& p = d.params;
    if (d.kind == LayerKind::Input) {
        return 0;
    }
    if (d.kind == LayerKind::Concatenate) {
        const std::size_t left = build(d.child_indices[0], false);
        const std::size_t right = build(d.child_indices[1], false);
        return add(std::make_unique<ConcatOp<T>>(shape(left), shape(right)), {left, right});
    }
    std::size_t act = build(d.child_indices.at(0), false);
    switch (d.kind) {
    case LayerKind::Dense: {
        act = dense(act, static_cast<std::size_t>(*p.output_dim), *p.weight_decay);
        if (is_head && *p.activation == gp::Activation::Softmax) {
            return act;
        }
        return add(std::make_unique<ActivationOp<T>>(*p.activation, shape(act)), {act});
    }
    case LayerKind::Conv2D: {
        const ConvGeometry g = geometry(idx, act, static_cast<std::size_t>(*p.kernel_dim),
                                        static_cast<std::size_t>(*p.stride), *p.padding);
        act = conv(act, g, static_cast<std::size_t>(*p.output_dim), *p.weight_decay);
        return add(std::make_unique<ActivationOp<T>>(*p.activation, shape(act)), {act});
    }
    case LayerKind::Dropout:
        return add(std::make_unique<DropoutOp<T>>(*p.dropout_rate, shape(act)), {act});
    case LayerKind::BatchNorm:
        return add(std::make_unique<BatchNormOp<T>>(shape(act)), {act});
    case LayerKind::MaxPool2D: {
        const ConvGeometry g = geometry(idx, act, static_cast<std::size_t>(*p.kernel_dim),
                                        static_cast<std::size_t>(*p.stride), *p.padding);
        return add(std::make_unique<MaxPool2DOp<T>>(g), {act});
    }
    case LayerKind::GlobalMaxPool:
    case LayerKind::GlobalAvgPool:
        require_spatial(idx, act);
        return add(std::make_unique<GlobalPoolOp<T>>(d.kind == LayerKind::GlobalMaxPool, shape(act)), {act});
    case LayerKind::PretrainedStub:
        return stub(idx, act, *p.pretrained);
    default: break;
    }
    throw CompileError(where(idx), "known layer kind", "unsupported");
}

} // namespace

template <typename T>
Network<T> compile(const LayerTree& layers, const Shape& input_shape, std::size_t n_classes,
                   const CompileOptions& options)
{
    std::string why;
    if (!primitives::is_valid_layer_tree(layers, &why)) {
        throw CompileError("layers", "valid layer tree", why);
    }
    if (n_classes < 2) {
        throw CompileError("head", "at least 2 classes", std::to_string(n_classes));
    }
    if (input_shape.empty() || product(input_shape) == 0) {
        throw CompileError("input", "non-empty input shape", to_string(input_shape));
    }
    for (const auto& d : layers.nodes) {
        primitives::validate_params(d.kind, d.params);
    }
    Builder<T> b(layers, input_shape, options);
    const auto& root = layers.root();
    const bool root_is_head = root.kind == LayerKind::Dense && root.params.output_dim &&
                              static_cast<std::size_t>(*root.params.output_dim) == n_classes;
    std::size_t act = b.build(layers.root_index, root_is_head);
    if (!root_is_head) {
        b.dense(act, n_classes, 0.0);
    }
    Network<T> net(input_shape, n_classes, b.take_plan());
    const std::size_t macs = net.macs_per_sample();
    if (macs > options.max_macs) {
        throw CompileError("network", "at most " + std::to_string(options.max_macs) + " MACs per sample",
                           std::to_string(macs));
    }
    return net;
}

template class Network<float>;
template class Network<double>;
template Network<float> compile<float>(const LayerTree&, const Shape&, std::size_t, const CompileOptions&);
template Network<double> compile<double>(const LayerTree&, const Shape&, std::size_t, const CompileOptions&);
template Tensor<float> softmax<float>(const Tensor<float>&);
template Tensor<double> softmax<double>(const Tensor<double>&);

} // namespace neurotree::nn
