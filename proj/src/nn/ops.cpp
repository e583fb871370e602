#include "neurotree/nn/ops.hpp"

#include <cmath>
#include <limits>

namespace neurotree::nn {

using gp::Activation;

bool conv_geometry(std::size_t in_h, std::size_t in_w, std::size_t in_c, std::size_t kernel, std::size_t stride,
                   gp::Padding padding, ConvGeometry& g)
{
    g.in_h = in_h;
    g.in_w = in_w;
    g.in_c = in_c;
    g.kernel = kernel;
    g.stride = stride;
    if (kernel == 0 || stride == 0 || in_h == 0 || in_w == 0) {
        return false;
    }
    if (padding == gp::Padding::Same) {
        g.out_h = (in_h + stride - 1) / stride;
        g.out_w = (in_w + stride - 1) / stride;
        const std::size_t need_h = (g.out_h - 1) * stride + kernel;
        const std::size_t need_w = (g.out_w - 1) * stride + kernel;
        g.pad_top = need_h > in_h ? (need_h - in_h) / 2 : 0;
        g.pad_left = need_w > in_w ? (need_w - in_w) / 2 : 0;
        return true;
    }
    if (in_h < kernel || in_w < kernel) {
        return false;
    }
    g.out_h = (in_h - kernel) / stride + 1;
    g.out_w = (in_w - kernel) / stride + 1;
    g.pad_top = 0;
    g.pad_left = 0;
    return true;
}

// ---------------------------------------------------------------- Flatten

template <typename T>
void FlattenOp<T>::forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&)
{
    out.dims = {in[0]->batch(), product(in_)};
    out.values = in[0]->values;
}

template <typename T>
void FlattenOp<T>::backward(typename Op<T>::Inputs, const Tensor<T>&, const Tensor<T>& dout, typename Op<T>::Grads din)
{
    if (din[0] == nullptr) {
        return;
    }
    for (std::size_t i = 0; i < dout.size(); ++i) {
        din[0]->values[i] += dout.values[i];
    }
}

// ---------------------------------------------------------------- Dense

template <typename T>
DenseOp<T>::DenseOp(std::size_t in_features, std::size_t units, double weight_decay)
    : in_(in_features),
      units_(units),
      kernel_{"kernel", Tensor<T>({in_features, units}), Tensor<T>({in_features, units}), weight_decay},
      bias_{"bias", Tensor<T>({units}), Tensor<T>({units}), 0.0}
{
}

template <typename T>
void DenseOp<T>::forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&)
{
    const Tensor<T>& x = *in[0];
    const std::size_t n = x.batch();
    out.dims = {n, units_};
    out.values.resize(n * units_);
    const T* w = kernel_.value.data();
    const T* b = bias_.value.data();
    for (std::size_t r = 0; r < n; ++r) {
        T* o = out.data() + r * units_;
        std::copy(b, b + units_, o);
        const T* xr = x.data() + r * in_;
        for (std::size_t i = 0; i < in_; ++i) {
            const T xv = xr[i];
            if (xv == T{0}) {
                continue;
            }
            const T* wr = w + i * units_;
            for (std::size_t j = 0; j < units_; ++j) {
                o[j] += xv * wr[j];
            }
        }
    }
}

template <typename T>
void DenseOp<T>::backward(typename Op<T>::Inputs in, const Tensor<T>&, const Tensor<T>& dout, typename Op<T>::Grads din)
{
    const Tensor<T>& x = *in[0];
    const std::size_t n = x.batch();
    T* dw = kernel_.grad.data();
    T* db = bias_.grad.data();
    const T* w = kernel_.value.data();
    for (std::size_t r = 0; r < n; ++r) {
        const T* dy = dout.data() + r * units_;
        const T* xr = x.data() + r * in_;
        for (std::size_t j = 0; j < units_; ++j) {
            db[j] += dy[j];
        }
        T* dx = din[0] ? din[0]->data() + r * in_ : nullptr;
        for (std::size_t i = 0; i < in_; ++i) {
            const T xv = xr[i];
            T* dwr = dw + i * units_;
            const T* wr = w + i * units_;
            T acc{0};
            for (std::size_t j = 0; j < units_; ++j) {
                dwr[j] += xv * dy[j];
                acc += wr[j] * dy[j];
            }
            if (dx) {
                dx[i] += acc;
            }
        }
    }
}

// ---------------------------------------------------------------- Conv2D

template <typename T>
Conv2DOp<T>::Conv2DOp(ConvGeometry g, std::size_t filters, double weight_decay)
    : g_(g),
      filters_(filters),
      kernel_{"kernel", Tensor<T>({g.kernel, g.kernel, g.in_c, filters}),
              Tensor<T>({g.kernel, g.kernel, g.in_c, filters}), weight_decay},
      bias_{"bias", Tensor<T>({filters}), Tensor<T>({filters}), 0.0}
{
}

template <typename T>
void Conv2DOp<T>::forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&)
{
    const Tensor<T>& x = *in[0];
    const std::size_t n = x.batch();
    const std::size_t C = g_.in_c;
    const std::size_t F = filters_;
    out.dims = {n, g_.out_h, g_.out_w, F};
    out.values.resize(n * g_.out_h * g_.out_w * F);
    const T* w = kernel_.value.data();
    for (std::size_t s = 0; s < n; ++s) {
        const T* xs = x.data() + s * g_.in_h * g_.in_w * C;
        for (std::size_t oy = 0; oy < g_.out_h; ++oy) {
            for (std::size_t ox = 0; ox < g_.out_w; ++ox) {
                T* o = out.data() + ((s * g_.out_h + oy) * g_.out_w + ox) * F;
                std::copy(bias_.value.data(), bias_.value.data() + F, o);
                for (std::size_t ky = 0; ky < g_.kernel; ++ky) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g_.stride + ky) -
                                              static_cast<std::ptrdiff_t>(g_.pad_top);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g_.in_h)) {
                        continue;
                    }
                    for (std::size_t kx = 0; kx < g_.kernel; ++kx) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g_.stride + kx) -
                                                  static_cast<std::ptrdiff_t>(g_.pad_left);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g_.in_w)) {
                            continue;
                        }
                        const T* xp = xs + (static_cast<std::size_t>(iy) * g_.in_w + static_cast<std::size_t>(ix)) * C;
                        const T* wk = w + (ky * g_.kernel + kx) * C * F;
                        for (std::size_t c = 0; c < C; ++c) {
                            const T xv = xp[c];
                            const T* wr = wk + c * F;
                            for (std::size_t f = 0; f < F; ++f) {
                                o[f] += xv * wr[f];
                            }
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void Conv2DOp<T>::backward(typename Op<T>::Inputs in, const Tensor<T>&, const Tensor<T>& dout, typename Op<T>::Grads din)
{
    const Tensor<T>& x = *in[0];
    const std::size_t n = x.batch();
    const std::size_t C = g_.in_c;
    const std::size_t F = filters_;
    const T* w = kernel_.value.data();
    T* dw = kernel_.grad.data();
    T* db = bias_.grad.data();
    for (std::size_t s = 0; s < n; ++s) {
        const T* xs = x.data() + s * g_.in_h * g_.in_w * C;
        T* dxs = din[0] ? din[0]->data() + s * g_.in_h * g_.in_w * C : nullptr;
        for (std::size_t oy = 0; oy < g_.out_h; ++oy) {
            for (std::size_t ox = 0; ox < g_.out_w; ++ox) {
                const T* dy = dout.data() + ((s * g_.out_h + oy) * g_.out_w + ox) * F;
                for (std::size_t f = 0; f < F; ++f) {
                    db[f] += dy[f];
                }
                for (std::size_t ky = 0; ky < g_.kernel; ++ky) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g_.stride + ky) -
                                              static_cast<std::ptrdiff_t>(g_.pad_top);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g_.in_h)) {
                        continue;
                    }
                    for (std::size_t kx = 0; kx < g_.kernel; ++kx) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g_.stride + kx) -
                                                  static_cast<std::ptrdiff_t>(g_.pad_left);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g_.in_w)) {
                            continue;
                        }
                        const std::size_t pix = static_cast<std::size_t>(iy) * g_.in_w + static_cast<std::size_t>(ix);
                        const T* xp = xs + pix * C;
                        const std::size_t wbase = (ky * g_.kernel + kx) * C * F;
                        for (std::size_t c = 0; c < C; ++c) {
                            const T xv = xp[c];
                            const T* wr = w + wbase + c * F;
                            T* dwr = dw + wbase + c * F;
                            T acc{0};
                            for (std::size_t f = 0; f < F; ++f) {
                                dwr[f] += xv * dy[f];
                                acc += wr[f] * dy[f];
                            }
                            if (dxs) {
                                dxs[pix * C + c] += acc;
                            }
                        }
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------- Activation

namespace {

constexpr double kSeluScale = 1.0507009873554805;
constexpr double kSeluAlpha = 1.6732632423543772;
constexpr double kLeakySlope = 0.2;

template <typename T>
void softmax_rows(const T* x, T* y, std::size_t rows, std::size_t width)
{
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = x + r * width;
        T* yr = y + r * width;
        T mx = *std::max_element(xr, xr + width);
        T sum{0};
        for (std::size_t j = 0; j < width; ++j) {
            yr[j] = std::exp(xr[j] - mx);
            sum += yr[j];
        }
        for (std::size_t j = 0; j < width; ++j) {
            yr[j] /= sum;
        }
    }
}

} // namespace

template <typename T>
void ActivationOp<T>::forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&)
{
    const Tensor<T>& x = *in[0];
    out.dims = x.dims;
    out.values.resize(x.size());
    const std::size_t n = x.size();
    const T* xv = x.data();
    T* y = out.data();
    switch (kind_) {
    case Activation::SeLU:
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = xv[i] > 0 ? T(kSeluScale) * xv[i] : T(kSeluScale * kSeluAlpha) * std::expm1(xv[i]);
        }
        break;
    case Activation::ELU:
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = xv[i] > 0 ? xv[i] : std::expm1(xv[i]);
        }
        break;
    case Activation::Sigmoid:
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = T(1) / (T(1) + std::exp(-xv[i]));
        }
        break;
    case Activation::ReLU:
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = xv[i] > 0 ? xv[i] : T(0);
        }
        break;
    case Activation::LeakyReLU:
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = xv[i] > 0 ? xv[i] : T(kLeakySlope) * xv[i];
        }
        break;
    case Activation::Softmax: {
        const std::size_t width = shape_.back();
        softmax_rows(xv, y, n / width, width);
        break;
    }
    case Activation::TanH:
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = std::tanh(xv[i]);
        }
        break;
    }
}

template <typename T>
void ActivationOp<T>::backward(typename Op<T>::Inputs in, const Tensor<T>& out, const Tensor<T>& dout,
                               typename Op<T>::Grads din)
{
    if (din[0] == nullptr) {
        return;
    }
    const Tensor<T>& x = *in[0];
    const std::size_t n = x.size();
    const T* xv = x.data();
    const T* y = out.data();
    const T* dy = dout.data();
    T* dx = din[0]->data();
    switch (kind_) {
    case Activation::SeLU:
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] += dy[i] * (xv[i] > 0 ? T(kSeluScale) : T(kSeluScale * kSeluAlpha) * std::exp(xv[i]));
        }
        break;
    case Activation::ELU:
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] += dy[i] * (xv[i] > 0 ? T(1) : std::exp(xv[i]));
        }
        break;
    case Activation::Sigmoid:
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] += dy[i] * y[i] * (T(1) - y[i]);
        }
        break;
    case Activation::ReLU:
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] += xv[i] > 0 ? dy[i] : T(0);
        }
        break;
    case Activation::LeakyReLU:
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] += dy[i] * (xv[i] > 0 ? T(1) : T(kLeakySlope));
        }
        break;
    case Activation::Softmax: {
        const std::size_t width = shape_.back();
        for (std::size_t r = 0; r < n / width; ++r) {
            const T* yr = y + r * width;
            const T* dyr = dy + r * width;
            T dot{0};
            for (std::size_t j = 0; j < width; ++j) {
                dot += dyr[j] * yr[j];
            }
            for (std::size_t j = 0; j < width; ++j) {
                dx[r * width + j] += yr[j] * (dyr[j] - dot);
            }
        }
        break;
    }
    case Activation::TanH:
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] += dy[i] * (T(1) - y[i] * y[i]);
        }
        break;
    }
}

// ---------------------------------------------------------------- Dropout

template <typename T>
void DropoutOp<T>::forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode mode, Rng& rng)
{
    const Tensor<T>& x = *in[0];
    out.dims = x.dims;
    out.values = x.values;
    masked_ = mode == Mode::Train && rate_ > 0.0;
    if (!masked_) {
        return;
    }
    const T keep_scale = T(1.0 / (1.0 - rate_));
    mask_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask_[i] = rng.uniform() < rate_ ? T(0) : keep_scale;
        out.values[i] *= mask_[i];
    }
}

template <typename T>
void DropoutOp<T>::backward(typename Op<T>::Inputs, const Tensor<T>&, const Tensor<T>& dout, typename Op<T>::Grads din)
{
    if (din[0] == nullptr) {
        return;
    }
    for (std::size_t i = 0; i < dout.size(); ++i) {
        din[0]->values[i] += masked_ ? dout.values[i] * mask_[i] : dout.values[i];
    }
}

// ---------------------------------------------------------------- BatchNorm

template <typename T>
BatchNormOp<T>::BatchNormOp(Shape shape)
    : shape_(std::move(shape)),
      channels_(shape_.back()),
      gamma_{"gamma", Tensor<T>({channels_}, T(1)), Tensor<T>({channels_}), 0.0},
      beta_{"beta", Tensor<T>({channels_}), Tensor<T>({channels_}), 0.0},
      running_mean_({channels_}, T(0)),
      running_var_({channels_}, T(1))
{
}

template <typename T>
void BatchNormOp<T>::forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode mode, Rng&)
{
    const Tensor<T>& x = *in[0];
    const std::size_t C = channels_;
    const std::size_t groups = x.size() / C;
    out.dims = x.dims;
    out.values.resize(x.size());
    last_mode_ = mode;
    inv_std_.assign(C, T(0));
    std::vector<T> mean(C, T(0));
    if (mode == Mode::Train) {
        std::vector<T> var(C, T(0));
        for (std::size_t g = 0; g < groups; ++g) {
            for (std::size_t c = 0; c < C; ++c) {
                mean[c] += x[g * C + c];
            }
        }
        for (std::size_t c = 0; c < C; ++c) {
            mean[c] /= T(groups);
        }
        for (std::size_t g = 0; g < groups; ++g) {
            for (std::size_t c = 0; c < C; ++c) {
                const T d = x[g * C + c] - mean[c];
                var[c] += d * d;
            }
        }
        for (std::size_t c = 0; c < C; ++c) {
            var[c] /= T(groups);
            inv_std_[c] = T(1) / std::sqrt(var[c] + T(kEpsilon));
            const T unbiased = groups > 1 ? var[c] * T(groups) / T(groups - 1) : var[c];
            running_mean_[c] = T(kMomentum) * running_mean_[c] + T(1 - kMomentum) * mean[c];
            running_var_[c] = T(kMomentum) * running_var_[c] + T(1 - kMomentum) * unbiased;
        }
    } else {
        for (std::size_t c = 0; c < C; ++c) {
            mean[c] = running_mean_[c];
            inv_std_[c] = T(1) / std::sqrt(running_var_[c] + T(kEpsilon));
        }
    }
    xhat_.resize(x.size());
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t i = g * C + c;
            xhat_[i] = (x[i] - mean[c]) * inv_std_[c];
            out[i] = gamma_.value[c] * xhat_[i] + beta_.value[c];
        }
    }
}

template <typename T>
void BatchNormOp<T>::backward(typename Op<T>::Inputs in, const Tensor<T>&, const Tensor<T>& dout,
                              typename Op<T>::Grads din)
{
    const std::size_t C = channels_;
    const std::size_t groups = in[0]->size() / C;
    std::vector<T> sum_dxhat(C, T(0));
    std::vector<T> sum_dxhat_xhat(C, T(0));
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t i = g * C + c;
            gamma_.grad[c] += dout[i] * xhat_[i];
            beta_.grad[c] += dout[i];
            const T dxhat = dout[i] * gamma_.value[c];
            sum_dxhat[c] += dxhat;
            sum_dxhat_xhat[c] += dxhat * xhat_[i];
        }
    }
    if (din[0] == nullptr) {
        return;
    }
    T* dx = din[0]->data();
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t i = g * C + c;
            const T dxhat = dout[i] * gamma_.value[c];
            if (last_mode_ == Mode::Train) {
                dx[i] += inv_std_[c] / T(groups) *
                         (T(groups) * dxhat - sum_dxhat[c] - xhat_[i] * sum_dxhat_xhat[c]);
            } else {
                dx[i] += dxhat * inv_std_[c];
            }
        }
    }
}

// ---------------------------------------------------------------- MaxPool2D

template <typename T>
void MaxPool2DOp<T>::forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&)
{
    const Tensor<T>& x = *in[0];
    const std::size_t n = x.batch();
    const std::size_t C = g_.in_c;
    out.dims = {n, g_.out_h, g_.out_w, C};
    out.values.resize(n * g_.out_h * g_.out_w * C);
    argmax_.resize(out.values.size());
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t oy = 0; oy < g_.out_h; ++oy) {
            for (std::size_t ox = 0; ox < g_.out_w; ++ox) {
                for (std::size_t c = 0; c < C; ++c) {
                    T best = -std::numeric_limits<T>::infinity();
                    std::size_t best_i = 0;
                    bool found = false;
                    for (std::size_t ky = 0; ky < g_.kernel; ++ky) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g_.stride + ky) -
                                                  static_cast<std::ptrdiff_t>(g_.pad_top);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g_.in_h)) {
                            continue;
                        }
                        for (std::size_t kx = 0; kx < g_.kernel; ++kx) {
                            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g_.stride + kx) -
                                                      static_cast<std::ptrdiff_t>(g_.pad_left);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g_.in_w)) {
                                continue;
                            }
                            const std::size_t i =
                                ((s * g_.in_h + static_cast<std::size_t>(iy)) * g_.in_w + static_cast<std::size_t>(ix)) *
                                    C +
                                c;
                            if (!found || x[i] > best) {
                                best = x[i];
                                best_i = i;
                                found = true;
                            }
                        }
                    }
                    const std::size_t o = ((s * g_.out_h + oy) * g_.out_w + ox) * C + c;
                    out[o] = best;
                    argmax_[o] = best_i;
                }
            }
        }
    }
}

template <typename T>
void MaxPool2DOp<T>::backward(typename Op<T>::Inputs, const Tensor<T>&, const Tensor<T>& dout, typename Op<T>::Grads din)
{
    if (din[0] == nullptr) {
        return;
    }
    for (std::size_t o = 0; o < dout.size(); ++o) {
        din[0]->values[argmax_[o]] += dout[o];
    }
}

// ---------------------------------------------------------------- Global pooling

template <typename T>
void GlobalPoolOp<T>::forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&)
{
    const Tensor<T>& x = *in[0];
    const std::size_t n = x.batch();
    const std::size_t positions = in_[0] * in_[1];
    const std::size_t C = in_[2];
    out.dims = {n, C};
    out.values.assign(n * C, T(0));
    argmax_.assign(n * C, 0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t base = s * positions * C + c;
            if (max_) {
                std::size_t bi = base;
                for (std::size_t p = 1; p < positions; ++p) {
                    if (x[base + p * C] > x[bi]) {
                        bi = base + p * C;
                    }
                }
                out[s * C + c] = x[bi];
                argmax_[s * C + c] = bi;
            } else {
                T sum{0};
                for (std::size_t p = 0; p < positions; ++p) {
                    sum += x[base + p * C];
                }
                out[s * C + c] = sum / T(positions);
            }
        }
    }
}

template <typename T>
void GlobalPoolOp<T>::backward(typename Op<T>::Inputs, const Tensor<T>&, const Tensor<T>& dout, typename Op<T>::Grads din)
{
    if (din[0] == nullptr) {
        return;
    }
    const std::size_t n = dout.batch();
    const std::size_t positions = in_[0] * in_[1];
    const std::size_t C = in_[2];
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t c = 0; c < C; ++c) {
            const T g = dout[s * C + c];
            if (max_) {
                din[0]->values[argmax_[s * C + c]] += g;
            } else {
                const std::size_t base = s * positions * C + c;
                for (std::size_t p = 0; p < positions; ++p) {
                    din[0]->values[base + p * C] += g / T(positions);
                }
            }
        }
    }
}

// ---------------------------------------------------------------- Concatenate

template <typename T>
ConcatOp<T>::ConcatOp(Shape left, Shape right) : left_(std::move(left)), right_(std::move(right))
{
    if (is_spatial(left_) && is_spatial(right_) && left_[0] == right_[0] && left_[1] == right_[1]) {
        rows_ = left_[0] * left_[1];
        left_w_ = left_[2];
        right_w_ = right_[2];
        out_ = {left_[0], left_[1], left_w_ + right_w_};
    } else {
        rows_ = 1;
        left_w_ = product(left_);
        right_w_ = product(right_);
        out_ = {left_w_ + right_w_};
    }
}

template <typename T>
void ConcatOp<T>::forward(typename Op<T>::Inputs in, Tensor<T>& out, Mode, Rng&)
{
    const std::size_t n = in[0]->batch();
    const std::size_t width = left_w_ + right_w_;
    out.dims = {n};
    out.dims.insert(out.dims.end(), out_.begin(), out_.end());
    out.values.resize(n * rows_ * width);
    for (std::size_t r = 0; r < n * rows_; ++r) {
        std::copy_n(in[0]->data() + r * left_w_, left_w_, out.data() + r * width);
        std::copy_n(in[1]->data() + r * right_w_, right_w_, out.data() + r * width + left_w_);
    }
}

template <typename T>
void ConcatOp<T>::backward(typename Op<T>::Inputs in, const Tensor<T>&, const Tensor<T>& dout, typename Op<T>::Grads din)
{
    const std::size_t n = in[0]->batch();
    const std::size_t width = left_w_ + right_w_;
    for (std::size_t r = 0; r < n * rows_; ++r) {
        if (din[0]) {
            for (std::size_t j = 0; j < left_w_; ++j) {
                din[0]->values[r * left_w_ + j] += dout[r * width + j];
            }
        }
        if (din[1]) {
            for (std::size_t j = 0; j < right_w_; ++j) {
                din[1]->values[r * right_w_ + j] += dout[r * width + left_w_ + j];
            }
        }
    }
}

template class FlattenOp<float>;
template class FlattenOp<double>;
template class DenseOp<float>;
template class DenseOp<double>;
template class Conv2DOp<float>;
template class Conv2DOp<double>;
template class ActivationOp<float>;
template class ActivationOp<double>;
template class DropoutOp<float>;
template class DropoutOp<double>;
template class BatchNormOp<float>;
template class BatchNormOp<double>;
template class MaxPool2DOp<float>;
template class MaxPool2DOp<double>;
template class GlobalPoolOp<float>;
template class GlobalPoolOp<double>;
template class ConcatOp<float>;
template class ConcatOp<double>;

} // namespace neurotree::nn
