#include "neurotree/preprocess/transforms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <numbers>

namespace neurotree::preprocess {

using nn::Shape;
using nn::Tensor;

namespace {

// The FFTW planner is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct Dims {
    std::size_t h, w, c;
};

Dims spatial_dims(const Shape& s, const char* op)
{
    if (s.size() != 3) {
        throw NotSpatial(std::string(op) + " needs (H,W,C) instances, got " + nn::to_string(s));
    }
    return {s[0], s[1], s[2]};
}

using InstanceFn = std::function<void(const float* in, float* out)>;

LabeledSplit map_split(const LabeledSplit& s, const Shape& out_shape, const InstanceFn& fn)
{
    LabeledSplit out;
    out.labels = s.labels;
    Shape dims = out_shape;
    dims.insert(dims.begin(), s.instances.batch());
    out.instances = Tensor<float>(dims);
    const std::size_t in_stride = s.instances.sample_size();
    const std::size_t out_stride = nn::product(out_shape);
    for (std::size_t i = 0; i < s.instances.batch(); ++i) {
        fn(s.instances.data() + i * in_stride, out.instances.data() + i * out_stride);
    }
    return out;
}

DataPair map_pair(const DataPair& d, const Shape& out_shape, const InstanceFn& fn)
{
    DataPair out;
    out.n_classes = d.n_classes;
    out.train = map_split(d.train, out_shape, fn);
    out.validation = map_split(d.validation, out_shape, fn);
    out.test = map_split(d.test, out_shape, fn);
    return out;
}

/// Correlates one channel plane with a 3x3 kernel under reflect padding.
double correlate3(const float* img, const Dims& g, std::size_t channel, std::ptrdiff_t y, std::ptrdiff_t x,
                  const double (&k)[3][3])
{
    double acc = 0.0;
    for (int dy = -1; dy <= 1; ++dy) {
        const auto yy = static_cast<std::size_t>(reflect_index(y + dy, g.h));
        for (int dx = -1; dx <= 1; ++dx) {
            const auto xx = static_cast<std::size_t>(reflect_index(x + dx, g.w));
            acc += k[dy + 1][dx + 1] * img[(yy * g.w + xx) * g.c + channel];
        }
    }
    return acc;
}

constexpr double kLuma[3] = {0.299, 0.587, 0.114};

} // namespace

Shape output_shape(Transform kind, const Shape& in, int bins)
{
    switch (kind) {
    case Transform::CosineWindow: spatial_dims(in, "CosineWindow"); return in;
    case Transform::Grayscale: {
        const Dims g = spatial_dims(in, "Grayscale");
        if (g.c != 3) {
            throw NotRGB("Grayscale needs 3 channels, got " + std::to_string(g.c));
        }
        return {g.h, g.w, 1};
    }
    case Transform::Normalize:
    case Transform::Threshold: return in;
    case Transform::GaussianBlur: spatial_dims(in, "GaussianBlur"); return in;
    case Transform::SobelEdges: {
        const Dims g = spatial_dims(in, "SobelEdges");
        return {g.h, g.w, 1};
    }
    case Transform::FourierMagnitude: spatial_dims(in, "FourierMagnitude"); return in;
    case Transform::DctTransform: spatial_dims(in, "DctTransform"); return in;
    case Transform::IntensityHistogram: {
        if (bins < 2) {
            throw InvalidBins("histogram needs at least 2 bins, got " + std::to_string(bins));
        }
        const std::size_t channels = in.size() == 3 ? in[2] : 1;
        return {static_cast<std::size_t>(bins) * channels};
    }
    }
    throw PreprocessError("unknown transform");
}

std::vector<double> hann_window(std::size_t n)
{
    if (n <= 1) {
        return std::vector<double>(n, 1.0);
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * double(i) / double(n - 1)));
    }
    // Exact zeros at both ends; cos(2*pi) is not exactly 1 in floating point.
    w.front() = 0.0;
    w.back() = 0.0;
    return w;
}

std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::size_t n)
{
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    i %= period;
    if (i < 0) {
        i += period;
    }
    return i < static_cast<std::ptrdiff_t>(n) ? i : period - 1 - i;
}

std::vector<double> gaussian_kernel(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidSigma("sigma must be positive and finite");
    }
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double v = std::exp(-double(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) {
        v /= sum;
    }
    return k;
}

std::vector<double> dct2(const std::vector<double>& plane, std::size_t h, std::size_t w)
{
    std::vector<double> in(plane);
    std::vector<double> out(h * w);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_r2r_2d(static_cast<int>(h), static_cast<int>(w), in.data(), out.data(), FFTW_REDFT10,
                                FFTW_REDFT10, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    for (std::size_t u = 0; u < h; ++u) {
        const double su = u == 0 ? std::sqrt(1.0 / (4.0 * double(h))) : std::sqrt(1.0 / (2.0 * double(h)));
        for (std::size_t v = 0; v < w; ++v) {
            const double sv = v == 0 ? std::sqrt(1.0 / (4.0 * double(w))) : std::sqrt(1.0 / (2.0 * double(w)));
            out[u * w + v] *= su * sv;
        }
    }
    return out;
}

std::vector<double> idct2(const std::vector<double>& coeffs, std::size_t h, std::size_t w)
{
    std::vector<double> in(coeffs);
    for (std::size_t u = 0; u < h; ++u) {
        const double su = u == 0 ? 1.0 / std::sqrt(double(h)) : 1.0 / std::sqrt(2.0 * double(h));
        for (std::size_t v = 0; v < w; ++v) {
            const double sv = v == 0 ? 1.0 / std::sqrt(double(w)) : 1.0 / std::sqrt(2.0 * double(w));
            in[u * w + v] *= su * sv;
        }
    }
    std::vector<double> out(h * w);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_r2r_2d(static_cast<int>(h), static_cast<int>(w), in.data(), out.data(), FFTW_REDFT01,
                                FFTW_REDFT01, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

DataPair cosine_window(const DataPair& d)
{
    const Shape shape = output_shape(Transform::CosineWindow, d.instance_shape());
    const Dims g{shape[0], shape[1], shape[2]};
    const auto wy = hann_window(g.h);
    const auto wx = hann_window(g.w);
    return map_pair(d, shape, [&](const float* in, float* out) {
        for (std::size_t y = 0; y < g.h; ++y) {
            for (std::size_t x = 0; x < g.w; ++x) {
                const double f = wy[y] * wx[x];
                for (std::size_t c = 0; c < g.c; ++c) {
                    const std::size_t i = (y * g.w + x) * g.c + c;
                    out[i] = static_cast<float>(in[i] * f);
                }
            }
        }
    });
}

DataPair grayscale(const DataPair& d)
{
    const Shape shape = output_shape(Transform::Grayscale, d.instance_shape());
    const std::size_t pixels = shape[0] * shape[1];
    return map_pair(d, shape, [&](const float* in, float* out) {
        for (std::size_t p = 0; p < pixels; ++p) {
            out[p] = static_cast<float>(kLuma[0] * in[3 * p] + kLuma[1] * in[3 * p + 1] + kLuma[2] * in[3 * p + 2]);
        }
    });
}

DataPair gaussian_blur(const DataPair& d, double sigma)
{
    const auto k = gaussian_kernel(sigma);
    const Shape shape = output_shape(Transform::GaussianBlur, d.instance_shape());
    const Dims g{shape[0], shape[1], shape[2]};
    const auto radius = static_cast<std::ptrdiff_t>(k.size() / 2);
    return map_pair(d, shape, [&](const float* in, float* out) {
        std::vector<double> tmp(g.h * g.w * g.c, 0.0);
        for (std::size_t y = 0; y < g.h; ++y) {
            for (std::size_t x = 0; x < g.w; ++x) {
                for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
                    const auto xx = static_cast<std::size_t>(reflect_index(static_cast<std::ptrdiff_t>(x) + t, g.w));
                    const double kv = k[static_cast<std::size_t>(t + radius)];
                    for (std::size_t c = 0; c < g.c; ++c) {
                        tmp[(y * g.w + x) * g.c + c] += kv * in[(y * g.w + xx) * g.c + c];
                    }
                }
            }
        }
        for (std::size_t y = 0; y < g.h; ++y) {
            for (std::size_t x = 0; x < g.w; ++x) {
                for (std::size_t c = 0; c < g.c; ++c) {
                    double acc = 0.0;
                    for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
                        const auto yy =
                            static_cast<std::size_t>(reflect_index(static_cast<std::ptrdiff_t>(y) + t, g.h));
                        acc += k[static_cast<std::size_t>(t + radius)] * tmp[(yy * g.w + x) * g.c + c];
                    }
                    out[(y * g.w + x) * g.c + c] = static_cast<float>(acc);
                }
            }
        }
    });
}

DataPair sobel_edges(const DataPair& d)
{
    const Dims in_g = spatial_dims(d.instance_shape(), "SobelEdges");
    if (in_g.c == 3) {
        return sobel_edges(grayscale(d));
    }
    const Shape shape = output_shape(Transform::SobelEdges, d.instance_shape());
    static constexpr double kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static constexpr double ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    return map_pair(d, shape, [&](const float* in, float* out) {
        for (std::size_t y = 0; y < in_g.h; ++y) {
            for (std::size_t x = 0; x < in_g.w; ++x) {
                double total = 0.0;
                for (std::size_t c = 0; c < in_g.c; ++c) {
                    const auto yy = static_cast<std::ptrdiff_t>(y);
                    const auto xx = static_cast<std::ptrdiff_t>(x);
                    const double gx = correlate3(in, in_g, c, yy, xx, kx);
                    const double gy = correlate3(in, in_g, c, yy, xx, ky);
                    total += std::sqrt(gx * gx + gy * gy);
                }
                out[y * in_g.w + x] = static_cast<float>(total / double(in_g.c));
            }
        }
    });
}

DataPair fourier_magnitude(const DataPair& d)
{
    const Shape shape = output_shape(Transform::FourierMagnitude, d.instance_shape());
    const Dims g{shape[0], shape[1], shape[2]};
    const std::size_t n = g.h * g.w;
    auto* buf = fftw_alloc_complex(n);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_2d(static_cast<int>(g.h), static_cast<int>(g.w), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    const std::size_t sh = g.h / 2;
    const std::size_t sw = g.w / 2;
    DataPair out = map_pair(d, shape, [&](const float* in, float* o) {
        for (std::size_t c = 0; c < g.c; ++c) {
            for (std::size_t p = 0; p < n; ++p) {
                buf[p][0] = in[p * g.c + c];
                buf[p][1] = 0.0;
            }
            fftw_execute(plan);
            for (std::size_t u = 0; u < g.h; ++u) {
                for (std::size_t v = 0; v < g.w; ++v) {
                    const double mag = std::hypot(buf[u * g.w + v][0], buf[u * g.w + v][1]);
                    const std::size_t cu = (u + sh) % g.h;
                    const std::size_t cv = (v + sw) % g.w;
                    o[(cu * g.w + cv) * g.c + c] = static_cast<float>(std::log1p(mag));
                }
            }
        }
    });
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return out;
}

DataPair dct_transform(const DataPair& d)
{
    const Shape shape = output_shape(Transform::DctTransform, d.instance_shape());
    const Dims g{shape[0], shape[1], shape[2]};
    const std::size_t n = g.h * g.w;
    return map_pair(d, shape, [&](const float* in, float* out) {
        std::vector<double> plane(n);
        for (std::size_t c = 0; c < g.c; ++c) {
            for (std::size_t p = 0; p < n; ++p) {
                plane[p] = in[p * g.c + c];
            }
            const auto coeffs = dct2(plane, g.h, g.w);
            for (std::size_t p = 0; p < n; ++p) {
                out[p * g.c + c] = static_cast<float>(coeffs[p]);
            }
        }
    });
}

DataPair intensity_histogram(const DataPair& d, int bins)
{
    const Shape in_shape = d.instance_shape();
    const Shape shape = output_shape(Transform::IntensityHistogram, in_shape, bins);
    const std::size_t channels = in_shape.size() == 3 ? in_shape[2] : 1;
    const std::size_t per_channel = nn::product(in_shape) / channels;
    const auto nb = static_cast<std::size_t>(bins);
    return map_pair(d, shape, [&](const float* in, float* out) {
        for (std::size_t c = 0; c < channels; ++c) {
            float lo = in[c];
            float hi = in[c];
            for (std::size_t p = 0; p < per_channel; ++p) {
                lo = std::min(lo, in[p * channels + c]);
                hi = std::max(hi, in[p * channels + c]);
            }
            std::vector<std::size_t> counts(nb, 0);
            const double range = double(hi) - double(lo);
            for (std::size_t p = 0; p < per_channel; ++p) {
                std::size_t b = 0;
                if (range > 0.0) {
                    b = static_cast<std::size_t>((double(in[p * channels + c]) - lo) / range * double(nb));
                    b = std::min(b, nb - 1);
                }
                ++counts[b];
            }
            for (std::size_t b = 0; b < nb; ++b) {
                out[c * nb + b] = static_cast<float>(double(counts[b]) / double(per_channel));
            }
        }
    });
}

DataPair threshold_binarize(const DataPair& d, double t)
{
    const Shape shape = d.instance_shape();
    const std::size_t n = nn::product(shape);
    return map_pair(d, shape, [&](const float* in, float* out) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = double(in[i]) >= t ? 1.0f : 0.0f;
        }
    });
}

NormalizeStats fit_normalize(const LabeledSplit& train)
{
    const Shape shape = train.instances.sample_shape();
    const std::size_t channels = shape.empty() ? 1 : shape.back();
    const std::size_t total = train.instances.size();
    NormalizeStats s;
    s.mean.assign(channels, 0.0);
    s.stddev.assign(channels, 0.0);
    if (total == 0) {
        return s;
    }
    const double count = double(total / channels);
    for (std::size_t i = 0; i < total; ++i) {
        s.mean[i % channels] += train.instances[i];
    }
    for (auto& m : s.mean) {
        m /= count;
    }
    for (std::size_t i = 0; i < total; ++i) {
        const double dv = train.instances[i] - s.mean[i % channels];
        s.stddev[i % channels] += dv * dv;
    }
    for (auto& v : s.stddev) {
        v = std::sqrt(v / count);
    }
    return s;
}

LabeledSplit apply_normalize(const LabeledSplit& split, const NormalizeStats& stats)
{
    LabeledSplit out = split;
    const std::size_t channels = stats.mean.size();
    for (std::size_t i = 0; i < out.instances.size(); ++i) {
        const std::size_t c = i % channels;
        out.instances[i] = static_cast<float>((split.instances[i] - stats.mean[c]) / std::max(stats.stddev[c], kStdFloor));
    }
    return out;
}

DataPair normalize_fit_apply(const DataPair& d)
{
    const NormalizeStats stats = fit_normalize(d.train);
    DataPair out;
    out.n_classes = d.n_classes;
    out.train = apply_normalize(d.train, stats);
    out.validation = apply_normalize(d.validation, stats);
    out.test = apply_normalize(d.test, stats);
    return out;
}

} // namespace neurotree::preprocess
