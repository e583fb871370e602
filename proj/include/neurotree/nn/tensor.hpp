#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurotree::nn {

/// Per-sample shape: {H, W, C} for images, {F} for flat feature vectors.
using Shape = std::vector<std::size_t>;

inline std::size_t product(const std::vector<std::size_t>& dims)
{
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string to_string(const Shape& shape)
{
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out += (i ? "," : "") + std::to_string(shape[i]);
    }
    return out + ")";
}

inline bool is_spatial(const Shape& shape) { return shape.size() == 3; }

/// Dense row-major tensor. Batched tensors carry the batch as dims[0].
template <typename T>
struct Tensor {
    std::vector<std::size_t> dims;
    std::vector<T> values;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> d, T fill = T{}) : dims(std::move(d)), values(product(dims), fill) {}
    Tensor(std::vector<std::size_t> d, std::vector<T> v) : dims(std::move(d)), values(std::move(v))
    {
        if (values.size() != product(dims)) {
            throw std::invalid_argument("tensor values do not match dims");
        }
    }

    std::size_t size() const { return values.size(); }
    std::size_t rank() const { return dims.size(); }
    T* data() { return values.data(); }
    const T* data() const { return values.data(); }
    T& operator[](std::size_t i) { return values[i]; }
    const T& operator[](std::size_t i) const { return values[i]; }

    std::size_t batch() const { return dims.empty() ? 0 : dims[0]; }
    std::size_t sample_size() const { return dims.empty() ? 0 : values.size() / std::max<std::size_t>(dims[0], 1); }
    Shape sample_shape() const { return Shape(dims.begin() + (dims.empty() ? 0 : 1), dims.end()); }

    void fill(T v) { std::fill(values.begin(), values.end(), v); }

    bool operator==(const Tensor&) const = default;
};

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t)
{
    Tensor<To> out;
    out.dims = t.dims;
    out.values.assign(t.values.begin(), t.values.end());
    return out;
}

/// Rows [begin, begin + idx.size()) gathered by index from a batched tensor.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& src, const std::vector<std::size_t>& idx)
{
    const std::size_t stride = src.sample_size();
    std::vector<std::size_t> dims = src.dims;
    dims[0] = idx.size();
    Tensor<T> out(dims);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        std::copy_n(src.values.begin() + static_cast<std::ptrdiff_t>(idx[r] * stride), stride,
                    out.values.begin() + static_cast<std::ptrdiff_t>(r * stride));
    }
    return out;
}

} // namespace neurotree::nn
