#include "neurotree/nn/pretrained.hpp"

#include "neurotree/nn/tensor_file.hpp"
#include "neurotree/rng.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <stdexcept>

namespace neurotree::nn {

StubSpec stub_spec(gp::Pretrained kind)
{
    switch (kind) {
    case gp::Pretrained::Vgg: return {16, 32};
    case gp::Pretrained::MobileNet: return {8, 16};
    case gp::Pretrained::Inception: return {12, 24};
    }
    throw std::invalid_argument("unknown stub kind");
}

std::string stub_file_name(gp::Pretrained kind) { return std::string(gp::to_string(kind)) + ".ckpt"; }

std::vector<Shape> stub_tensor_shapes(gp::Pretrained kind)
{
    const StubSpec s = stub_spec(kind);
    return {{kStubKernel, kStubKernel, kStubChannels, s.conv1_filters},
            {s.conv1_filters},
            {kStubKernel, kStubKernel, s.conv1_filters, s.conv2_filters},
            {s.conv2_filters}};
}

std::vector<Tensor<float>> fallback_stub_weights(gp::Pretrained kind)
{
    Rng rng(0x5eed0000u + static_cast<std::uint64_t>(kind));
    std::vector<Tensor<float>> out;
    for (const Shape& shape : stub_tensor_shapes(kind)) {
        Tensor<float> t(shape);
        if (shape.size() == 4) {
            const double fan_in = static_cast<double>(shape[0] * shape[1] * shape[2]);
            const double fan_out = static_cast<double>(shape[0] * shape[1] * shape[3]);
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            for (auto& v : t.values) {
                v = static_cast<float>(rng.uniform(-limit, limit));
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

StubRegistry::StubRegistry()
{
    for (auto kind : gp::kPretrained) {
        fallback_[static_cast<std::size_t>(kind)] = fallback_stub_weights(kind);
    }
}

StubRegistry StubRegistry::load(const std::filesystem::path& dir)
{
    StubRegistry reg;
    for (auto kind : gp::kPretrained) {
        const auto path = dir / stub_file_name(kind);
        if (!std::filesystem::exists(path)) {
            spdlog::warn("stub checkpoint {} missing; using deterministic fallback weights", path.string());
            continue;
        }
        reg.set(kind, load_tensors(path));
    }
    return reg;
}

void StubRegistry::set(gp::Pretrained kind, std::vector<Tensor<float>> weights)
{
    const auto shapes = stub_tensor_shapes(kind);
    if (weights.size() != shapes.size()) {
        throw std::invalid_argument("stub " + std::string(gp::to_string(kind)) + " expects " +
                                    std::to_string(shapes.size()) + " tensors");
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (weights[i].dims != shapes[i]) {
            throw std::invalid_argument("stub " + std::string(gp::to_string(kind)) + " tensor " + std::to_string(i) +
                                        " has shape " + to_string(weights[i].dims) + ", expected " +
                                        to_string(shapes[i]));
        }
    }
    weights_[static_cast<std::size_t>(kind)] = std::move(weights);
}

const std::vector<Tensor<float>>& StubRegistry::weights(gp::Pretrained kind) const
{
    const auto i = static_cast<std::size_t>(kind);
    if (weights_[i]) {
        return *weights_[i];
    }
    return fallback_[i];
}

bool StubRegistry::loaded(gp::Pretrained kind) const { return weights_[static_cast<std::size_t>(kind)].has_value(); }

} // namespace neurotree::nn
