#pragma once

#include "neurotree/gp/types.hpp"
#include "neurotree/nn/tensor.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace neurotree::nn {

/// Filter counts of the two conv stages in a stub feature extractor.
struct StubSpec {
    std::size_t conv1_filters;
    std::size_t conv2_filters;
};

inline constexpr std::size_t kStubKernel = 3;
/// Input channel count stub checkpoints are trained for.
inline constexpr std::size_t kStubChannels = 3;

StubSpec stub_spec(gp::Pretrained kind);
std::string stub_file_name(gp::Pretrained kind);

/// Tensor shapes of a stub checkpoint: conv1 kernel, conv1 bias, conv2
/// kernel, conv2 bias.
std::vector<Shape> stub_tensor_shapes(gp::Pretrained kind);

/// Deterministic stand-in used when no checkpoint is available.
std::vector<Tensor<float>> fallback_stub_weights(gp::Pretrained kind);

/// Starting weights for every stub kind. Stubs are shared read-only across
/// compiled networks; each network copies them into its own parameters.
class StubRegistry {
public:
    StubRegistry();

    /// Loads `<dir>/<kind>.ckpt` for every kind; missing files fall back.
    static StubRegistry load(const std::filesystem::path& dir);

    /// Throws std::invalid_argument when shapes disagree with stub_tensor_shapes.
    void set(gp::Pretrained kind, std::vector<Tensor<float>> weights);
    const std::vector<Tensor<float>>& weights(gp::Pretrained kind) const;
    bool loaded(gp::Pretrained kind) const;

private:
    std::array<std::optional<std::vector<Tensor<float>>>, gp::kPretrained.size()> weights_;
    std::array<std::vector<Tensor<float>>, gp::kPretrained.size()> fallback_;
};

} // namespace neurotree::nn
