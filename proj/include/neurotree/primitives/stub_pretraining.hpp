#pragma once

#include "neurotree/data.hpp"
#include "neurotree/nn/pretrained.hpp"

namespace neurotree::primitives {

struct StubPretraining {
    int epochs = 8;
    int batch_size = 16;
    std::uint64_t seed = 0;
};

/// Trains `kind`'s feature extractor under a fresh logit head on `data`
/// (3-channel images) and returns its four tensors in checkpoint order.
/// Starts from the fallback weights, so the result is a pure function of
/// (kind, data, options).
std::vector<nn::Tensor<float>> pretrain_stub(gp::Pretrained kind, const DataPair& data,
                                             const StubPretraining& options = {});

} // namespace neurotree::primitives
