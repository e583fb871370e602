#pragma once

#include "neurotree/nn/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace neurotree {

/// Instances batched along dims[0], labels aligned by row.
struct LabeledSplit {
    nn::Tensor<float> instances;
    std::vector<std::int32_t> labels;

    std::size_t size() const { return labels.size(); }
    bool operator==(const LabeledSplit&) const = default;
};

/// Train/validation/test splits sharing one per-instance shape.
struct DataPair {
    LabeledSplit train;
    LabeledSplit validation;
    LabeledSplit test;
    std::size_t n_classes = 0;

    nn::Shape instance_shape() const { return train.instances.sample_shape(); }
    bool operator==(const DataPair&) const = default;
};

} // namespace neurotree
