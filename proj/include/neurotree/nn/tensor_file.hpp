#pragma once

#include "neurotree/nn/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace neurotree::nn {

class TensorFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary layout, all little-endian: u32 tensor count; per tensor u32 rank
/// then rank x u32 dims; then every tensor's float32 values in order.
void write_tensors(std::ostream& out, const std::vector<Tensor<float>>& tensors);
std::vector<Tensor<float>> read_tensors(std::istream& in);

void save_tensors(const std::filesystem::path& path, const std::vector<Tensor<float>>& tensors);
std::vector<Tensor<float>> load_tensors(const std::filesystem::path& path);

} // namespace neurotree::nn
