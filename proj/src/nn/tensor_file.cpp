#include "neurotree/nn/tensor_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace neurotree::nn {

namespace {

constexpr std::uint32_t kMaxRank = 8;

void put_u32(std::ostream& out, std::uint32_t v)
{
    const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                   static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in)
{
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
        throw TensorFileError("unexpected end of tensor file");
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void write_tensors(std::ostream& out, const std::vector<Tensor<float>>& tensors)
{
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        put_u32(out, static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.dims) {
            put_u32(out, static_cast<std::uint32_t>(d));
        }
    }
    for (const auto& t : tensors) {
        for (float v : t.values) {
            put_u32(out, std::bit_cast<std::uint32_t>(v));
        }
    }
    if (!out) {
        throw TensorFileError("failed writing tensor file");
    }
}

std::vector<Tensor<float>> read_tensors(std::istream& in)
{
    const std::uint32_t count = get_u32(in);
    if (count > 4096) {
        throw TensorFileError("implausible tensor count " + std::to_string(count));
    }
    std::vector<Tensor<float>> tensors(count);
    for (auto& t : tensors) {
        const std::uint32_t rank = get_u32(in);
        if (rank > kMaxRank) {
            throw TensorFileError("implausible tensor rank " + std::to_string(rank));
        }
        t.dims.resize(rank);
        for (auto& d : t.dims) {
            d = get_u32(in);
        }
    }
    for (auto& t : tensors) {
        t.values.resize(product(t.dims));
        for (auto& v : t.values) {
            v = std::bit_cast<float>(get_u32(in));
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw TensorFileError("trailing bytes after tensor data");
    }
    return tensors;
}

void save_tensors(const std::filesystem::path& path, const std::vector<Tensor<float>>& tensors)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw TensorFileError("cannot open " + path.string() + " for writing");
    }
    write_tensors(out, tensors);
}

std::vector<Tensor<float>> load_tensors(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TensorFileError("cannot open " + path.string());
    }
    return read_tensors(in);
}

} // namespace neurotree::nn
