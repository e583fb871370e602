#pragma once

#include "neurotree/data.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace neurotree::io {

enum class SyntheticKind : std::uint8_t { Blobs, Rings, Bars };

std::string_view to_string(SyntheticKind k);

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::Blobs;
    std::size_t n = 300;
    std::size_t height = 8;
    std::size_t width = 8;
    std::size_t channels = 3;
    std::size_t classes = 3;
    /// Std-dev of the additive Gaussian pixel noise.
    double noise = 0.3;
    std::uint64_t seed = 0;
};

/// Labeled images with class-dependent structure, classes balanced within
/// one instance, split 70/15/15 per class. Pure function of the spec.
DataPair make_synthetic(const SyntheticSpec& spec);

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingFile : public DatasetError {
public:
    explicit MissingFile(const std::filesystem::path& p)
        : DatasetError("missing dataset file " + p.string()), path(p)
    {
    }
    std::filesystem::path path;
};

class TruncatedRecord : public DatasetError {
public:
    TruncatedRecord(const std::filesystem::path& p, std::uint64_t offset)
        : DatasetError("truncated record in " + p.string() + " at byte " + std::to_string(offset)),
          path(p),
          offset(offset)
    {
    }
    std::filesystem::path path;
    std::uint64_t offset;
};

class LabelOutOfRange : public DatasetError {
public:
    LabelOutOfRange(const std::filesystem::path& p, std::uint64_t offset, int label)
        : DatasetError("label " + std::to_string(label) + " out of range in " + p.string() + " at byte " +
                       std::to_string(offset)),
          label(label)
    {
    }
    int label;
};

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarPixels = kCifarSide * kCifarSide;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * kCifarPixels;
inline constexpr int kCifarClasses = 10;

/// One binary batch file: records of 1 label byte then 1024 R, 1024 G,
/// 1024 B bytes. Images come back as (N, 32, 32, 3) in [0, 1].
LabeledSplit read_cifar10_batch(const std::filesystem::path& file);

/// data_batch_1..5.bin and test_batch.bin from `dir`. A stratified
/// `validation_fraction` of train becomes the validation split.
DataPair load_cifar10(const std::filesystem::path& dir, double validation_fraction = 0.1, std::uint64_t seed = 0);

/// Stratified split of `all` into (train, holdout) with round(fraction *
/// class count) holdout instances per class.
std::pair<LabeledSplit, LabeledSplit> stratified_holdout(const LabeledSplit& all, double fraction, std::uint64_t seed);

/// Resolves a dataset id:
///   blobs|rings|bars[:key=value,...]  keys n, seed, classes, noise, size, channels
///   cifar10:dir=<path>[,val=<fraction>,seed=<n>]
DataPair load_dataset(const std::string& id);

/// Canonical spelling of a dataset id (keys sorted, defaults filled in), so
/// equivalent ids share cache entries.
std::string canonical_dataset_id(const std::string& id);

} // namespace neurotree::io
