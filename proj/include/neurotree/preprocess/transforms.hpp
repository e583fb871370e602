#pragma once

#include "neurotree/data.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurotree::preprocess {

class PreprocessError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotRGB : public PreprocessError {
public:
    using PreprocessError::PreprocessError;
};

class NotSpatial : public PreprocessError {
public:
    using PreprocessError::PreprocessError;
};

class InvalidSigma : public PreprocessError {
public:
    using PreprocessError::PreprocessError;
};

class InvalidBins : public PreprocessError {
public:
    using PreprocessError::PreprocessError;
};

enum class Transform : std::uint8_t {
    CosineWindow,
    Grayscale,
    Normalize,
    GaussianBlur,
    SobelEdges,
    FourierMagnitude,
    DctTransform,
    IntensityHistogram,
    Threshold,
};

/// Per-instance output shape of `kind` on `in`; throws the same errors the
/// transform itself would. `bins` is read only by IntensityHistogram.
nn::Shape output_shape(Transform kind, const nn::Shape& in, int bins = 0);

/// Symmetric Hann window of length n; n == 1 gives {1}.
std::vector<double> hann_window(std::size_t n);

/// Half-sample symmetric reflection of `i` into [0, n): ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::size_t n);

/// Normalized 1-D Gaussian taps over [-ceil(3 sigma), ceil(3 sigma)].
std::vector<double> gaussian_kernel(double sigma);

/// Orthonormal 2-D DCT-II of one H x W plane and its inverse.
std::vector<double> dct2(const std::vector<double>& plane, std::size_t h, std::size_t w);
std::vector<double> idct2(const std::vector<double>& coeffs, std::size_t h, std::size_t w);

/// Separable Hann taper per channel; needs spatial instances.
DataPair cosine_window(const DataPair& d);
/// Luma 0.299 R + 0.587 G + 0.114 B; needs exactly 3 channels.
DataPair grayscale(const DataPair& d);
DataPair gaussian_blur(const DataPair& d, double sigma);
/// Sobel gradient magnitude. RGB input is reduced to luma first; other
/// channel counts average the per-channel magnitudes. Output has 1 channel.
DataPair sobel_edges(const DataPair& d);
/// log1p of the centered 2-D DFT magnitude, per channel.
DataPair fourier_magnitude(const DataPair& d);
/// Orthonormal 2-D DCT-II, per channel.
DataPair dct_transform(const DataPair& d);
/// bins x channels normalized counts per instance over that instance's own
/// per-channel [min, max] range; output is flat, channel-major.
DataPair intensity_histogram(const DataPair& d, int bins);
/// 1 where value >= t, else 0.
DataPair threshold_binarize(const DataPair& d, double t);

/// Per-channel (last axis) statistics fitted on a train split.
struct NormalizeStats {
    std::vector<double> mean;
    std::vector<double> stddev;

    bool operator==(const NormalizeStats&) const = default;
};

inline constexpr double kStdFloor = 1e-8;

NormalizeStats fit_normalize(const LabeledSplit& train);
LabeledSplit apply_normalize(const LabeledSplit& split, const NormalizeStats& stats);
/// Fits on train only, then standardizes all three splits.
DataPair normalize_fit_apply(const DataPair& d);

} // namespace neurotree::preprocess
