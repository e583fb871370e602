#include "doctest.h"

#include "neurotree/preprocess/transforms.hpp"
#include "neurotree/rng.hpp"

#include <cmath>
#include <numeric>

using namespace neurotree;
using namespace neurotree::preprocess;
using nn::Shape;
using nn::Tensor;

namespace {

LabeledSplit random_split(std::size_t n, const Shape& shape, Rng& rng, double lo = 0.0, double hi = 1.0)
{
    LabeledSplit s;
    Shape dims = shape;
    dims.insert(dims.begin(), n);
    s.instances = Tensor<float>(dims);
    for (auto& v : s.instances.values) {
        v = static_cast<float>(rng.uniform(lo, hi));
    }
    for (std::size_t i = 0; i < n; ++i) {
        s.labels.push_back(static_cast<std::int32_t>(i % 2));
    }
    return s;
}

DataPair random_pair(const Shape& shape, std::uint64_t seed, std::size_t n = 6)
{
    Rng rng(seed);
    DataPair d;
    d.n_classes = 2;
    d.train = random_split(n, shape, rng);
    d.validation = random_split(n / 2 + 1, shape, rng);
    d.test = random_split(n / 2 + 1, shape, rng, 0.5, 3.0);
    return d;
}

/// Single-instance pair with identical content in all three splits.
DataPair single(const Shape& shape, std::vector<float> values)
{
    DataPair d;
    d.n_classes = 2;
    Shape dims = shape;
    dims.insert(dims.begin(), 1);
    d.train.instances = Tensor<float>(dims, std::move(values));
    d.train.labels = {0};
    d.validation = d.train;
    d.test = d.train;
    return d;
}

void check_split_integrity(const DataPair& before, const DataPair& after)
{
    CHECK(after.train.labels == before.train.labels);
    CHECK(after.validation.labels == before.validation.labels);
    CHECK(after.test.labels == before.test.labels);
    CHECK(after.train.instances.batch() == before.train.instances.batch());
    CHECK(after.validation.instances.batch() == before.validation.instances.batch());
    CHECK(after.test.instances.batch() == before.test.instances.batch());
    CHECK(after.n_classes == before.n_classes);
}

double sum_of(const Tensor<float>& t)
{
    return std::accumulate(t.values.begin(), t.values.end(), 0.0);
}

} // namespace

TEST_CASE("hann window")
{
    const auto w3 = hann_window(3);
    CHECK(w3 == std::vector<double>{0.0, 1.0, 0.0});
    CHECK(hann_window(1) == std::vector<double>{1.0});
    const auto out = cosine_window(single({1, 3, 1}, {5, 7, 9}));
    CHECK(out.train.instances.values == std::vector<float>{0, 7, 0});

    const auto d = random_pair({5, 6, 2}, 3);
    const auto r = cosine_window(d);
    check_split_integrity(d, r);
    for (std::size_t i = 0; i < r.train.instances.batch(); ++i) {
        const float* img = r.train.instances.data() + i * 60;
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t x = 0; x < 6; ++x) {
                CHECK(img[(0 * 6 + x) * 2 + c] == 0.0f);
                CHECK(img[(4 * 6 + x) * 2 + c] == 0.0f);
            }
            for (std::size_t y = 0; y < 5; ++y) {
                CHECK(img[(y * 6 + 0) * 2 + c] == 0.0f);
                CHECK(img[(y * 6 + 5) * 2 + c] == 0.0f);
            }
        }
    }
    const auto zeros = cosine_window(single({2, 2, 1}, {0, 0, 0, 0}));
    CHECK(sum_of(zeros.train.instances) == 0.0);
}

TEST_CASE("grayscale")
{
    const auto red = grayscale(single({1, 1, 3}, {255, 0, 0}));
    CHECK(red.train.instances[0] == doctest::Approx(76.245));
    const auto gray = grayscale(single({1, 1, 3}, {0.4f, 0.4f, 0.4f}));
    CHECK(gray.train.instances[0] == doctest::Approx(0.4));
    CHECK_THROWS_AS(grayscale(red), NotRGB);
}

TEST_CASE("normalize fits on train only")
{
    const auto d = random_pair({3, 3, 2}, 8, 20);
    const auto n = normalize_fit_apply(d);
    check_split_integrity(d, n);
    const auto stats = fit_normalize(n.train);
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(std::abs(stats.mean[c]) < 1e-5);
        CHECK(std::abs(stats.stddev[c] - 1.0) < 1e-5);
    }
    // The test split is drawn from a shifted range: fit-on-train leaves it
    // visibly off (0, 1), while a fit on all data would not.
    const auto test_stats = fit_normalize(n.test);
    CHECK(test_stats.mean[0] > 1.0);

    // Perturbing validation/test never changes the fitted statistics.
    DataPair perturbed = d;
    for (auto& v : perturbed.test.instances.values) {
        v += 100.0f;
    }
    for (auto& v : perturbed.validation.instances.values) {
        v *= -3.0f;
    }
    CHECK(fit_normalize(perturbed.train) == fit_normalize(d.train));
    CHECK(normalize_fit_apply(perturbed).train == n.train);

    const auto constant = normalize_fit_apply(single({2, 1, 1}, {4, 4}));
    CHECK(constant.train.instances.values == std::vector<float>{0, 0});
}

TEST_CASE("gaussian blur")
{
    const auto flat = gaussian_blur(single({4, 5, 1}, std::vector<float>(20, 0.3f)), 1.2);
    for (float v : flat.train.instances.values) {
        CHECK(v == doctest::Approx(0.3).epsilon(1e-6));
    }
    for (double sigma : {0.3, 0.8, 2.0, 3.5}) {
        const auto d = random_pair({7, 6, 3}, 5);
        const auto b = gaussian_blur(d, sigma);
        check_split_integrity(d, b);
        CAPTURE(sigma);
        CHECK(std::abs(sum_of(b.train.instances) - sum_of(d.train.instances)) < 1e-4);
    }
    const auto d = random_pair({6, 6, 1}, 6);
    const auto sharp = gaussian_blur(d, 0.1);
    for (std::size_t i = 0; i < d.train.instances.size(); ++i) {
        CHECK(std::abs(sharp.train.instances[i] - d.train.instances[i]) < 1e-3);
    }
    CHECK_THROWS_AS(gaussian_blur(d, 0.0), InvalidSigma);
    CHECK_THROWS_AS(gaussian_blur(d, -1.0), InvalidSigma);
}

TEST_CASE("reflect index is half-sample symmetric")
{
    CHECK(reflect_index(-1, 4) == 0);
    CHECK(reflect_index(-2, 4) == 1);
    CHECK(reflect_index(4, 4) == 3);
    CHECK(reflect_index(5, 4) == 2);
    CHECK(reflect_index(-9, 4) == 0);
    CHECK(reflect_index(0, 1) == 0);
    CHECK(reflect_index(3, 1) == 0);
}

TEST_CASE("sobel edges")
{
    const auto flat = sobel_edges(single({4, 4, 1}, std::vector<float>(16, 2.0f)));
    CHECK(sum_of(flat.train.instances) == 0.0);

    const float h = 1.5f;
    std::vector<float> step(5 * 6, 0.0f);
    for (std::size_t y = 0; y < 5; ++y) {
        for (std::size_t x = 3; x < 6; ++x) {
            step[y * 6 + x] = h;
        }
    }
    const auto e = sobel_edges(single({5, 6, 1}, step));
    for (std::size_t y = 1; y < 4; ++y) {
        CHECK(e.train.instances[y * 6 + 2] == doctest::Approx(4 * h));
        CHECK(e.train.instances[y * 6 + 3] == doctest::Approx(4 * h));
        CHECK(e.train.instances[y * 6 + 0] == doctest::Approx(0.0));
    }
    const auto rgb = sobel_edges(random_pair({4, 4, 3}, 2));
    CHECK(rgb.instance_shape() == Shape{4, 4, 1});
    for (float v : rgb.train.instances.values) {
        CHECK(v >= 0.0f);
    }
}

TEST_CASE("fourier magnitude")
{
    const float c = 0.5f;
    const auto k = fourier_magnitude(single({4, 6, 1}, std::vector<float>(24, c)));
    for (std::size_t i = 0; i < 24; ++i) {
        if (i == 2 * 6 + 3) {
            CHECK(k.train.instances[i] == doctest::Approx(std::log1p(c * 24.0)));
        } else {
            CHECK(std::abs(k.train.instances[i]) < 1e-6);
        }
    }
    for (const Shape& shape : {Shape{4, 6, 1}, Shape{5, 7, 1}, Shape{4, 5, 2}}) {
        const auto d = random_pair(shape, 12);
        const auto f = fourier_magnitude(d);
        const std::size_t H = shape[0], W = shape[1], C = shape[2];
        // Point reflection about the centered DC bin; even axes wrap.
        const auto& img = f.train.instances;
        for (std::size_t y = 0; y < H; ++y) {
            for (std::size_t x = 0; x < W; ++x) {
                const std::size_t ry = (2 * (H / 2) + H - y) % H;
                const std::size_t rx = (2 * (W / 2) + W - x) % W;
                for (std::size_t ch = 0; ch < C; ++ch) {
                    CHECK(img[(y * W + x) * C + ch] == doctest::Approx(img[(ry * W + rx) * C + ch]).epsilon(1e-5));
                }
            }
        }
    }
    const auto zero = fourier_magnitude(single({3, 3, 1}, std::vector<float>(9, 0.0f)));
    CHECK(sum_of(zero.train.instances) == 0.0);
}

TEST_CASE("dct orthonormality")
{
    Rng rng(4);
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {5, 7}, {1, 6}}) {
        std::vector<double> x(h * w);
        for (auto& v : x) {
            v = rng.uniform(-1, 1);
        }
        const auto X = dct2(x, h, w);
        const auto back = idct2(X, h, w);
        double e_in = 0, e_out = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::abs(back[i] - x[i]) < 1e-5);
            e_in += x[i] * x[i];
            e_out += X[i] * X[i];
        }
        CHECK(std::abs(e_in - e_out) < 1e-5);
    }
    const auto constant = dct_transform(single({4, 4, 1}, std::vector<float>(16, 2.0f)));
    CHECK(constant.train.instances[0] == doctest::Approx(8.0));
    for (std::size_t i = 1; i < 16; ++i) {
        CHECK(std::abs(constant.train.instances[i]) < 1e-6);
    }
}

TEST_CASE("intensity histogram")
{
    const auto d = random_pair({4, 4, 3}, 9);
    const auto hgram = intensity_histogram(d, 5);
    CHECK(hgram.instance_shape() == Shape{15});
    check_split_integrity(d, hgram);
    for (std::size_t i = 0; i < hgram.train.instances.batch(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            double s = 0;
            for (std::size_t b = 0; b < 5; ++b) {
                s += hgram.train.instances[i * 15 + c * 5 + b];
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    const auto uniform = intensity_histogram(single({2, 2, 1}, {0.3f, 0.3f, 0.3f, 0.3f}), 4);
    CHECK(uniform.train.instances.values == std::vector<float>{1, 0, 0, 0});

    // Permuting pixels leaves the histogram unchanged.
    Rng rng(2);
    DataPair permuted = d;
    for (std::size_t i = 0; i < permuted.train.instances.batch(); ++i) {
        std::vector<std::size_t> order(16);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        for (std::size_t p = 0; p < 16; ++p) {
            for (std::size_t c = 0; c < 3; ++c) {
                permuted.train.instances[i * 48 + p * 3 + c] = d.train.instances[i * 48 + order[p] * 3 + c];
            }
        }
    }
    CHECK(intensity_histogram(permuted, 5).train == hgram.train);
    CHECK_THROWS_AS(intensity_histogram(d, 1), InvalidBins);
}

TEST_CASE("threshold")
{
    const auto d = random_pair({3, 3, 1}, 1);
    for (float v : threshold_binarize(d, -1.0).train.instances.values) {
        CHECK(v == 1.0f);
    }
    for (float v : threshold_binarize(d, 2.0).train.instances.values) {
        CHECK(v == 0.0f);
    }
    for (double t : {0.25, 0.5, 1.0}) {
        const auto once = threshold_binarize(d, t);
        CHECK(threshold_binarize(once, t) == once);
    }
}

TEST_CASE("declared shapes match produced shapes")
{
    const auto d = random_pair({6, 5, 3}, 21);
    const Shape in = d.instance_shape();
    CHECK(cosine_window(d).instance_shape() == output_shape(Transform::CosineWindow, in));
    CHECK(grayscale(d).instance_shape() == output_shape(Transform::Grayscale, in));
    CHECK(normalize_fit_apply(d).instance_shape() == output_shape(Transform::Normalize, in));
    CHECK(gaussian_blur(d, 1.0).instance_shape() == output_shape(Transform::GaussianBlur, in));
    CHECK(sobel_edges(d).instance_shape() == output_shape(Transform::SobelEdges, in));
    CHECK(fourier_magnitude(d).instance_shape() == output_shape(Transform::FourierMagnitude, in));
    CHECK(dct_transform(d).instance_shape() == output_shape(Transform::DctTransform, in));
    CHECK(intensity_histogram(d, 7).instance_shape() == output_shape(Transform::IntensityHistogram, in, 7));
    CHECK(threshold_binarize(d, 0.5).instance_shape() == output_shape(Transform::Threshold, in));

    const auto flat = intensity_histogram(d, 4);
    CHECK_THROWS_AS(cosine_window(flat), NotSpatial);
    CHECK_THROWS_AS(fourier_magnitude(flat), NotSpatial);
}

TEST_CASE("transforms never mutate their input")
{
    const auto d = random_pair({4, 4, 3}, 33);
    const DataPair copy = d;
    (void)cosine_window(d);
    (void)gaussian_blur(d, 0.7);
    (void)normalize_fit_apply(d);
    (void)sobel_edges(d);
    (void)dct_transform(d);
    CHECK(d == copy);
}
