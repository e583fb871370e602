#include "neurotree/io/datasets.hpp"
#include "neurotree/nn/train.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

using namespace neurotree;
using namespace neurotree::io;

namespace {

std::map<int, std::size_t> class_counts(const LabeledSplit& s)
{
    std::map<int, std::size_t> out;
    for (auto l : s.labels) {
        ++out[l];
    }
    return out;
}

struct TempDir {
    std::filesystem::path path;
    TempDir()
        : path(std::filesystem::temp_directory_path() /
               ("neurotree_ds_" + std::to_string(reinterpret_cast<std::uintptr_t>(this))))
    {
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

// Record r of a batch: label r % 10, pixel bytes (r + channel * 7 + p) % 256.
void write_batch(const std::filesystem::path& file, std::size_t records, std::size_t label_offset = 0)
{
    std::ofstream out(file, std::ios::binary);
    for (std::size_t r = 0; r < records; ++r) {
        out.put(static_cast<char>((r + label_offset) % 10));
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t p = 0; p < kCifarPixels; ++p) {
                out.put(static_cast<char>((r + c * 7 + p) % 256));
            }
        }
    }
}

} // namespace

TEST_CASE("synthetic datasets are deterministic and stratified 70/15/15")
{
    for (auto kind : {SyntheticKind::Blobs, SyntheticKind::Rings, SyntheticKind::Bars}) {
        SyntheticSpec s;
        s.kind = kind;
        s.n = 301;
        s.classes = 4;
        s.seed = 8;
        const DataPair a = make_synthetic(s);
        CHECK(a == make_synthetic(s));
        s.seed = 9;
        CHECK_FALSE(a == make_synthetic(s));

        CHECK(a.n_classes == 4);
        CHECK(a.train.size() + a.validation.size() + a.test.size() == 301);
        CHECK(a.instance_shape() == nn::Shape{8, 8, 3});
        for (const auto* split : {&a.train, &a.validation, &a.test}) {
            const auto counts = class_counts(*split);
            REQUIRE(counts.size() == 4);
            std::size_t lo = SIZE_MAX, hi = 0;
            for (auto [_, n] : counts) {
                lo = std::min(lo, n);
                hi = std::max(hi, n);
            }
            CHECK(hi - lo <= 1);
        }
        CHECK(a.train.size() == doctest::Approx(0.70 * 301).epsilon(0.03));
        CHECK(a.test.size() == doctest::Approx(0.15 * 301).epsilon(0.1));
    }
    SyntheticSpec tiny;
    tiny.n = 29;
    CHECK_THROWS_AS(make_synthetic(tiny), std::invalid_argument);
}

TEST_CASE("well-separated blobs are learnable by a single dense layer")
{
    SyntheticSpec s;
    s.n = 600;
    s.classes = 3;
    s.noise = 0.1;
    s.seed = 4;
    const DataPair d = make_synthetic(s);
    primitives::LayerParams p;
    p.output_dim = 3;
    p.activation = gp::Activation::Softmax;
    p.weight_decay = 0.0;
    const auto layers = primitives::layer_primitive_apply(primitives::LayerKind::Dense, primitives::input_tree(), p);
    auto net = nn::compile<float>(layers, d.instance_shape(), d.n_classes, {.seed = 1});
    nn::TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.max_epochs = 20;
    nn::train(net, d.train, d.validation, cfg, 2);
    CHECK(1.0 - nn::error_rate(nn::predict(net, d.test.instances), d.test.labels) >= 0.95);
}

TEST_CASE("stratified holdout takes a per-class fraction")
{
    SyntheticSpec s;
    s.n = 200;
    s.classes = 2;
    const DataPair d = make_synthetic(s);
    const auto [keep, hold] = stratified_holdout(d.train, 0.1, 3);
    CHECK(keep.size() + hold.size() == d.train.size());
    for (auto [label, n] : class_counts(hold)) {
        CHECK(n == static_cast<std::size_t>(std::llround(0.1 * double(class_counts(d.train)[label]))));
    }
    CHECK_THROWS_AS(stratified_holdout(d.train, 1.0, 0), std::invalid_argument);
}

TEST_CASE("cifar batch records decode to HWC floats")
{
    TempDir dir;
    const auto file = dir.path / "one.bin";
    write_batch(file, 3);
    const LabeledSplit s = read_cifar10_batch(file);
    REQUIRE(s.size() == 3);
    CHECK(s.instances.dims == std::vector<std::size_t>{3, 32, 32, 3});
    CHECK(s.labels == std::vector<std::int32_t>{0, 1, 2});
    // Record 1, row 2, column 5, channel G: pixel p = 2*32 + 5.
    const std::size_t p = 2 * 32 + 5;
    CHECK(s.instances.values[1 * 3072 + p * 3 + 1] == doctest::Approx(double((1 + 7 + p) % 256) / 255.0));
    for (float v : s.instances.values) {
        REQUIRE(v >= 0.0f);
        REQUIRE(v <= 1.0f);
    }
}

TEST_CASE("damaged cifar files are rejected")
{
    TempDir dir;
    const auto file = dir.path / "bad.bin";
    write_batch(file, 2);
    std::filesystem::resize_file(file, 2 * kCifarRecordBytes - 1);
    try {
        read_cifar10_batch(file);
        FAIL("expected TruncatedRecord");
    } catch (const TruncatedRecord& e) {
        CHECK(e.offset == kCifarRecordBytes);
    }
    std::filesystem::resize_file(file, 3072 * 2);
    CHECK_THROWS_AS(read_cifar10_batch(file), TruncatedRecord);

    {
        std::ofstream out(file, std::ios::binary);
        out.put(10);
        out << std::string(3072, '\0');
    }
    CHECK_THROWS_AS(read_cifar10_batch(file), LabelOutOfRange);
    CHECK_THROWS_AS(read_cifar10_batch(dir.path / "absent.bin"), MissingFile);
    CHECK_THROWS_AS(load_cifar10(dir.path), MissingFile);
}

TEST_CASE("cifar directory loads into train, validation and test")
{
    TempDir dir;
    for (int i = 1; i <= 5; ++i) {
        write_batch(dir.path / ("data_batch_" + std::to_string(i) + ".bin"), 20, static_cast<std::size_t>(i));
    }
    write_batch(dir.path / "test_batch.bin", 10);
    const DataPair d = load_cifar10(dir.path, 0.1, 0);
    CHECK(d.n_classes == 10);
    CHECK(d.train.size() == 90);
    CHECK(d.validation.size() == 10);
    CHECK(d.test.size() == 10);
    for (auto [_, n] : class_counts(d.validation)) {
        CHECK(n == 1);
    }
    const DataPair via_id = load_dataset("cifar10:dir=" + dir.path.string());
    CHECK(via_id == d);
}

TEST_CASE("dataset ids resolve and canonicalize")
{
    CHECK(canonical_dataset_id("blobs") == "blobs:channels=3,classes=3,n=300,noise=0.3,seed=0,size=8");
    CHECK(canonical_dataset_id("blobs:seed=2,n=100") == canonical_dataset_id("blobs:n=100,seed=2"));
    CHECK(canonical_dataset_id("rings:noise=0.25") == "rings:channels=3,classes=3,n=300,noise=0.25,seed=0,size=8");
    CHECK(canonical_dataset_id("cifar10:dir=/x") == "cifar10:dir=/x,seed=0,val=0.1");

    const DataPair d = load_dataset("bars:n=60,size=6,channels=1,classes=2,seed=5");
    CHECK(d.instance_shape() == nn::Shape{6, 6, 1});
    CHECK(d.n_classes == 2);

    CHECK_THROWS_AS(load_dataset("spirals"), std::invalid_argument);
    CHECK_THROWS_AS(load_dataset("blobs:colour=3"), std::invalid_argument);
    CHECK_THROWS_AS(load_dataset("blobs:n=abc"), std::invalid_argument);
    CHECK_THROWS_AS(load_dataset("blobs:n=50,n=60"), std::invalid_argument);
    CHECK_THROWS_AS(load_dataset("cifar10:val=0.2"), std::invalid_argument);
}
