#include "neurotree/io/datasets.hpp"
#include "neurotree/primitives/stub_pretraining.hpp"

#include <doctest.h>

using namespace neurotree;

TEST_CASE("stub pretraining is deterministic and moves the weights")
{
    io::SyntheticSpec spec;
    spec.kind = io::SyntheticKind::Bars;
    spec.n = 90;
    spec.classes = 3;
    const DataPair data = io::make_synthetic(spec);
    primitives::StubPretraining opts;
    opts.epochs = 2;
    const auto kind = gp::Pretrained::MobileNet;
    const auto a = primitives::pretrain_stub(kind, data, opts);
    const auto b = primitives::pretrain_stub(kind, data, opts);
    CHECK(a == b);
    const auto shapes = nn::stub_tensor_shapes(kind);
    REQUIRE(a.size() == shapes.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].dims == shapes[i]);
    }
    CHECK(a[0] != nn::fallback_stub_weights(kind)[0]);

    nn::StubRegistry registry;
    CHECK_NOTHROW(registry.set(kind, a));

    io::SyntheticSpec gray = spec;
    gray.channels = 1;
    CHECK_THROWS_AS(primitives::pretrain_stub(kind, io::make_synthetic(gray), opts), std::invalid_argument);
}

TEST_CASE("shipped stub checkpoints load for every kind")
{
    const auto registry = nn::StubRegistry::load("data/stubs");
    for (auto kind : gp::kPretrained) {
        CHECK(registry.loaded(kind));
    }
}
